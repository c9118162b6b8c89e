"""Exception hierarchy for boxjenkins.

Everything raised deliberately by the library derives from `BoxJenkinsError`,
so callers (the CLI in particular) can map failures to exit codes.
"""
from __future__ import annotations

from typing import Any


class BoxJenkinsError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(BoxJenkinsError, ValueError):
    """Input too short, constant, or otherwise unusable."""


class NonpositiveDataError(BoxJenkinsError, ValueError):
    """Box-Cox requested on data containing values <= 0."""


class DomainError(BoxJenkinsError, ValueError):
    """Argument outside the mathematical domain (e.g. non-stationary AR)."""


class InvalidPipelineError(BoxJenkinsError, ValueError):
    """Transform bookkeeping does not match the data it is applied to."""


class NumericalDegeneracyError(BoxJenkinsError, ArithmeticError):
    """A recursion hit a unit pivot."""


class NumericalOverflowError(BoxJenkinsError, ArithmeticError):
    """A non-finite value appeared in an intermediate computation."""


class CollinearityError(BoxJenkinsError, ArithmeticError):
    """Regression design matrix is singular."""


class InvalidDofError(BoxJenkinsError, ValueError):
    """Non-positive degrees of freedom for a chi-square reference."""


class UnsupportedSizeError(BoxJenkinsError, ValueError):
    """Sample size outside the range the algorithm supports."""


class ConvergenceError(BoxJenkinsError, RuntimeError):
    """Optimizer hit its iteration limit.

    The best point reached is kept on ``best_point`` so callers can inspect
    or warm-start from it.
    """

    def __init__(self, message: str, best_point: Any = None, best_value: float | None = None):
        super().__init__(message)
        self.best_point = best_point
        self.best_value = best_value


class NonStationarityError(BoxJenkinsError, RuntimeError):
    """Series still has a unit root after the maximum differencing order."""

    def __init__(self, message: str, trail: list | None = None):
        super().__init__(message)
        self.trail = trail or []


class PipelineExhaustedError(BoxJenkinsError, RuntimeError):
    """Every candidate model was rejected."""

    def __init__(self, message: str, trail: dict | None = None):
        super().__init__(message)
        self.trail = trail or {}


class SchemaError(BoxJenkinsError, ValueError):
    """Input file is missing a required column or is empty."""


class ParseError(BoxJenkinsError, ValueError):
    """A row of the input file could not be parsed."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class IntegrityError(BoxJenkinsError, ValueError):
    """Duplicate, unordered or gapped week labels."""
