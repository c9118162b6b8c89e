"""Weekly time-series container plus Box-Cox and differencing transforms.

Both transforms come with exact inverses so that forecasts made on a
transformed scale can be mapped back to counts.
"""
from __future__ import annotations

import datetime as _dt
import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    DomainError,
    InvalidPipelineError,
    NonpositiveDataError,
)

LAMBDA_ZERO_TOL = 1e-12

_ISO_WEEK = re.compile(r"^(\d{4})-W(\d{2})$")
_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _shift_label(start: str, steps: int) -> str:
    """Label `steps` weeks after `start`.

    ISO weeks (``2016-W01``) and ISO dates step by seven days; anything else
    gets a ``+Nw`` suffix.
    """
    if steps == 0:
        return start
    m = _ISO_WEEK.match(start)
    if m:
        day = _dt.date.fromisocalendar(int(m.group(1)), int(m.group(2)), 1)
        year, week, _ = (day + _dt.timedelta(weeks=steps)).isocalendar()
        return f"{year:04d}-W{week:02d}"
    if _ISO_DATE.match(start):
        day = _dt.date.fromisoformat(start)
        return (day + _dt.timedelta(weeks=steps)).isoformat()
    return f"{start}{steps:+d}w"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered, finite, real-valued weekly observations.

    Parameters
    ----------
    values : array_like
        Observations. Copied and frozen.
    start_label : str
        Label of the first observation, e.g. ``"2016-W01"`` or a date.
    period_length : int
        Observations per cycle. Informational only.
    labels : sequence of str, optional
        Explicit per-observation labels (as read from a file). When absent,
        labels are derived from `start_label` by weekly increment.
    """

    values: np.ndarray
    start_label: str = "t1"
    period_length: int = 52
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise DegenerateInputError("series contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != arr.size:
                raise DegenerateInputError(
                    f"{len(labels)} labels for {arr.size} observations")
            object.__setattr__(self, "labels", labels)
            if labels:
                object.__setattr__(self, "start_label", labels[0])

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def label(self, i: int) -> str:
        if self.labels is not None:
            return self.labels[i]
        return _shift_label(self.start_label, i)

    def all_labels(self) -> list[str]:
        return [self.label(i) for i in range(len(self))]

    def slice(self, start: int, stop: int | None = None) -> "TimeSeries":
        """Sub-series keeping the original labels."""
        stop = len(self) if stop is None else stop
        labels = self.all_labels()[start:stop]
        return TimeSeries(self.values[start:stop], start_label=labels[0] if labels else self.start_label,
                          period_length=self.period_length, labels=tuple(labels))

    def with_values(self, values, offset: int = 0) -> "TimeSeries":
        """New series holding `values`, labelled from position `offset` of this one."""
        values = np.asarray(values, dtype=float)
        if self.labels is not None and offset >= 0 and offset + values.size <= len(self):
            return TimeSeries(values, period_length=self.period_length,
                              labels=self.labels[offset:offset + values.size])
        return TimeSeries(values, start_label=_shift_label(self.start_label, offset),
                          period_length=self.period_length)


def as_series(x) -> TimeSeries:
    """Coerce arrays and lists to `TimeSeries`; pass series through."""
    if isinstance(x, TimeSeries):
        return x
    return TimeSeries(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TransformPipeline:
    """Record of the transforms applied to reach a stationary series.

    ``lam`` is None when no power transform was applied. ``retained_heads``
    holds, per differencing pass, the first value that pass consumed.
    """

    lam: float | None = None
    diff_order: int = 0
    retained_heads: tuple[float, ...] = ()

    def __post_init__(self):
        if self.diff_order < 0:
            raise InvalidPipelineError("diff_order must be non-negative")
        if len(self.retained_heads) != self.diff_order:
            raise InvalidPipelineError(
                f"retained_heads has {len(self.retained_heads)} entries, "
                f"expected {self.diff_order}")

    def apply(self, series) -> TimeSeries:
        s = as_series(series)
        if self.lam is not None:
            s = boxcox(s, self.lam)
        out, _ = difference(s, self.diff_order)
        return out

    def invert(self, diffed) -> TimeSeries:
        s = integrate(diffed, self.retained_heads)
        if self.lam is not None:
            s = inv_boxcox(s, self.lam)
        return s

    @classmethod
    def fit(cls, series, lam: float | None, diff_order: int) -> tuple["TransformPipeline", TimeSeries]:
        """Apply Box-Cox then `diff_order` differences, recording the heads."""
        s = as_series(series)
        if lam is not None:
            s = boxcox(s, lam)
        out, heads = difference(s, diff_order)
        return cls(lam=lam, diff_order=diff_order, retained_heads=tuple(heads)), out


def difference(series, order: int) -> tuple[TimeSeries, list[float]]:
    """Apply `order` first-difference passes.

    Returns the differenced series and, per pass, the leading value that the
    pass dropped. Labels of the result follow the trailing observations.
    """
    s = as_series(series)
    if order < 0:
        raise DegenerateInputError("differencing order must be non-negative")
    if order >= len(s) and order > 0:
        raise DegenerateInputError(
            f"cannot difference a length-{len(s)} series {order} times")
    x = np.array(s.values)
    heads = []
    for _ in range(order):
        heads.append(float(x[0]))
        x = np.diff(x)
    return s.with_values(x, offset=order), heads


def integrate(diffed, heads: Sequence[float], passes: int | None = None) -> TimeSeries:
    """Undo `difference` given the retained heads (outermost pass last).

    `passes`, when given, is the number of differencing passes the caller
    expects to undo; a mismatch with ``len(heads)`` is an error.
    """
    s = as_series(diffed)
    if passes is not None and passes != len(heads):
        raise InvalidPipelineError(
            f"{len(heads)} retained heads for {passes} differencing passes")
    if not heads:
        return s
    x = np.array(s.values, dtype=float)
    for h in reversed(list(heads)):
        x = np.concatenate(([h], h + np.cumsum(x)))
    return s.with_values(x, offset=-len(heads))


def boxcox(series, lam: float) -> TimeSeries:
    """Box-Cox power transform; log branch when ``|lam| < 1e-12``."""
    s = as_series(series)
    y = s.values
    if np.any(y <= 0):
        raise NonpositiveDataError("Box-Cox requires strictly positive data")
    if abs(lam) < LAMBDA_ZERO_TOL:
        w = np.log(y)
    else:
        w = np.expm1(lam * np.log(y)) / lam
    return s.with_values(w)


def inv_boxcox(series, lam: float) -> TimeSeries:
    s = as_series(series)
    w = s.values
    if abs(lam) < LAMBDA_ZERO_TOL:
        return s.with_values(np.exp(w))
    base = lam * w + 1.0
    if np.any(base <= 0):
        raise DomainError("inverse Box-Cox undefined where lam*w + 1 <= 0")
    return s.with_values(np.exp(np.log1p(lam * w) / lam))


def boxcox_profile_loglik(y: np.ndarray, lam: float) -> float:
    """Profile log-likelihood of the Box-Cox exponent (variance concentrated out)."""
    w = boxcox(y, lam).values
    var = np.var(w)
    if var <= 0 or np.ptp(w) == 0:
        return -math.inf
    return -0.5 * y.size * math.log(var) + (lam - 1.0) * float(np.sum(np.log(y)))


def lambda_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if hi < lo:
        raise DegenerateInputError("grid_lo must not exceed grid_hi")
    if step <= 0:
        raise DegenerateInputError("grid_step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def select_lambda(series, grid_lo: float = -2.0, grid_hi: float = 2.0,
                  grid_step: float = 0.01) -> float:
    """Grid-search the Box-Cox exponent maximizing the profile likelihood.

    Ties go to the grid point closest to 1 (the least transformation).
    """
    s = as_series(series)
    y = s.values
    if np.any(y <= 0):
        raise NonpositiveDataError("Box-Cox requires strictly positive data")
    if y.size < 10:
        raise DegenerateInputError("lambda selection needs at least 10 observations")
    grid = lambda_grid(grid_lo, grid_hi, grid_step)
    if grid.size == 1:
        return float(grid[0])
    ll = np.array([boxcox_profile_loglik(y, lam) for lam in grid])
    if not np.any(np.isfinite(ll)):
        raise DegenerateInputError("transformed series has zero variance for every lambda")
    best = np.max(ll)
    ties = grid[ll == best]
    return float(ties[np.argmin(np.abs(ties - 1.0))])


def split_holdout(series, holdout: int) -> tuple[TimeSeries, TimeSeries]:
    s = as_series(series)
    if not 0 < holdout < len(s):
        raise DegenerateInputError(
            f"holdout must lie in (0, {len(s)}), got {holdout}")
    cut = len(s) - holdout
    return s.slice(0, cut), s.slice(cut)
