"""Sample ACF and PACF with white-noise significance bands."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalDegeneracyError
from .series import as_series

BAND_Z = 1.96


@dataclass(frozen=True, eq=False)
class Correlogram:
    kind: str  # "ACF" or "PACF"
    lags: np.ndarray
    values: np.ndarray
    band: float
    n: int

    def __post_init__(self):
        if self.band <= 0:
            raise ValueError("band must be positive")
        if np.any(np.abs(self.values) > 1 + 1e-12):
            raise ValueError("correlations must lie in [-1, 1]")

    @property
    def max_lag(self) -> int:
        return int(self.lags[-1]) if self.lags.size else 0

    def all_inside(self) -> bool:
        return not significant_lags(self)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "band": self.band,
            "lags": [int(k) for k in self.lags],
            "values": [float(v) for v in self.values],
        }


def default_max_lag(n: int) -> int:
    """floor(min(10*log10(n), n-1))."""
    if n < 2:
        return 0
    return max(1, int(math.floor(min(10.0 * math.log10(n), n - 1))))


def autocovariances(x, max_lag: int) -> np.ndarray:
    """Biased (divide-by-n) sample autocovariances for lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dev = x - x.mean()
    return np.array([dev[: n - k] @ dev[k:] / n for k in range(max_lag + 1)])


def _autocorr(x, max_lag: int) -> np.ndarray:
    g = autocovariances(x, max_lag)
    if g[0] <= 0 or not np.isfinite(g[0]):
        raise DegenerateInputError("series has zero variance")
    return g / g[0]


def _check(series, max_lag):
    s = as_series(series)
    n = len(s)
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 1:
        raise DegenerateInputError("max_lag must be positive")
    if n < max_lag + 1:
        raise DegenerateInputError(f"need at least {max_lag + 1} observations for {max_lag} lags")
    return s, n, max_lag


def acf(series, max_lag: int | None = None) -> Correlogram:
    """Sample autocorrelations r_1..r_max_lag (biased estimator)."""
    s, n, max_lag = _check(series, max_lag)
    r = _autocorr(s.values, max_lag)
    return Correlogram("ACF", np.arange(1, max_lag + 1), r[1:], BAND_Z / math.sqrt(n), n)


def durbin_levinson(r: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations r_0..r_K.

    Returns alpha(1)..alpha(K): the last coefficient of each order-k
    Yule-Walker solution.
    """
    K = r.size - 1
    out = np.empty(K)
    phi = np.zeros(0)
    v = r[0]
    for k in range(1, K + 1):
        if v <= 0:
            raise NumericalDegeneracyError(f"unit pivot reached at lag {k}")
        a = (r[k] - phi @ r[k - 1:0:-1]) / v
        phi = np.concatenate((phi - a * phi[::-1], [a]))
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def pacf(series, max_lag: int | None = None) -> Correlogram:
    s, n, max_lag = _check(series, max_lag)
    if max_lag >= n:
        raise DegenerateInputError("max_lag must be below the series length")
    r = _autocorr(s.values, max_lag)
    vals = durbin_levinson(r)
    return Correlogram("PACF", np.arange(1, max_lag + 1), vals, BAND_Z / math.sqrt(n), n)


def significant_lags(c: Correlogram) -> list[int]:
    return [int(k) for k, v in zip(c.lags, c.values) if abs(v) > c.band]
