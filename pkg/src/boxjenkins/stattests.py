"""Formal tests: augmented Dickey-Fuller, Ljung-Box and Shapiro-Wilk.

Each test returns a `TestReport` so the pipeline can treat them uniformly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import stats

from .correlogram import autocovariances
from .errors import (
    CollinearityError,
    DegenerateInputError,
    InvalidDofError,
    UnsupportedSizeError,
)
from .series import as_series


@dataclass(frozen=True)
class TestReport:
    """Outcome of a hypothesis test.

    ``p_clamped`` is set when the p-value was read off the edge of a
    critical-value table, in which case the true p-value is at least as
    extreme as the one reported.
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    p_value: float
    df_or_n: int
    null_hypothesis: str
    p_clamped: bool = False
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.statistic):
            raise ValueError(f"{self.name}: statistic is not finite")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"{self.name}: p-value {self.p_value} outside [0, 1]")

    def rejects(self, alpha: float) -> bool:
        return self.p_value <= alpha

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "df_or_n": self.df_or_n,
            "null_hypothesis": self.null_hypothesis,
            "p_clamped": self.p_clamped,
            "details": dict(self.details),
        }


# ---------------------------------------------------------------------------
# Augmented Dickey-Fuller
# ---------------------------------------------------------------------------

ADF_TABLE_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
ADF_TABLE_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
# tau quantiles, constant + trend; rows follow ADF_TABLE_SIZES
ADF_TREND_TABLE = np.array([
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
])

ADF_NULL = "the series has a unit root (non-stationary)"


def adf_critical_values(n: int) -> np.ndarray:
    """Table quantiles interpolated to sample size `n` (clamped to the table range)."""
    return np.array([np.interp(n, ADF_TABLE_SIZES, ADF_TREND_TABLE[:, j])
                     for j in range(ADF_TABLE_PROBS.size)])


def adf_pvalue(statistic: float, n: int) -> tuple[float, bool]:
    crit = adf_critical_values(n)
    if statistic <= crit[0]:
        return float(ADF_TABLE_PROBS[0]), True
    if statistic >= crit[-1]:
        return float(ADF_TABLE_PROBS[-1]), True
    return float(np.interp(statistic, crit, ADF_TABLE_PROBS)), False


def ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Least squares via QR. Returns (beta, standard errors, residual variance)."""
    nobs, ncols = X.shape
    if nobs <= ncols:
        raise DegenerateInputError("regression has no residual degrees of freedom")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise CollinearityError("regression design matrix is singular")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    s2 = float(resid @ resid) / (nobs - ncols)
    rinv = np.linalg.solve(r, np.eye(ncols))
    cov = s2 * (rinv @ rinv.T)
    return beta, np.sqrt(np.diag(cov)), s2


def adf_test(series, lag_order: int | str = "auto") -> TestReport:
    """Augmented Dickey-Fuller test, constant + linear trend specification.

    Regresses the first difference on a constant, a time trend, the lagged
    level and `lag_order` lagged differences. The statistic is the t-ratio of
    the lagged level; its p-value is interpolated in the trend-case
    Dickey-Fuller table and clamped to [0.01, 0.99].
    """
    x = as_series(series).values
    n = x.size
    if lag_order == "auto":
        k = int(math.floor((n - 1) ** (1.0 / 3.0))) if n > 1 else 0
    else:
        k = int(lag_order)
        if k < 0:
            raise DegenerateInputError("lag_order must be non-negative")
    if n < k + 10:
        raise DegenerateInputError(f"ADF with {k} lags needs at least {k + 10} observations, got {n}")

    dy = np.diff(x)
    m = dy.size
    rows = np.arange(k, m)
    cols = [np.ones(rows.size), (rows + 1).astype(float), x[rows]]
    cols += [dy[rows - i] for i in range(1, k + 1)]
    X = np.column_stack(cols)
    beta, se, _ = ols(dy[rows], X)
    stat = float(beta[2] / se[2])
    p, clamped = adf_pvalue(stat, m)
    return TestReport("ADF", stat, p, m, ADF_NULL, clamped,
                      {"lag_order": k, "regression": "constant+trend", "nobs": int(rows.size)})


# ---------------------------------------------------------------------------
# Ljung-Box
# ---------------------------------------------------------------------------

LB_NULL = "no autocorrelation up to the tested lag (no lack of fit)"


def ljung_box_statistic(x: np.ndarray, m: int) -> float:
    n = x.size
    g = autocovariances(x, m)
    if g[0] <= 0:
        raise DegenerateInputError("residuals have zero variance")
    r = g[1:] / g[0]
    k = np.arange(1, m + 1)
    return float(n * (n + 2) * np.sum(r * r / (n - k)))


def ljung_box(residuals, m: int, fitdf: int = 0) -> TestReport:
    """Ljung-Box portmanteau test on the first `m` autocorrelations.

    The reference distribution is chi-square with ``m - fitdf`` degrees of
    freedom; pass ``fitdf = p + q`` when testing ARMA residuals.
    """
    x = as_series(residuals).values
    n = x.size
    if m < 1:
        raise DegenerateInputError("m must be positive")
    if m >= n:
        raise DegenerateInputError(f"m={m} must be below the sample size {n}")
    if fitdf < 0 or m <= fitdf:
        raise InvalidDofError(f"m={m} leaves no degrees of freedom after fitdf={fitdf}")
    q = ljung_box_statistic(x, m)
    df = m - fitdf
    p = float(stats.chi2.sf(q, df))
    return TestReport("Ljung-Box", q, min(max(p, 0.0), 1.0), df, LB_NULL,
                      details={"m": m, "fitdf": fitdf, "n": n})


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995, AS R94)
# ---------------------------------------------------------------------------

SW_NULL = "the sample comes from a normal distribution"

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(c, x: float) -> float:
    return float(np.polynomial.polynomial.polyval(x, c))


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Royston's approximate coefficients a_1..a_{n//2} (largest first, positive)."""
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    i = np.arange(1, nn2 + 1)
    m = -stats.norm.ppf((i - 0.375) / (n + 0.25))  # positive upper-tail scores
    summ2 = 2.0 * float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(nn2)
    a1 = _poly(_C1, rsn) + m[0] / ssumm2
    a[0] = a1
    if n > 5:
        a2 = m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a[1] = a2
        a[2:] = m[2:] / fac
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
        a[1:] = m[1:] / fac
    return a


def _shapiro_wilk_pvalue(w: float, n: int) -> float:
    if n == 3:
        return max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75))))
    if w >= 1.0:
        return 1.0
    y = math.log(1.0 - w)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        xx = math.log(n)
        mu = _poly(_C5, xx)
        sigma = math.exp(_poly(_C6, xx))
    return float(stats.norm.sf(y, mu, sigma))


def shapiro_wilk(sample) -> TestReport:
    x = np.sort(as_series(sample).values)
    n = x.size
    if not 3 <= n <= 5000:
        raise UnsupportedSizeError(f"Shapiro-Wilk supports 3 <= n <= 5000, got {n}")
    ssq = float(np.sum((x - x.mean()) ** 2))
    if ssq <= 0 or x[-1] - x[0] <= 0:
        raise DegenerateInputError("sample has zero variance")
    a = shapiro_wilk_coefficients(n)
    nn2 = n // 2
    num = float(a @ (x[::-1][:nn2] - x[:nn2]))
    w = min(num * num / ssq, 1.0)
    p = min(max(_shapiro_wilk_pvalue(w, n), 0.0), 1.0)
    return TestReport("Shapiro-Wilk", w, p, n, SW_NULL)


def normal_qq_points(sample) -> list[tuple[float, float]]:
    """(theoretical, sample) quantile pairs at probabilities (i - 0.5)/n."""
    x = np.sort(as_series(sample).values)
    n = x.size
    if n < 3:
        raise DegenerateInputError("QQ points need at least 3 observations")
    theo = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    return [(float(t), float(s)) for t, s in zip(theo, x)]
