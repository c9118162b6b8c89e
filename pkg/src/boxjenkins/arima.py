"""ARIMA(p, d, q) estimation by exact Gaussian maximum likelihood.

The likelihood of the differenced series is evaluated with a Kalman
innovations filter on Harvey's state-space form of the ARMA part, with the
initial state covariance solved from the stationary Lyapunov equation. The
innovation variance and (when present) the mean are concentrated out, so the
optimizer only sees the AR and MA coefficients, mapped to an unconstrained
space through partial autocorrelations.

Sign conventions::

    (1 - phi_1 B - ... - phi_p B^p)(1 - B)^d (Y_t) = mu* + (1 + theta_1 B + ... + theta_q B^q) e_t

where the constant is reported as the mean of the differenced series.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, signal, stats

from ._kernels import css_residuals, kalman_innovations
from .correlogram import Correlogram, acf, default_max_lag, pacf, significant_lags
from .errors import (
    BoxJenkinsError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    InvalidPipelineError,
    NumericalOverflowError,
)
from .series import TimeSeries, TransformPipeline, as_series, boxcox, difference, inv_boxcox
from .stattests import TestReport, shapiro_wilk

logger = logging.getLogger(__name__)

MAX_ORDER = 5
MAX_ITER = 1000
FTOL = 1e-8
# |u| cap before tanh; keeps partial autocorrelations strictly inside (-1, 1)
U_BOUND = 7.0
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ArimaSpec:
    p: int
    d: int
    q: int
    include_constant: bool | None = None

    def __post_init__(self):
        for name in ("p", "d", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")
            if v > MAX_ORDER:
                raise ValueError(f"{name}={v} exceeds the order cap of {MAX_ORDER}")
        if self.include_constant is None:
            object.__setattr__(self, "include_constant", self.d == 0)
        if self.p + self.q == 0 and not self.include_constant:
            raise ValueError("model has no parameters: need p + q >= 1 or a constant")

    @property
    def n_coef(self) -> int:
        return self.p + self.q + int(self.include_constant)

    @property
    def k(self) -> int:
        """Parameter count for AIC: coefficients plus the innovation variance."""
        return self.n_coef + 1

    def coef_names(self) -> list[str]:
        names = [f"ar{i}" for i in range(1, self.p + 1)] + [f"ma{j}" for j in range(1, self.q + 1)]
        if self.include_constant:
            names.append("mean" if self.d == 0 else "drift")
        return names

    def __str__(self) -> str:
        s = f"ARIMA({self.p},{self.d},{self.q})"
        if self.include_constant and self.d > 0:
            s += " with drift"
        return s

    def to_dict(self) -> dict:
        return {"p": self.p, "d": self.d, "q": self.q, "include_constant": self.include_constant}


@dataclass(frozen=True, eq=False)
class ArimaFit:
    spec: ArimaSpec
    ar: np.ndarray
    ma: np.ndarray
    constant: float
    sigma2: float
    loglik: float
    aic: float
    se: np.ndarray | None
    z_values: np.ndarray | None
    p_values: np.ndarray | None
    residuals: np.ndarray
    n_used: int
    iterations: int = 0
    evaluations: int = 0

    @property
    def se_available(self) -> bool:
        return self.se is not None

    @property
    def coef(self) -> np.ndarray:
        extra = [self.constant] if self.spec.include_constant else []
        return np.concatenate((self.ar, self.ma, extra))

    def coef_table(self) -> list[dict]:
        rows = []
        for i, name in enumerate(self.spec.coef_names()):
            rows.append({
                "name": name,
                "estimate": float(self.coef[i]),
                "se": None if self.se is None else float(self.se[i]),
                "z": None if self.z_values is None else float(self.z_values[i]),
                "p_value": None if self.p_values is None else float(self.p_values[i]),
            })
        return rows

    def has_nonsignificant(self, alpha: float) -> bool:
        """True when any coefficient has p > alpha, or SEs could not be computed."""
        if self.p_values is None:
            return True
        return bool(np.any(self.p_values > alpha))


# ---------------------------------------------------------------------------
# polynomial helpers
# ---------------------------------------------------------------------------

def _max_root_inverse(coefs: np.ndarray) -> float:
    """Largest |eigenvalue| of the companion matrix of 1 - c_1 B - ... - c_k B^k."""
    k = coefs.size
    if k == 0:
        return 0.0
    C = np.zeros((k, k))
    C[0, :] = coefs
    C[1:, :-1] = np.eye(k - 1)
    return float(np.max(np.abs(np.linalg.eigvals(C))))


def is_stationary(ar) -> bool:
    return _max_root_inverse(np.asarray(ar, dtype=float)) < 1.0


def is_invertible(ma) -> bool:
    return _max_root_inverse(-np.asarray(ma, dtype=float)) < 1.0


def pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    phi = np.zeros(0)
    for rk in r:
        phi = np.concatenate((phi - rk * phi[::-1], [rk]))
    return phi


def ar_to_pacf(phi: np.ndarray) -> np.ndarray:
    phi = np.array(phi, dtype=float)
    r = np.empty(phi.size)
    for k in range(phi.size, 0, -1):
        rk = phi[k - 1]
        if abs(rk) >= 1.0:
            raise DomainError("coefficients are not stationary")
        r[k - 1] = rk
        head = phi[:k - 1]
        phi = (head + rk * head[::-1]) / (1.0 - rk * rk)
    return r


def untransform(u: np.ndarray, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Unconstrained vector -> (stationary AR, invertible MA)."""
    r = np.tanh(np.clip(u, -U_BOUND, U_BOUND))
    return pacf_to_ar(r[:p]), -pacf_to_ar(r[p:p + q])


def transform(ar, ma) -> np.ndarray:
    r = np.concatenate((ar_to_pacf(np.asarray(ar, float)), ar_to_pacf(-np.asarray(ma, float))))
    r = np.clip(r, -math.tanh(U_BOUND), math.tanh(U_BOUND))
    return np.arctanh(r)


# ---------------------------------------------------------------------------
# state space and likelihood
# ---------------------------------------------------------------------------

def state_space(ar, ma) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Harvey companion form (T, R) and the stationary state covariance P0 for unit innovation variance."""
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    p, q = ar.size, ma.size
    r = max(p, q + 1)
    T = np.zeros((r, r))
    T[:p, 0] = ar
    T[np.arange(r - 1), np.arange(1, r)] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    R[1:q + 1] = ma
    A = np.eye(r * r) - np.kron(T, T)
    P0 = np.linalg.solve(A, np.outer(R, R).reshape(-1)).reshape(r, r)
    P0 = 0.5 * (P0 + P0.T)
    return T, R, P0


def _check_params(ar, ma):
    if not is_stationary(ar):
        raise DomainError(f"AR coefficients {list(np.round(ar, 6))} are not stationary")
    if not is_invertible(ma):
        raise DomainError(f"MA coefficients {list(np.round(ma, 6))} are not invertible")


def _innovations(z: np.ndarray, ar, ma, with_ones: bool):
    T, R, P0 = state_space(ar, ma)
    cols = [z, np.ones_like(z)] if with_ones else [z]
    V, F = kalman_innovations(np.column_stack(cols), T, R, P0)
    if not (np.all(np.isfinite(V)) and np.all(np.isfinite(F))) or np.any(F <= 0):
        raise NumericalOverflowError("non-finite value in the Kalman recursion")
    return V, F


def kalman_loglik(diffed_series, ar: Sequence[float], ma: Sequence[float],
                  constant: float = 0.0, sigma2: float = 1.0) -> float:
    """Exact Gaussian log-likelihood of a stationary ARMA model.

    `constant` is the process mean; `diffed_series` must already be
    differenced.
    """
    z = as_series(diffed_series).values
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    _check_params(ar, ma)
    V, F = _innovations(z - constant, ar, ma, with_ones=False)
    v = V[:, 0]
    return float(-0.5 * np.sum(LOG_2PI + np.log(sigma2 * F) + v * v / (sigma2 * F)))


@dataclass
class _Profile:
    loglik: float
    mean: float
    sigma2: float
    resid: np.ndarray  # standardized innovations, scale sigma
    innov: np.ndarray
    F: np.ndarray


def _profile(z: np.ndarray, ar, ma, mean: float | None, concentrate_mean: bool) -> _Profile:
    """Log-likelihood with sigma2 (and optionally the mean) concentrated out."""
    n = z.size
    if concentrate_mean:
        V, F = _innovations(z, ar, ma, with_ones=True)
        vy, v1 = V[:, 0], V[:, 1]
        mean = float(np.sum(vy * v1 / F) / np.sum(v1 * v1 / F))
        v = vy - mean * v1
    else:
        mean = 0.0 if mean is None else mean
        V, F = _innovations(z - mean, ar, ma, with_ones=False)
        v = V[:, 0]
    ssq = float(np.sum(v * v / F))
    sigma2 = ssq / n
    if sigma2 <= 0:
        raise DegenerateInputError("series is fitted exactly; innovation variance is zero")
    ll = -0.5 * n * (LOG_2PI + math.log(sigma2) + 1.0) - 0.5 * float(np.sum(np.log(F)))
    return _Profile(ll, mean, sigma2, v / np.sqrt(F), v, F)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def _css_start(z: np.ndarray, p: int, q: int) -> np.ndarray:
    """Conditional-sum-of-squares estimate, in the unconstrained space."""
    def objective(u):
        ar, ma = untransform(u, p, q)
        e = css_residuals(z, ar, ma)
        return float(e @ e)

    res = optimize.minimize(objective, np.zeros(p + q), method="Nelder-Mead",
                            options={"xatol": 1e-4, "fatol": 1e-6, "maxiter": 400 * (p + q),
                                     "initial_simplex": _simplex(np.zeros(p + q), 0.2)})
    return np.clip(res.x, -3.0, 3.0)


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0] + [x0 + step * e for e in np.eye(x0.size)])


def _hessian(f, x: np.ndarray) -> np.ndarray:
    """Central-difference Hessian with steps 1e-4 * max(1, |x_i|)."""
    k = x.size
    h = 1e-4 * np.maximum(1.0, np.abs(x))
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + 2 * ei) - 2 * f0 + f(x - 2 * ei)) / (4 * h[i] ** 2)
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej)
                                 + f(x - ei - ej)) / (4 * h[i] * h[j])
    return H


def _standard_errors(z, spec: ArimaSpec, coef: np.ndarray):
    p, q = spec.p, spec.q

    def negll(theta):
        ar, ma = theta[:p], theta[p:p + q]
        if not (is_stationary(ar) and is_invertible(ma)):
            return math.nan
        mean = theta[p + q] if spec.include_constant else 0.0
        try:
            return -_profile(z, ar, ma, mean, concentrate_mean=False).loglik
        except BoxJenkinsError:
            return math.nan

    H = _hessian(negll, coef)
    if not np.all(np.isfinite(H)):
        return None
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None
    Linv = np.linalg.solve(L, np.eye(coef.size))
    cov = Linv.T @ Linv
    se = np.sqrt(np.diag(cov))
    return se if np.all(np.isfinite(se)) and np.all(se > 0) else None


def fit(series, spec: ArimaSpec, max_iter: int = MAX_ITER, tol: float = FTOL) -> ArimaFit:
    """Fit `spec` to `series` (on its undifferenced scale) by exact maximum likelihood."""
    s = as_series(series)
    z = difference(s, spec.d)[0].values if spec.d else np.array(s.values)
    n = z.size
    p, q = spec.p, spec.q
    if n < 5 * (p + q + 1):
        raise DegenerateInputError(
            f"{spec} needs at least {5 * (p + q + 1)} observations after differencing, got {n}")
    if np.var(z) <= 0:
        raise DegenerateInputError("differenced series is constant")
    const = bool(spec.include_constant)
    zc = z - z.mean() if const else z

    nit = nfev = 0
    if p + q:
        def objective(u):
            ar, ma = untransform(u, p, q)
            if not (is_stationary(ar) and is_invertible(ma)):
                raise DomainError("reparameterization produced a non-stationary iterate")
            try:
                return -_profile(z, ar, ma, None, concentrate_mean=const).loglik
            except (NumericalOverflowError, DegenerateInputError):
                return math.inf

        u0 = _css_start(zc, p, q)
        opts = {"xatol": 1e-8, "fatol": tol, "maxiter": max_iter}
        res = optimize.minimize(objective, u0, method="Nelder-Mead",
                                options=dict(opts, initial_simplex=_simplex(u0, 0.1)))
        nit, nfev = res.nit, res.nfev
        if res.success:
            # restart from the optimum to guard against a collapsed simplex
            res2 = optimize.minimize(objective, res.x, method="Nelder-Mead",
                                     options=dict(opts, initial_simplex=_simplex(res.x, 0.05)))
            nit, nfev = nit + res2.nit, nfev + res2.nfev
            if res2.fun <= res.fun:
                res = res2
        if not res.success:
            ar, ma = untransform(res.x, p, q)
            raise ConvergenceError(
                f"{spec}: optimizer did not converge in {max_iter} iterations ({res.message})",
                best_point={"ar": ar.tolist(), "ma": ma.tolist()}, best_value=-float(res.fun))
        ar, ma = untransform(res.x, p, q)
    else:
        ar, ma = np.zeros(0), np.zeros(0)

    prof = _profile(z, ar, ma, None, concentrate_mean=const)
    mean = prof.mean if const else 0.0
    coef = np.concatenate((ar, ma, [mean] if const else []))
    se = _standard_errors(z, spec, coef)
    if se is None:
        logger.warning("%s: Hessian not positive definite; standard errors unavailable", spec)
        zv = pv = None
    else:
        zv = coef / se
        pv = 2.0 * stats.norm.sf(np.abs(zv))
    return ArimaFit(
        spec=spec, ar=ar, ma=ma, constant=float(mean), sigma2=prof.sigma2,
        loglik=prof.loglik, aic=2 * spec.k - 2 * prof.loglik,
        se=se, z_values=zv, p_values=pv, residuals=prof.resid, n_used=n,
        iterations=int(nit), evaluations=int(nfev),
    )


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate(spec: ArimaSpec, ar: Sequence[float] = (), ma: Sequence[float] = (),
             sigma2: float = 1.0, n: int = 100, seed: int = 0, burn_in: int = 100,
             constant: float = 0.0) -> TimeSeries:
    """Draw `n` observations of an ARIMA process.

    The ARMA part (mean `constant`) is generated with `burn_in` discarded
    warm-up draws, then integrated `spec.d` times from zero.
    """
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    if ar.size != spec.p or ma.size != spec.q:
        raise ValueError("coefficient counts do not match the spec")
    if burn_in < 100:
        raise ValueError("burn_in must be at least 100")
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    _check_params(ar, ma)
    m = n - spec.d
    if m < 1:
        raise DegenerateInputError("n must exceed the differencing order")
    rng = np.random.default_rng(seed)
    e = rng.normal(0.0, math.sqrt(sigma2), m + burn_in)
    x = signal.lfilter(np.r_[1.0, ma], np.r_[1.0, -ar], e)[burn_in:] + constant
    for _ in range(spec.d):
        x = np.concatenate(([0.0], np.cumsum(x)))
    return TimeSeries(x)


# ---------------------------------------------------------------------------
# one-step-ahead evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForecastRow:
    label: str
    actual: float
    forecast: float
    error: float


@dataclass(frozen=True, eq=False)
class ForecastEvaluation:
    rows: list[ForecastRow]
    error_acf: Correlogram | None
    error_pacf: Correlogram | None
    error_acf_ok: bool
    error_pacf_ok: bool
    normality: TestReport | None
    verdict: bool
    alpha: float = 0.05

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    @property
    def forecasts(self) -> np.ndarray:
        return np.array([r.forecast for r in self.rows])


def evaluate_errors(rows: list[ForecastRow], alpha: float = 0.05) -> ForecastEvaluation:
    """Correlograms, normality test and Gaussian-white-noise verdict for forecast errors."""
    e = np.array([r.error for r in rows])
    eacf = epacf = norm = None
    if e.size >= 3 and np.var(e) > 0:
        lag = default_max_lag(e.size)
        eacf, epacf = acf(e, lag), pacf(e, lag)
        norm = shapiro_wilk(e)
    acf_ok = eacf is not None and not significant_lags(eacf)
    pacf_ok = epacf is not None and not significant_lags(epacf)
    verdict = bool(acf_ok and pacf_ok and norm is not None and norm.p_value > alpha)
    return ForecastEvaluation(rows, eacf, epacf, acf_ok, pacf_ok, norm, verdict, alpha)


def _undifference_prediction(w: np.ndarray, t: int, zhat: float, d: int) -> float:
    """Predicted w_t given a prediction of its d-th difference and w_{t-1..t-d}."""
    if d == 0:
        return zhat
    # w_t = Delta^d w_t - sum_{j=1..d} C(d,j) (-1)^j w_{t-j}
    return zhat - sum(math.comb(d, j) * (-1) ** j * w[t - j] for j in range(1, d + 1))


def one_step_forecasts(fit: ArimaFit, history, future_actuals,
                       transform: TransformPipeline | None = None,
                       alpha: float = 0.05) -> ForecastEvaluation:
    """Roll one-step-ahead forecasts through `future_actuals` with frozen parameters.

    `history` is the series the model was fitted on, on the original scale.
    When `transform` carries a Box-Cox exponent, forecasts are made on the
    transformed scale and mapped back. Each actual is absorbed by the filter
    before the next step is predicted.
    """
    hist = as_series(history)
    fut = as_series(future_actuals)
    if len(fut) == 0:
        raise DegenerateInputError("no future actuals to evaluate")
    d = fit.spec.d
    lam = None
    if transform is not None:
        if transform.diff_order != d:
            raise InvalidPipelineError(
                f"transform differences {transform.diff_order} times but the model has d={d}")
        lam = transform.lam
    y = np.concatenate((hist.values, fut.values))
    w = boxcox(y, lam).values if lam is not None else y
    z = np.diff(w, n=d) if d else w
    if z.size - len(fut) != fit.n_used:
        raise InvalidPipelineError("history length does not match the fitted model")
    V, _ = _innovations(z - fit.constant, fit.ar, fit.ma, with_ones=False)
    zhat = z - V[:, 0]

    h0 = len(hist)
    rows = []
    for i in range(len(fut)):
        t = h0 + i
        what = _undifference_prediction(w, t, float(zhat[t - d]), d)
        if lam is None:
            yhat = what
        else:
            yhat = float(inv_boxcox([what], lam).values[0])
        actual = float(y[t])
        rows.append(ForecastRow(fut.label(i), actual, yhat, actual - yhat))
    return evaluate_errors(rows, alpha)

