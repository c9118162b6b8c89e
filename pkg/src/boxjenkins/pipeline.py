"""Box-Jenkins workflow: identify, estimate, diagnose, evaluate.

`run_pipeline` strings the steps together:

1. split off the hold-out tail,
2. transform (Box-Cox, then differencing) until the ADF test rejects a unit root,
3. propose candidate orders from the significant ACF/PACF lags,
4. fit every candidate and rank by AIC,
5. walk the ranking until a model passes the Ljung-Box check,
6. forecast the hold-out one step at a time with frozen parameters.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .arima import ArimaFit, ArimaSpec, ForecastEvaluation, ForecastRow, fit, one_step_forecasts
from .correlogram import Correlogram, acf, pacf, significant_lags
from .errors import (
    BoxJenkinsError,
    DegenerateInputError,
    NonStationarityError,
    PipelineExhaustedError,
)
from .series import (
    TimeSeries,
    TransformPipeline,
    as_series,
    boxcox,
    select_lambda,
    split_holdout,
)
from .stattests import TestReport, adf_test, ljung_box, normal_qq_points, shapiro_wilk

__all__ = [
    "PipelineConfig", "PipelineReport", "StationarityCheck", "CandidateResult", "Diagnostics",
    "ForecastEvaluation", "ForecastRow", "achieve_stationarity", "candidates_from_orders",
    "propose_candidates", "select_by_aic", "run_diagnostics", "run_pipeline",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    holdout: int = 10
    alpha: float = 0.05
    max_diff: int = 2
    use_boxcox: str | float = "auto"  # "auto", "off" or a fixed exponent
    max_candidate_order: int = 5
    ljung_box_m: int | str = "auto"
    adf_lags: int | str = "auto"
    lambda_grid: tuple[float, float, float] = (-2.0, 2.0, 0.01)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.holdout < 0:
            raise ValueError("holdout must be non-negative")
        if not 0 <= self.max_diff <= 2:
            raise ValueError("max_diff must be 0, 1 or 2")
        if isinstance(self.use_boxcox, str) and self.use_boxcox not in ("auto", "off"):
            raise ValueError("use_boxcox must be 'auto', 'off' or a number")
        if not 1 <= self.max_candidate_order <= 5:
            raise ValueError("max_candidate_order must lie in 1..5")

    def to_dict(self) -> dict:
        return {
            "holdout": self.holdout, "alpha": self.alpha, "max_diff": self.max_diff,
            "use_boxcox": self.use_boxcox, "max_candidate_order": self.max_candidate_order,
            "ljung_box_m": self.ljung_box_m, "adf_lags": self.adf_lags,
            "lambda_grid": list(self.lambda_grid),
        }


@dataclass(frozen=True)
class StationarityCheck:
    label: str
    report: TestReport
    lam: float | None
    diff_order: int


@dataclass(frozen=True, eq=False)
class Diagnostics:
    ljung_box: TestReport
    normality: TestReport | None
    resid_acf: Correlogram
    resid_pacf: Correlogram
    qq: list[tuple[float, float]]
    passed: bool


@dataclass(eq=False)
class CandidateResult:
    spec: ArimaSpec
    fit: ArimaFit | None = None
    error: str | None = None
    nonsignificant: bool = False
    diagnostics: Diagnostics | None = None
    status: str = "pending"

    @property
    def aic(self) -> float | None:
        return None if self.fit is None else self.fit.aic


@dataclass(frozen=True, eq=False)
class PipelineReport:
    config: PipelineConfig
    series: TimeSeries
    train: TimeSeries
    holdout: TimeSeries | None
    transform: TransformPipeline
    transformed: TimeSeries
    stationarity_trail: list[StationarityCheck]
    identification_acf: Correlogram
    identification_pacf: Correlogram
    candidates: list[CandidateResult]
    chosen: ArimaFit
    diagnostics: Diagnostics
    evaluation: ForecastEvaluation | None


def _adf(series: TimeSeries, config: PipelineConfig) -> TestReport:
    return adf_test(series, config.adf_lags)


def _describe(lam: float | None, d: int) -> str:
    parts = []
    if lam is not None:
        parts.append(f"boxcox(lambda={lam:g})")
    if d:
        parts.append(f"diff^{d}")
    return "Y_t" if not parts else " + ".join(parts)


def achieve_stationarity(series, config: PipelineConfig = PipelineConfig()
                         ) -> tuple[TimeSeries, TransformPipeline, list[StationarityCheck]]:
    """Box-Cox (optional) then difference until the ADF test rejects.

    The first ADF run is on the raw series; if that already rejects at
    `config.alpha` the series is returned untouched. Every run is kept in
    the trail.
    """
    y = as_series(series)
    first = _adf(y, config)
    trail = [StationarityCheck(_describe(None, 0), first, None, 0)]
    if first.p_value <= config.alpha:
        return y, TransformPipeline(), trail

    if config.use_boxcox == "off":
        lam = None
    elif config.use_boxcox == "auto":
        lam = select_lambda(y, *config.lambda_grid)
    else:
        lam = float(config.use_boxcox)

    for d in range(1, config.max_diff + 1):
        pipe, z = TransformPipeline.fit(y, lam, d)
        rep = _adf(z, config)
        trail.append(StationarityCheck(_describe(lam, d), rep, lam, d))
        if rep.p_value <= config.alpha:
            return z, pipe, trail
    raise NonStationarityError(
        f"ADF still fails to reject a unit root after {config.max_diff} differences", trail)


def candidates_from_orders(P: int, Q: int, d: int) -> list[ArimaSpec]:
    """{(P,d,0), (0,d,Q), (P,d,Q)} without duplicates or empty models.

    Falls back to {(1,d,0), (0,d,1)} when both orders are zero.
    """
    if P == 0 and Q == 0:
        return [ArimaSpec(1, d, 0), ArimaSpec(0, d, 1)]
    out: list[ArimaSpec] = []
    for p, q in ((P, 0), (0, Q), (P, Q)):
        if p + q == 0:
            continue
        spec = ArimaSpec(p, d, q)
        if spec not in out:
            out.append(spec)
    return out


def identified_orders(z, config: PipelineConfig = PipelineConfig()) -> tuple[int, int, Correlogram, Correlogram]:
    """Largest significant PACF and ACF lags within 1..max_candidate_order."""
    cap = config.max_candidate_order
    ra, rp = acf(z), pacf(z)
    P = max([k for k in significant_lags(rp) if k <= cap], default=0)
    Q = max([k for k in significant_lags(ra) if k <= cap], default=0)
    return P, Q, ra, rp


def propose_candidates(z, d: int, config: PipelineConfig = PipelineConfig()) -> list[ArimaSpec]:
    P, Q, _, _ = identified_orders(z, config)
    return candidates_from_orders(P, Q, d)


def _rank_key(f: ArimaFit):
    return (f.aic, f.spec.k, f.spec.p, f.spec.q)


def select_by_aic(fits: list[ArimaFit]) -> ArimaFit:
    """Smallest AIC; ties go to fewer parameters, then lower p, then lower q."""
    if not fits:
        raise ValueError("no fitted models to choose from")
    return min(fits, key=_rank_key)


def _default_m(n: int) -> int:
    return max(1, min(10, n // 5))


def run_diagnostics(fit: ArimaFit, config: PipelineConfig = PipelineConfig()) -> Diagnostics:
    """Ljung-Box on the residuals (the pass/fail gate) plus descriptive checks."""
    e = np.asarray(fit.residuals)
    n = e.size
    m = _default_m(n) if config.ljung_box_m == "auto" else int(config.ljung_box_m)
    if n < m + 1:
        raise DegenerateInputError(f"{n} residuals are too few for {m} Ljung-Box lags")
    lb = ljung_box(e, m, fit.spec.p + fit.spec.q)
    normality = shapiro_wilk(e) if 3 <= n <= 5000 else None
    return Diagnostics(
        ljung_box=lb,
        normality=normality,
        resid_acf=acf(e),
        resid_pacf=pacf(e),
        qq=normal_qq_points(e),
        passed=lb.p_value > config.alpha,
    )


def run_pipeline(raw, config: PipelineConfig = PipelineConfig()) -> PipelineReport:
    y = as_series(raw)
    if len(y) <= config.holdout + 20:
        raise DegenerateInputError(
            f"need more than {config.holdout + 20} observations, got {len(y)}")
    if config.holdout:
        train, test = split_holdout(y, config.holdout)
    else:
        train, test = y, None

    z, transform, trail = achieve_stationarity(train, config)
    w = boxcox(train, transform.lam) if transform.lam is not None else train
    P, Q, ident_acf, ident_pacf = identified_orders(z, config)
    specs = candidates_from_orders(P, Q, transform.diff_order)
    logger.info("identified P=%d Q=%d; candidates %s", P, Q, [str(s) for s in specs])

    results = []
    for spec in specs:
        res = CandidateResult(spec)
        try:
            res.fit = fit(w, spec)
            res.nonsignificant = res.fit.has_nonsignificant(config.alpha)
            res.status = "fitted"
        except BoxJenkinsError as exc:
            res.error = str(exc)
            res.status = "failed"
            logger.warning("%s skipped: %s", spec, exc)
        results.append(res)

    fitted = [r for r in results if r.fit is not None]
    # coefficient significance screens first, the Ljung-Box loop second
    ordered = (sorted([r for r in fitted if not r.nonsignificant], key=lambda r: _rank_key(r.fit))
               + sorted([r for r in fitted if r.nonsignificant], key=lambda r: _rank_key(r.fit)))
    chosen = None
    for res in ordered:
        try:
            res.diagnostics = run_diagnostics(res.fit, config)
        except BoxJenkinsError as exc:
            res.error = str(exc)
            res.status = "diagnostics-error"
            continue
        if res.diagnostics.passed:
            res.status = "chosen"
            chosen = res
            break
        res.status = "rejected"
    if chosen is None:
        raise PipelineExhaustedError(
            "every candidate failed the diagnostic checks",
            {"stationarity_trail": trail, "candidates": results})
    for res in results:
        if res.status == "fitted":
            res.status = "not-needed"

    evaluation = None
    if test is not None:
        evaluation = one_step_forecasts(chosen.fit, train, test, transform, config.alpha)

    return PipelineReport(
        config=config, series=y, train=train, holdout=test, transform=transform,
        transformed=z, stationarity_trail=trail, identification_acf=ident_acf,
        identification_pacf=ident_pacf, candidates=results, chosen=chosen.fit,
        diagnostics=chosen.diagnostics, evaluation=evaluation,
    )
