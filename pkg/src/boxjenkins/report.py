"""Serialization of a `PipelineReport`: JSON, markdown and per-figure CSV files."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .correlogram import Correlogram
from .pipeline import PipelineReport, StationarityCheck
from .stattests import TestReport

SCHEMA_VERSION = "1.0"


def _num(x) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _test(rep: TestReport | None) -> dict | None:
    if rep is None:
        return None
    d = rep.to_dict()
    d["statistic"] = _num(d["statistic"])
    d["p_value"] = _num(d["p_value"])
    return d


def _trail_entry(c: StationarityCheck) -> dict:
    d = _test(c.report)
    d["series"] = c.label
    d["lambda"] = c.lam
    d["diff_order"] = c.diff_order
    return d


def _correlogram(c: Correlogram | None) -> dict | None:
    return None if c is None else c.to_dict()


def report_to_dict(report: PipelineReport, seed: int | None = None,
                   dates: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Plain-JSON view of the report, numbers at full precision."""
    dates = dates or {}
    fit = report.chosen
    cands = sorted(report.candidates,
                   key=lambda r: (r.fit is None, r.fit.aic if r.fit else 0.0, r.spec.p, r.spec.q))
    ev = report.evaluation
    out = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "config": report.config.to_dict(),
        "data": {
            "n": len(report.series),
            "n_train": len(report.train),
            "n_holdout": 0 if report.holdout is None else len(report.holdout),
            "first_label": report.series.label(0),
            "last_label": report.series.label(len(report.series) - 1),
        },
        "transform": {
            "lambda": report.transform.lam,
            "diff_order": report.transform.diff_order,
            "retained_heads": list(report.transform.retained_heads),
        },
        "stationarity_trail": [_trail_entry(c) for c in report.stationarity_trail],
        "identification": {
            "acf": _correlogram(report.identification_acf),
            "pacf": _correlogram(report.identification_pacf),
        },
        "candidates": [
            {
                "model": str(r.spec),
                **r.spec.to_dict(),
                "aic": _num(r.aic),
                "loglik": None if r.fit is None else _num(r.fit.loglik),
                "status": r.status,
                "nonsignificant_coefficients": r.nonsignificant,
                "ljung_box": None if r.diagnostics is None else _test(r.diagnostics.ljung_box),
                "error": r.error,
            }
            for r in cands
        ],
        "chosen": {
            "model": str(fit.spec),
            **fit.spec.to_dict(),
            "coefficients": fit.coef_table(),
            "sigma2": fit.sigma2,
            "loglik": fit.loglik,
            "aic": fit.aic,
            "k": fit.spec.k,
            "n_used": fit.n_used,
            "se_available": fit.se_available,
            "residuals": [float(v) for v in fit.residuals],
        },
        "diagnostics": {
            "ljung_box": _test(report.diagnostics.ljung_box),
            "normality": _test(report.diagnostics.normality),
            "residual_acf": _correlogram(report.diagnostics.resid_acf),
            "residual_pacf": _correlogram(report.diagnostics.resid_pacf),
            "passed": report.diagnostics.passed,
        },
        "evaluation": None,
    }
    if ev is not None:
        out["evaluation"] = {
            "rows": [
                {"label": r.label, "date": dates.get(r.label), "actual": r.actual,
                 "forecast": r.forecast, "error": r.error}
                for r in ev.rows
            ],
            "error_acf": _correlogram(ev.error_acf),
            "error_pacf": _correlogram(ev.error_pacf),
            "error_acf_ok": ev.error_acf_ok,
            "error_pacf_ok": ev.error_pacf_ok,
            "normality": _test(ev.normality),
            "gaussian_white_noise": ev.verdict,
        }
    return out


def _sig(x: float | None, digits: int = 5) -> str:
    if x is None:
        return "n/a"
    return f"{x:.{digits}g}"


def _fixed(x: float | None, decimals: int) -> str:
    return "n/a" if x is None else f"{x:.{decimals}f}"


def _int(x: float) -> str:
    return str(int(round(x)))


def _pval(t: dict) -> str:
    s = _sig(t["p_value"], 4)
    return f"{s} (table bound)" if t.get("p_clamped") else s


def render_markdown(d: dict) -> str:
    lines = ["# Box-Jenkins report", ""]
    tr = d["transform"]
    lam = "none" if tr["lambda"] is None else f"{tr['lambda']:g}"
    lines += [f"Observations: {d['data']['n']} ({d['data']['n_train']} for fitting, "
              f"{d['data']['n_holdout']} held out). Box-Cox lambda: {lam}. "
              f"Differencing order: {tr['diff_order']}.", ""]

    lines += ["## Stationarity (ADF, constant + trend)", "",
              "| Series | Lags | ADF statistic | p-value |", "|---|---|---|---|"]
    for t in d["stationarity_trail"]:
        lines.append(f"| {t['series']} | {t['details']['lag_order']} | {_fixed(t['statistic'], 2)} | {_pval(t)} |")

    lines += ["", "## Tentative models", "", "| Model | AIC | Status |", "|---|---|---|"]
    for c in d["candidates"]:
        status = c["status"] + (", non-significant coefficients" if c["nonsignificant_coefficients"] else "")
        lines.append(f"| {c['model']} | {_fixed(c['aic'], 2)} | {status} |")

    ch = d["chosen"]
    lines += ["", f"## Chosen model: {ch['model']}", "",
              "| Statistic | " + " | ".join(r["name"] for r in ch["coefficients"]) + " |",
              "|---" * (len(ch["coefficients"]) + 1) + "|"]
    for key, label in (("estimate", "Estimate"), ("se", "Standard Error"), ("z", "z-value"), ("p_value", "p-value")):
        dec = 4 if key in ("z", "p_value") else 5
        lines.append(f"| {label} | " + " | ".join(_fixed(r[key], dec) for r in ch["coefficients"]) + " |")
    lines += ["", f"sigma^2 = {_sig(ch['sigma2'])}, log-likelihood = {_fixed(ch['loglik'], 2)}, "
              f"AIC = {_fixed(ch['aic'], 2)} (k = {ch['k']})", ""]

    dg = d["diagnostics"]
    lb = dg["ljung_box"]
    lines += ["## Residual diagnostics", "", "| Test | Statistic | p-value |", "|---|---|---|",
              f"| Ljung-Box Q* (m={lb['details']['m']}, df={lb['df_or_n']}) | {_sig(lb['statistic'])} | {_pval(lb)} |"]
    if dg["normality"]:
        lines.append(f"| Shapiro-Wilk W | {_sig(dg['normality']['statistic'])} | {_pval(dg['normality'])} |")
    lines += ["", f"Diagnostics {'pass' if dg['passed'] else 'fail'}.", ""]

    ev = d["evaluation"]
    if ev is not None:
        lines += ["## One-step-ahead forecasts", "",
                  "| Week | Date | Actual | Forecast | Error |", "|---|---|---|---|---|"]
        for r in ev["rows"]:
            lines.append(f"| {r['label']} | {r['date'] or ''} | {_int(r['actual'])} | "
                         f"{_int(r['forecast'])} | {_int(r['error'])} |")
        lines.append("")
        if ev["normality"]:
            lines += ["| Forecast errors | Statistic | p-value |", "|---|---|---|",
                      f"| Shapiro-Wilk W | {_sig(ev['normality']['statistic'])} | {_pval(ev['normality'])} |", ""]
        lines.append(f"Error ACF inside band: {ev['error_acf_ok']}; error PACF inside band: "
                     f"{ev['error_pacf_ok']}; Gaussian white noise: {ev['gaussian_white_noise']}.")
        lines.append("")
    return "\n".join(lines)


def emit_report(report: PipelineReport, fmt: str, out: str | Path, seed: int | None = None,
                dates: Mapping[str, str] | None = None) -> list[Path]:
    """Write report.json and/or report.md into `out`. `fmt` is json, markdown or both."""
    if fmt not in ("json", "markdown", "both"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    d = report_to_dict(report, seed, dates)
    written = []
    if fmt in ("json", "both"):
        p = out / "report.json"
        p.write_text(json.dumps(d, indent=2, allow_nan=False) + "\n", encoding="utf-8")
        written.append(p)
    if fmt in ("markdown", "both"):
        p = out / "report.md"
        p.write_text(render_markdown(d), encoding="utf-8")
        written.append(p)
    return written


def _write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _correlogram_csv(path: Path, c: Correlogram) -> Path:
    return _write_csv(path, ["lag", "value", "band"],
                      ((int(k), float(v), c.band) for k, v in zip(c.lags, c.values)))


def emit_plot_data(report: PipelineReport, out: str | Path) -> list[Path]:
    """One CSV per figure under ``out/figures``."""
    fig = Path(out) / "figures"
    fig.mkdir(parents=True, exist_ok=True)
    s = report.series
    n_train = len(report.train)
    written = [
        _write_csv(fig / "fig1_series.csv", ["index", "label", "value", "segment"],
                   ((i, s.label(i), float(s[i]), "train" if i < n_train else "holdout")
                    for i in range(len(s)))),
        _write_csv(fig / "fig2_transformed.csv", ["index", "label", "value"],
                   ((i, report.transformed.label(i), float(v)) for i, v in enumerate(report.transformed))),
        _correlogram_csv(fig / "fig3_acf.csv", report.identification_acf),
        _correlogram_csv(fig / "fig3_pacf.csv", report.identification_pacf),
    ]
    resid = report.chosen.residuals
    offset = len(report.train) - resid.size
    written.append(_write_csv(fig / "fig4_residuals.csv", ["index", "label", "residual"],
                              ((i, report.train.label(i + offset), float(v)) for i, v in enumerate(resid))))
    written.append(_write_csv(fig / "fig5_qq.csv", ["theoretical", "sample"], report.diagnostics.qq))
    written.append(_correlogram_csv(fig / "fig6_residual_acf.csv", report.diagnostics.resid_acf))
    written.append(_correlogram_csv(fig / "fig6_residual_pacf.csv", report.diagnostics.resid_pacf))
    ev = report.evaluation
    if ev is not None:
        written.append(_write_csv(fig / "forecasts.csv", ["label", "actual", "forecast", "error"],
                                  ((r.label, r.actual, r.forecast, r.error) for r in ev.rows)))
        if ev.error_acf is not None:
            written.append(_correlogram_csv(fig / "fig7_error_acf.csv", ev.error_acf))
            written.append(_correlogram_csv(fig / "fig7_error_pacf.csv", ev.error_pacf))
    return written
