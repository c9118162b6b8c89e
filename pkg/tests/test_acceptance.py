"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
that is printed in the terminal summary under "acceptance criteria"."""
import subprocess
import sys

import numpy as np
import pytest

from boxjenkins.arima import ArimaSpec, ForecastRow, fit, kalman_loglik, simulate
from boxjenkins.correlogram import acf, pacf, significant_lags
from boxjenkins.pipeline import candidates_from_orders, identified_orders, propose_candidates, select_by_aic
from boxjenkins.series import boxcox, difference, integrate, inv_boxcox
from boxjenkins.stattests import adf_test, ljung_box, shapiro_wilk
from conftest import record_acceptance, synthetic_counts, write_weekly_csv
from test_arima import brute_force_loglik, draw_coefficients

ERRORS = [-15, -13, -7, 10, -5, 13, -8, 14, 4, -9]
TRUE_AR = np.array([-0.22712, -0.50015])


def check(criterion, ok, detail):
    record_acceptance(criterion, bool(ok), detail)
    assert ok, detail


def test_c01_shapiro_wilk_reproduction():
    rep = shapiro_wilk(ERRORS)
    ok = abs(rep.statistic - 0.88724) <= 0.001 and abs(rep.p_value - 0.1578) <= 0.005
    check("C1 Shapiro-Wilk on forecast errors", ok,
          f"W={rep.statistic:.5f} (target 0.88724 +/- 0.001), p={rep.p_value:.4f} (target 0.1578 +/- 0.005)")


def test_c02_error_arithmetic():
    table = [(13, 28), (3, 16), (2, 9), (16, 6), (6, 11), (16, 3), (8, 16), (19, 5), (20, 16), (2, 11)]
    rows = [ForecastRow(f"w{i}", float(a), float(f), float(a) - float(f)) for i, (a, f) in enumerate(table)]
    ok = [r.error for r in rows] == [float(e) for e in ERRORS]
    ok &= all(r.error == r.actual - r.forecast for r in rows)
    check("C2 error = actual - forecast", ok, f"errors {[int(r.error) for r in rows]}")


def test_c03_error_whiteness():
    a, p = acf(ERRORS), pacf(ERRORS)
    sig = [k for k in significant_lags(a) + significant_lags(p) if k <= 5]
    peak = max(np.max(np.abs(a.values)), np.max(np.abs(p.values)))
    check("C3 error ACF/PACF inside band", sig == [],
          f"max |r| {peak:.3f} vs band {a.band:.4f}, significant lags {sig}")


def test_c04_likelihood_oracle():
    rng = np.random.default_rng(2024)
    worst, cases = 0.0, 0
    combos = [(p, q) for p in range(3) for q in range(3)]
    for i in range(50):
        p, q = combos[i % len(combos)]
        ar, ma = draw_coefficients(rng, p), -draw_coefficients(rng, q)
        n = int(rng.integers(1, 9))
        z = rng.normal(0, 2, size=n)
        mean, s2 = rng.normal(), rng.uniform(0.3, 3.0)
        diff = abs(kalman_loglik(z, ar, ma, mean, s2) - brute_force_loglik(z, ar, ma, mean, s2))
        worst = max(worst, diff)
        cases += 1
    check("C4 likelihood vs multivariate normal", cases == 50 and worst <= 1e-8,
          f"{cases} draws, max abs difference {worst:.2e}")


@pytest.fixture(scope="module")
def recovery_fits():
    out = []
    for seed in range(100):
        y = simulate(ArimaSpec(2, 1, 0), TRUE_AR, [], 1.0, 1000, seed=seed)
        out.append({(s.p, s.q): fit(y, s) for s in
                    (ArimaSpec(2, 1, 0), ArimaSpec(0, 1, 2), ArimaSpec(2, 1, 2))})
    return out


def test_c05_estimator_recovery(recovery_fits):
    fits = [f[(2, 0)] for f in recovery_fits]
    est = np.array([f.ar for f in fits])
    se = np.array([f.se for f in fits])
    covered = int(np.sum(np.all(np.abs(est - TRUE_AR) <= 3 * se, axis=1)))
    ratio = se.mean(axis=0) / est.std(axis=0, ddof=1)
    ok = covered >= 95 and np.all((0.5 <= ratio) & (ratio <= 2.0))
    check("C5 ARIMA(2,1,0) recovery", ok,
          f"{covered}/100 within 3 SE; SE/empirical sd = {ratio[0]:.3f}, {ratio[1]:.3f}")


def test_c06_aic_selection(recovery_fits):
    picks = [select_by_aic(list(f.values())).spec for f in recovery_fits]
    wins = sum((s.p, s.q) == (2, 0) for s in picks)
    check("C6 AIC picks (2,1,0)", wins >= 60, f"{wins}/100 seeds")


def test_c07_adf_behaviour():
    walk_ok = ar_ok = 0
    for seed in range(500):
        walk = np.cumsum(np.random.default_rng(seed).normal(size=500))
        walk_ok += adf_test(walk).p_value >= 0.05
        ar = simulate(ArimaSpec(1, 0, 0, include_constant=False), [0.5], [], 1.0, 500, seed=seed)
        rep = adf_test(ar)
        ar_ok += rep.p_value == 0.01 and rep.p_clamped
    ok = walk_ok >= 450 and ar_ok >= 475
    check("C7 ADF random walk vs AR(1)", ok,
          f"random walk p>=0.05 in {walk_ok}/500, AR(1) clamped 0.01 in {ar_ok}/500")


def test_c08_ljung_box_size():
    rng = np.random.default_rng(8)
    rejections = sum(ljung_box(rng.normal(size=200), 10, 0).p_value < 0.05 for _ in range(1000))
    rate = rejections / 1000
    check("C8 Ljung-Box size", 0.03 <= rate <= 0.07, f"rejection rate {rate:.3f}")


def test_c09_candidate_rule():
    target = {(2, 1, 0), (0, 1, 2), (2, 1, 2)}
    got = {(s.p, s.d, s.q) for s in candidates_from_orders(2, 2, 1)}
    # a 60-point AR(2) draw whose largest significant ACF and PACF lags are both 2
    z = simulate(ArimaSpec(2, 0, 0, include_constant=False), [0.3, -0.5], [], 1.0, 60, seed=4)
    P, Q, _, _ = identified_orders(z)
    proposed = {(s.p, s.d, s.q) for s in propose_candidates(z, 1)}
    check("C9 candidate set for P=Q=2, d=1", (P, Q) == (2, 2) and got == proposed == target,
          f"identified P={P} Q={Q}; proposed {sorted(proposed)}")


def test_c10_round_trips():
    rng = np.random.default_rng(10)
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        y = np.exp(rng.uniform(np.log(0.01), np.log(1000.0), n))
        lam = float(rng.uniform(-2.0, 2.0))
        d = int(rng.integers(0, min(2, n - 1) + 1))
        back = inv_boxcox(boxcox(y, lam), lam).values
        out, heads = difference(y, d)
        again = integrate(out, heads).values
        if not (np.allclose(back, y, rtol=1e-9, atol=0) and np.allclose(again, y, rtol=1e-9, atol=1e-12)):
            failures += 1
    check("C10 Box-Cox and differencing round trips", failures == 0, f"{failures}/1000 cases failed")


def test_c11_cli_determinism(tmp_path):
    src = write_weekly_csv(tmp_path / "in.csv", synthetic_counts(70, seed=7))
    blobs = []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run([sys.executable, "-m", "boxjenkins", "--input", str(src), "--out", str(out),
                               "--seed", "1", "--format", "json"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        blobs.append((out / "report.json").read_bytes())
    check("C11 CLI report.json byte-identical", blobs[0] == blobs[1], f"{len(blobs[0])} bytes per report")
