import csv
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special
from scipy import stats as sps
from statsmodels.tsa.stattools import adfuller

from boxjenkins.arima import ArimaSpec, simulate
from boxjenkins.errors import (
    DegenerateInputError,
    InvalidDofError,
    UnsupportedSizeError,
)
from boxjenkins.stattests import (
    ADF_TABLE_PROBS,
    ADF_TABLE_SIZES,
    ADF_TREND_TABLE,
    TestReport,
    adf_pvalue,
    adf_test,
    ljung_box,
    normal_qq_points,
    shapiro_wilk,
)

TABLE9_ERRORS = [-15, -13, -7, 10, -5, 13, -8, 14, 4, -9]


def random_walk(n, seed):
    return np.cumsum(np.random.default_rng(seed).normal(size=n))


class TestADF:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("k", [0, 1, 4])
    def test_statistic_matches_statsmodels(self, seed, k):
        x = random_walk(120, seed) + 0.05 * np.arange(120)
        rep = adf_test(x, k)
        ref = adfuller(x, maxlag=k, autolag=None, regression="ct")[0]
        assert rep.statistic == pytest.approx(ref, rel=1e-10)

    def test_auto_lag(self):
        assert adf_test(random_walk(60, 0)).details["lag_order"] == 3  # floor(59^(1/3))

    def test_random_walk_not_rejected(self):
        rep = adf_test(random_walk(500, 0))
        assert rep.p_value >= 0.10
        assert not rep.rejects(0.05)

    def test_stationary_ar1_clamped(self):
        x = simulate(ArimaSpec(1, 0, 0, include_constant=False), [0.5], [], 1.0, 500, seed=0)
        rep = adf_test(x)
        assert rep.p_value == 0.01
        assert rep.p_clamped

    def test_table_nodes(self):
        # exactly on a tabulated quantile at a tabulated size
        p, clamped = adf_pvalue(-3.60, 25)
        assert p == pytest.approx(0.05) and not clamped
        # halfway between n=50 and n=100 in the 5% column
        p, _ = adf_pvalue((-3.50 - 3.45) / 2, 75)
        assert p == pytest.approx(0.05)
        # beyond the table in either direction
        assert adf_pvalue(-10.0, 60) == (0.01, True)
        assert adf_pvalue(3.0, 60) == (0.99, True)

    def test_table_matches_data_file(self):
        text = resources.files("boxjenkins").joinpath("data/adf_trend_critical_values.csv").read_text()
        rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#"))]
        header, body = rows[0], rows[1:]
        assert [float(h) for h in header[1:]] == list(ADF_TABLE_PROBS)
        assert [float(r[0]) for r in body] == list(ADF_TABLE_SIZES)
        assert np.array_equal(np.array([[float(v) for v in r[1:]] for r in body]), ADF_TREND_TABLE)

    def test_too_short(self):
        with pytest.raises(DegenerateInputError):
            adf_test(np.arange(12.0) ** 1.5, 3)

    def test_evidence_monotone_in_phi(self):
        medians = []
        for phi in (0.99, 0.9, 0.5):
            stat = [adf_test(simulate(ArimaSpec(1, 0, 0, include_constant=False), [phi], [], 1.0,
                                      500, seed=s)).statistic for s in range(40)]
            medians.append(np.median(stat))
        assert medians[0] > medians[1] > medians[2]


def chi2_upper_tail_quadrature(q, df):
    density = lambda x: x ** (df / 2 - 1) * math.exp(-x / 2) / (2 ** (df / 2) * special.gamma(df / 2))
    if q == 0:
        return 1.0
    lower, _ = integrate.quad(density, 0, q, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 1.0 - lower


class TestLjungBox:
    def test_zero_statistic(self):
        # deviations (1,0,-1,0,0) have zero lag-1 autocovariance
        rep = ljung_box([1.0, 0.0, -1.0, 0.0, 0.0], 1)
        assert rep.statistic == pytest.approx(0.0, abs=1e-15)
        assert rep.p_value == pytest.approx(1.0)

    def test_single_term_by_hand(self):
        # n=5, r_1=0.4: 5*7*0.16/4
        rep = ljung_box([1, 2, 3, 4, 5], 1)
        assert rep.statistic == pytest.approx(1.4)
        assert rep.df_or_n == 1

    def test_fitdf_reduces_dof(self):
        rng = np.random.default_rng(5)
        rep = ljung_box(rng.normal(size=60), 10, fitdf=2)
        assert rep.df_or_n == 8

    @pytest.mark.parametrize("m,fitdf", [(2, 2), (3, 5)])
    def test_invalid_dof(self, m, fitdf):
        with pytest.raises(InvalidDofError):
            ljung_box(np.arange(20.0) % 3, m, fitdf)

    def test_m_must_be_below_n(self):
        with pytest.raises(DegenerateInputError):
            ljung_box([1.0, 2.0, 0.5], 3)

    def test_paper_shape_is_no_lack_of_fit(self):
        rep = TestReport("Ljung-Box", 4.1824, 0.8403, 8, "no autocorrelation")
        assert not rep.rejects(0.05)
        # Q = 4.1824 on 8 degrees of freedom is what gives p = 0.8403
        assert sps.chi2.sf(4.1824, 8) == pytest.approx(0.8403, abs=5e-5)

    @pytest.mark.parametrize("df", [1, 2, 5, 8, 13, 21, 30])
    @pytest.mark.parametrize("q", [0.0, 0.5, 4.1824, 12.0, 35.0])
    def test_tail_matches_quadrature(self, df, q):
        assert sps.chi2.sf(q, df) == pytest.approx(chi2_upper_tail_quadrature(q, df), abs=1e-8)

    def test_p_value_uses_chi2_tail(self):
        rng = np.random.default_rng(9)
        rep = ljung_box(rng.normal(size=80), 10, fitdf=3)
        assert rep.p_value == pytest.approx(chi2_upper_tail_quadrature(rep.statistic, 7), abs=1e-8)


class TestShapiroWilk:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 10, 11, 12, 20, 50, 200, 1000])
    def test_matches_reference_implementation(self, n):
        rng = np.random.default_rng(n)
        x = rng.gamma(2.0, size=n)
        ours, ref = shapiro_wilk(x), sps.shapiro(x)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)

    def test_symmetric_triplet(self):
        assert shapiro_wilk([-1.0, 0.0, 1.0]).statistic > 0.99

    def test_skewed_sample_rejected(self):
        z = np.random.default_rng(50).normal(size=50)
        assert shapiro_wilk(np.exp(z)).p_value < 0.01

    def test_table9_errors_close_to_table10(self):
        # reproduced exactly in test_acceptance; here only the qualitative verdict
        rep = shapiro_wilk(TABLE9_ERRORS)
        assert rep.p_value > 0.05
        assert rep.df_or_n == 10

    @pytest.mark.parametrize("n", [2, 5001])
    def test_size_limits(self, n):
        with pytest.raises(UnsupportedSizeError):
            shapiro_wilk(np.arange(float(n)))

    def test_zero_variance(self):
        with pytest.raises(DegenerateInputError):
            shapiro_wilk([4.0] * 8)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=60).filter(lambda v: np.ptp(v) > 1e-3),
        st.floats(0.01, 100.0),
        st.floats(-1e3, 1e3),
    )
    def test_location_scale_invariance(self, values, a, b):
        x = np.array(values)
        w = shapiro_wilk(x).statistic
        assert 0.0 < w <= 1.0
        assert shapiro_wilk(a * x + b).statistic == pytest.approx(w, abs=1e-9)


class TestQQ:
    def test_rejects_tiny_samples(self):
        with pytest.raises(DegenerateInputError):
            normal_qq_points([1.0])

    def test_fixed_point(self):
        n = 9
        q = sps.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        pts = np.array(normal_qq_points(q[::-1]))
        np.testing.assert_allclose(pts[:, 0], pts[:, 1], atol=1e-9)

    def test_median_maps_to_zero(self):
        pts = normal_qq_points([5.0, 1.0, 3.0, 2.0, 4.0])
        assert pts[2] == (pytest.approx(0.0, abs=1e-12), 3.0)
        assert len(pts) == 5
