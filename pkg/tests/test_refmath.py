import math
import time

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import kolmogi, kolmogorov

from bridgesup.refmath import (
    darling_erdos_critical,
    kolmogorov_cdf,
    kolmogorov_quantile,
    psi,
    psi_tilde,
    std_normal_cdf,
    std_normal_pdf,
)

finite = st.floats(-30, 30, allow_nan=False)


class TestNormal:
    def test_cdf_at_zero(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_cdf_against_high_precision(self):
        mpmath.mp.dps = 40
        for x in (-30.0, -8.0, -3.0, -0.5, 0.7, 3.0, 6.0):
            exact = float(mpmath.ncdf(x))
            assert abs(std_normal_cdf(x) - exact) <= 1e-15
            # erfc route keeps relative accuracy in the lower tail
            if x < 0:
                assert std_normal_cdf(x) == pytest.approx(exact, rel=1e-13)
        assert std_normal_cdf(3.0) == pytest.approx(0.9986501019683699, abs=1e-15)

    @given(finite)
    def test_reflection(self, x):
        assert abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-14
        assert std_normal_pdf(x) == std_normal_pdf(-x)

    def test_cdf_strictly_increasing(self):
        xs = np.linspace(-30, 5, 2001)
        values = [std_normal_cdf(x) for x in xs]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_non_finite(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                std_normal_cdf(bad)
            with pytest.raises(ValueError):
                psi(bad)


class TestPsi:
    def test_values(self):
        assert psi(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
        assert psi(3.0) == pytest.approx(0.0044318484119380075 + 3 * 0.9986501019683699, rel=1e-14)
        assert psi(3.0) == pytest.approx(3.0004, abs=1e-4)

    @given(st.floats(-20, 20, allow_nan=False))
    def test_odd_part(self, a):
        assert psi(a) - psi(-a) == pytest.approx(a, abs=1e-12)

    def test_positive_and_nondecreasing(self):
        a = np.linspace(-30, 30, 6001)
        values = np.array([psi(x) for x in a])
        assert np.all(values > 0)
        assert np.all(np.diff(values) >= 0)

    def test_linear_growth(self):
        assert psi(40.0) / 40.0 == pytest.approx(1.0, abs=1e-12)

    def test_tilde_branches(self):
        assert psi_tilde(4.0) == 4.0
        assert psi_tilde(-4.0) == pytest.approx(std_normal_pdf(-4.0) / 16.0, rel=1e-15)
        assert psi_tilde(1.0) == psi(1.0)
        assert psi_tilde(3.0) == psi(3.0)
        assert psi_tilde(-3.0) == psi(-3.0)

    def test_tilde_keeps_the_jumps(self):
        # the piecewise definition is not continuous at +-3
        above = math.nextafter(3.0, 4.0)
        below = math.nextafter(-3.0, -4.0)
        assert psi_tilde(above) == above
        assert psi_tilde(above) < psi(3.0)
        assert psi_tilde(below) == pytest.approx(std_normal_pdf(below) / below**2)
        assert psi_tilde(below) != pytest.approx(psi(-3.0), rel=1e-3)


class TestKolmogorov:
    def test_series_at_one(self):
        partial = 1 - 2 * sum((-1) ** (k - 1) * math.exp(-2 * k * k) for k in range(1, 51))
        assert kolmogorov_cdf(1.0) == pytest.approx(partial, abs=1e-15)

    def test_against_scipy(self):
        for x in np.linspace(0.05, 4.0, 80):
            assert kolmogorov_cdf(x) == pytest.approx(1 - kolmogorov(x), abs=1e-14)

    def test_monotone_on_grid(self):
        values = [kolmogorov_cdf(x) for x in np.arange(1, 31) / 10]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_limit_at_zero(self):
        assert kolmogorov_cdf(1e-3) == 0.0
        assert 0.0 < kolmogorov_cdf(0.1) < 1e-50

    def test_domain(self):
        with pytest.raises(ValueError):
            kolmogorov_cdf(0.0)
        with pytest.raises(ValueError):
            kolmogorov_cdf(-1.0)
        for q in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                kolmogorov_quantile(q)

    def test_quantile_095(self):
        assert kolmogorov_quantile(0.95) == pytest.approx(1.3581, abs=5e-4)
        assert round(kolmogorov_quantile(0.95), 3) == 1.358

    @pytest.mark.parametrize("q", [0.01, 0.3, 0.5, 0.9, 0.99, 0.9999])
    def test_quantile_roundtrip(self, q):
        x = kolmogorov_quantile(q)
        assert kolmogorov_cdf(x) == pytest.approx(q, abs=1e-9)
        assert x == pytest.approx(kolmogi(1 - q), abs=1e-9)

    def test_quantile_fast(self):
        kolmogorov_quantile(0.95)
        best = min(_timed(kolmogorov_quantile, 0.95) for _ in range(20))
        assert best < 1e-3


class TestDarlingErdos:
    def test_example_values(self):
        assert darling_erdos_critical(100, 0.05, variant="one-sided") == pytest.approx(3.241, abs=5e-4)
        assert darling_erdos_critical(1000, 0.05, variant="one-sided") == pytest.approx(3.353, abs=5e-4)
        assert darling_erdos_critical(100, 0.05, variant="as-stated") == pytest.approx(3.637, abs=5e-4)

    def test_default_is_as_stated(self):
        assert darling_erdos_critical(100, 0.05) == darling_erdos_critical(100, 0.05, variant="as-stated")

    def test_direct_formula(self):
        ll = math.log(math.log(100))
        a = math.sqrt(2 * ll)
        b = 2 * ll + 0.5 * math.log(ll) - 0.5 * math.log(math.pi)
        expected = (-math.log(-0.5 * math.log(0.95)) + b) / a
        assert darling_erdos_critical(100, 0.05) == pytest.approx(expected, rel=1e-15)

    def test_sigma_scaling(self):
        assert darling_erdos_critical(500, 0.1, 2.5) == pytest.approx(2.5 * darling_erdos_critical(500, 0.1))

    @pytest.mark.parametrize("variant", ["as-stated", "one-sided"])
    def test_monotonicity(self, variant):
        alphas = [0.01, 0.05, 0.1, 0.2]
        by_alpha = [darling_erdos_critical(1000, a, variant=variant) for a in alphas]
        assert all(b < a for a, b in zip(by_alpha, by_alpha[1:]))
        ns = [10**k for k in range(2, 7)]
        by_n = [darling_erdos_critical(n, 0.05, variant=variant) for n in ns]
        assert all(b > a for a, b in zip(by_n, by_n[1:]))

    def test_errors(self):
        with pytest.raises(ValueError):
            darling_erdos_critical(2, 0.05)
        with pytest.raises(ValueError):
            darling_erdos_critical(100, 0.0)
        with pytest.raises(ValueError):
            darling_erdos_critical(100, 0.05, variant="two-sided")
        with pytest.raises(ValueError):
            darling_erdos_critical(100, 0.05, sigma=0.0)

    def test_fast(self):
        best = min(_timed(darling_erdos_critical, 1000, 0.05) for _ in range(20))
        assert best < 1e-3


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    fn(*args, **kwargs)
    return time.perf_counter() - t0
