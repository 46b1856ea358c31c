import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbspred.errors import DomainError, NumericalError, OutOfRangeError, PrecisionError
from gibbspred.ngg_series import incomplete_gamma, ngg_log_V_series, ngg_predictive_weight_exact


def V_by_one_dim_integral(n, k, alpha, tau, dps=30):
    """V_{n,k} = alpha**k / Gamma(n) int u**(n-1) (u+tau)**(k alpha - n) e**(tau**a - (u+tau)**a) du."""
    with mpmath.workdps(dps):
        a, t = mpmath.mpf(alpha), mpmath.mpf(tau)
        f = lambda u: u ** (n - 1) * (u + t) ** (k * a - n) * mpmath.exp(t ** a - (u + t) ** a)
        # the integrand peaks near u ~ ((n - k alpha)/alpha)**(1/alpha); split there
        m = ((n - k * alpha) / alpha) ** (1 / alpha)
        val = mpmath.quad(f, [0, m / 4, m, 4 * m, 64 * m, mpmath.inf])
        return float(a ** k / mpmath.gamma(n) * val)


class TestIncompleteGamma:
    @pytest.mark.parametrize("a", [-4.5, -3.0, -2.2, -1.0, -0.5, 0.0, 0.3, 1.0, 2.5, 5.0])
    @pytest.mark.parametrize("b", [0.1, 1.0, 10.0])
    def test_against_mpmath(self, a, b):
        assert incomplete_gamma(a, b) == pytest.approx(float(mpmath.gammainc(a, b)), rel=1e-11)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(-5.0, 5.0), b=st.sampled_from([0.1, 1.0, 10.0]))
    def test_recurrence(self, a, b):
        # Gamma(a + 1, b) = a Gamma(a, b) + b**a e**(-b)
        lhs = incomplete_gamma(a + 1.0, b)
        rhs = a * incomplete_gamma(a, b) + b ** a * math.exp(-b)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)

    def test_rejects_non_positive_b(self):
        with pytest.raises(DomainError):
            incomplete_gamma(1.0, 0.0)


class TestSeriesV:
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("tau", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("n,k", [(1, 1), (5, 2), (12, 5), (25, 9)])
    def test_against_one_dim_integral(self, alpha, tau, n, k):
        got = ngg_log_V_series(n, k, alpha, tau).value
        assert got == pytest.approx(V_by_one_dim_integral(n, k, alpha, tau), rel=1e-10)

    def test_known_value(self):
        assert ngg_log_V_series(20, 6, 0.5, 1.0).value == pytest.approx(4.26155038931311e-17, rel=1e-12)

    def test_tau_zero_is_stable(self):
        lv = ngg_log_V_series(5, 2, 0.5, 0.0)
        assert lv.value == pytest.approx(1 / 48, rel=1e-14)

    def test_small_tau_tends_to_stable(self):
        # the departure from the stable value is of order tau**alpha
        v0 = ngg_log_V_series(8, 3, 0.5, 0.0).value
        for tau in (1e-4, 1e-8):
            v = ngg_log_V_series(8, 3, 0.5, tau).value
            assert v == pytest.approx(V_by_one_dim_integral(8, 3, 0.5, tau), rel=1e-10)
            assert abs(v / v0 - 1) < 2 * tau ** 0.5

    def test_cancellation_detected_at_double_precision(self):
        with pytest.raises(PrecisionError) as info:
            ngg_log_V_series(100, 20, 0.5, 10.0, precision_digits=15)
        assert info.value.achieved > 1e7
        assert "MC" in str(info.value)

    def test_more_digits_resolve_cancellation(self):
        lv = ngg_log_V_series(100, 20, 0.5, 10.0, precision_digits=50)
        assert math.isfinite(lv.log_magnitude)
        hi = ngg_log_V_series(100, 20, 0.5, 10.0, precision_digits=80)
        assert lv.log_magnitude == pytest.approx(hi.log_magnitude, rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            ngg_log_V_series(5, 2, 0.5, -1.0)
        with pytest.raises(DomainError):
            ngg_log_V_series(5, 6, 0.5, 1.0)
        with pytest.raises(DomainError):
            ngg_log_V_series(5, 2, 0.5, 1.0, precision_digits=2)


class TestExactWeight:
    def test_tau_zero(self):
        assert ngg_predictive_weight_exact(10, 4, 0.5, 0.0) == 0.2

    @pytest.mark.parametrize("n,k", [(10, 4), (20, 6)])
    def test_against_integral_ratio(self, n, k):
        alpha, tau = 0.5, 2.0
        ratio = V_by_one_dim_integral(n + 1, k, alpha, tau) / V_by_one_dim_integral(n, k, alpha, tau)
        expected = 1 - (n - alpha * k) * ratio
        assert ngg_predictive_weight_exact(n, k, alpha, tau) == pytest.approx(expected, rel=1e-9)

    def test_lies_between_first_order_and_one(self):
        # with h decreasing the new-type weight exceeds k alpha / n
        for n, k in [(10, 3), (30, 8), (60, 20)]:
            w = ngg_predictive_weight_exact(n, k, 0.5, 1.0)
            assert k * 0.5 / n < w < 1.0

    def test_low_precision_fails_loudly(self):
        with pytest.raises((PrecisionError, OutOfRangeError)):
            ngg_predictive_weight_exact(90, 20, 0.5, 10.0, precision_digits=15)

    def test_errors_are_numerical(self):
        assert issubclass(PrecisionError, NumericalError)
        assert issubclass(OutOfRangeError, NumericalError)
