import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbspred.errors import DomainError
from gibbspred.models import (NGG, PD, Generic, LogValue, Stable, check_nk, pd_log_V, phi_h,
                              stable_log_V)


def pd_V_product(n, k, alpha, theta):
    # direct product formula with the rising factorial (theta)_n
    num = np.prod([theta + i * alpha for i in range(1, k)]) if k > 1 else 1.0
    den = np.prod([theta + i for i in range(1, n)]) if n > 1 else 1.0
    return num / den


class TestPhi:
    def test_pd_is_theta(self):
        assert phi_h(PD(0.5, theta=10.0), 3.7) == 10.0

    def test_ngg_is_tau_t(self):
        assert phi_h(NGG(0.5, tau=2.0), 3.0) == pytest.approx(6.0)

    def test_stable_is_zero(self):
        assert phi_h(Stable(0.3), 12.0) == 0.0

    def test_array_argument(self):
        t = np.array([1.0, 2.0, 4.0])
        np.testing.assert_array_equal(phi_h(PD(0.5, theta=2.0), t), [2.0, 2.0, 2.0])
        np.testing.assert_allclose(phi_h(NGG(0.5, tau=3.0), t), 3.0 * t)

    @settings(max_examples=50, deadline=None)
    @given(theta=st.floats(0.1, 50.0), t=st.floats(1e-3, 1e3), alpha=st.floats(0.05, 0.95))
    def test_generic_matches_pd(self, theta, t, alpha):
        g = Generic(alpha, h=lambda x: x ** -theta, h_prime=lambda x: -theta * x ** (-theta - 1))
        assert phi_h(g, t) == pytest.approx(theta, rel=1e-12)

    def test_generic_matches_ngg(self):
        tau = 1.7
        g = Generic(0.4, h=lambda x: math.exp(-tau * x), h_prime=lambda x: -tau * math.exp(-tau * x))
        assert phi_h(g, 2.5) == pytest.approx(phi_h(NGG(0.4, tau), 2.5), rel=1e-12)

    def test_rejects_non_positive_t(self):
        with pytest.raises(DomainError):
            phi_h(PD(0.5, 1.0), 0.0)

    def test_generic_rejects_non_positive_h(self):
        g = Generic(0.5, h=lambda x: -1.0, h_prime=lambda x: 0.0)
        with pytest.raises(DomainError):
            phi_h(g, 1.0)


class TestDomains:
    def test_pd_theta_bound(self):
        PD(0.5, theta=-0.49)
        with pytest.raises(DomainError):
            PD(0.5, theta=-0.5)

    def test_ngg_negative_tau(self):
        with pytest.raises(DomainError):
            NGG(0.5, tau=-1.0)

    @pytest.mark.parametrize("n,k", [(5, 0), (5, 6), (0, 0), (3.5, 1)])
    def test_check_nk(self, n, k):
        with pytest.raises(DomainError):
            check_nk(n, k)


class TestPdV:
    @pytest.mark.parametrize("n,k", [(1, 1), (5, 2), (10, 4), (30, 30)])
    @pytest.mark.parametrize("theta", [-0.3, 0.0, 1.0, 10.0])
    def test_against_product(self, n, k, theta):
        alpha = 0.5
        got = pd_log_V(n, k, alpha, theta).value
        # the common factor theta cancels between numerator and denominator
        assert got == pytest.approx(pd_V_product(n, k, alpha, theta), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(alpha=st.floats(0.05, 0.95), theta=st.floats(0.01, 20.0),
           n=st.integers(1, 400), data=st.data())
    def test_ratio_identities(self, alpha, theta, n, data):
        k = data.draw(st.integers(1, n))
        base = pd_log_V(n, k, alpha, theta)
        new = pd_log_V(n + 1, k + 1, alpha, theta).ratio(base)
        old = pd_log_V(n + 1, k, alpha, theta).ratio(base)
        assert new == pytest.approx((theta + k * alpha) / (theta + n), rel=1e-12)
        assert old == pytest.approx(1.0 / (theta + n), rel=1e-12)

    def test_large_n_stays_finite(self):
        lv = pd_log_V(5000, 100, 0.5, 1.0)
        assert math.isfinite(lv.log_magnitude) and lv.value == 0.0

    def test_negative_theta_sign_positive(self):
        assert pd_log_V(10, 3, 0.5, -0.25).sign == 1


def test_stable_V():
    assert stable_log_V(5, 2, 0.5).value == pytest.approx(1 / 48)
    assert stable_log_V(1, 1, 0.3).value == pytest.approx(1.0)


def test_log_value_ratio_and_sign():
    a, b = LogValue(math.log(6.0)), LogValue(math.log(2.0), sign=-1)
    assert a.ratio(b) == pytest.approx(-3.0)
    assert b.value == pytest.approx(-2.0)
