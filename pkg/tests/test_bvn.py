import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.special import ndtr

from parcopula._bvn import bvn_cdf


def plackett(h, k, r):
    """Phi2 via the integral of the bivariate density over the correlation."""

    def dens(s):
        q = 1.0 - s * s
        return np.exp(-(h * h - 2 * s * h * k + k * k) / (2 * q)) / (2 * np.pi * np.sqrt(q))

    val, _ = integrate.quad(dens, 0.0, r, epsabs=1e-14, epsrel=1e-13, limit=500)
    return ndtr(h) * ndtr(k) + val


POINTS = [(0.0, 0.0), (0.5, -0.3), (-1.2, 0.7), (1.5, 1.5), (-2.0, -2.5), (3.0, -0.1)]
RHOS = [-0.95, -0.6, -0.2, 0.0, 0.3, 0.8, 0.93, 0.99]


class TestAgainstOracles:
    @pytest.mark.parametrize("r", RHOS)
    @pytest.mark.parametrize("h,k", POINTS)
    def test_plackett_integral(self, h, k, r):
        assert bvn_cdf(h, k, r) == pytest.approx(plackett(h, k, r), abs=1e-13)

    @pytest.mark.parametrize("r", [-0.5, 0.3, 0.9])
    def test_scipy_mvn(self, r):
        h = np.array([-1.0, 0.2, 1.3])
        k = np.array([0.4, -0.8, 2.0])
        mvn = stats.multivariate_normal(mean=[0, 0], cov=[[1, r], [r, 1]])
        ref = np.array([mvn.cdf([a, b]) for a, b in zip(h, k)])
        np.testing.assert_allclose(bvn_cdf(h, k, r), ref, atol=1e-6)

    @pytest.mark.parametrize("r", [-0.8, 0.0, 0.45])
    def test_orthant(self, r):
        # P(X < 0, Y < 0) = 1/4 + asin(r) / (2 pi)
        assert bvn_cdf(0.0, 0.0, r) == pytest.approx(0.25 + np.arcsin(r) / (2 * np.pi), abs=1e-15)


class TestLimits:
    def test_independence(self):
        h, k = np.array([-1.0, 0.5]), np.array([2.0, 0.1])
        np.testing.assert_allclose(bvn_cdf(h, k, 0.0), ndtr(h) * ndtr(k), rtol=1e-15)

    def test_comonotone(self):
        assert bvn_cdf(0.3, -0.4, 1.0) == pytest.approx(ndtr(-0.4), abs=1e-15)

    def test_countermonotone(self):
        assert bvn_cdf(0.3, 0.4, -1.0) == pytest.approx(ndtr(0.3) + ndtr(0.4) - 1, abs=1e-15)

    def test_infinite_limits(self):
        assert bvn_cdf(np.inf, 0.7, 0.5) == pytest.approx(ndtr(0.7), abs=1e-15)
        assert bvn_cdf(-np.inf, 0.7, 0.5) == 0.0
        assert bvn_cdf(np.inf, np.inf, -0.5) == 1.0

    def test_broadcasting(self):
        out = bvn_cdf(np.zeros((3, 1)), np.zeros((1, 4)), 0.2)
        assert out.shape == (3, 4)


@settings(max_examples=200, deadline=None)
@given(
    h=st.floats(-6, 6), k=st.floats(-6, 6), r=st.floats(-0.999, 0.999),
)
def test_properties(h, k, r):
    p = bvn_cdf(h, k, r)
    # symmetric in its arguments, inside the Frechet bounds
    assert p == pytest.approx(bvn_cdf(k, h, r), abs=1e-15)
    lo = max(ndtr(h) + ndtr(k) - 1.0, 0.0)
    hi = min(ndtr(h), ndtr(k))
    assert lo - 1e-15 <= p <= hi + 1e-15
    # reflection: P(X<h, Y<k; r) + P(X<h, Y>k; r) = Phi(h)
    assert p + bvn_cdf(h, -k, -r) == pytest.approx(ndtr(h), abs=1e-14)
