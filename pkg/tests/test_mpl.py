import numpy as np
import pytest

from parcopula.copulas import CopulaDomainError, CopulaFamily, CopulaModel, log_pdf, sample
from parcopula.mpl import (
    DegenerateSampleError,
    _rank_correction,
    asymptotic_variance,
    empirical_tau,
    fit,
    pseudo_loglik,
)
from parcopula.pseudo_obs import normalized_ranks

TRUE = {CopulaFamily.GAUSSIAN: 0.3, CopulaFamily.FRANK: 5.0, CopulaFamily.GUMBEL: 5.0}


def pseudo(family, theta, n, seed):
    X = sample(CopulaModel(family, theta), n, np.random.default_rng(seed))
    return normalized_ranks(X)


def brute_rank_correction(x, cross):
    n = x.shape[0]
    ind = (x[:, None] <= x[None, :]).astype(float)
    return ((ind - x[None, :]) * cross[None, :]).sum(axis=1) / n


class TestPseudoLoglik:
    def test_independence_is_zero(self, rng):
        U = rng.uniform(size=(100, 2))
        assert pseudo_loglik("gaussian", 0.0, U) == 0.0

    def test_additive(self, rng):
        U = rng.uniform(0.01, 0.99, size=(3, 2))
        m = CopulaModel("frank", 5.0)
        ref = sum(log_pdf(m, u, v) for u, v in U)
        assert pseudo_loglik("frank", 5.0, U) == pytest.approx(ref, rel=1e-14)
        assert pseudo_loglik("frank", 5.0, U) == pytest.approx(
            pseudo_loglik("frank", 5.0, U[:1]) + pseudo_loglik("frank", 5.0, U[1:]), rel=1e-14
        )

    def test_invalid_theta(self, rng):
        with pytest.raises(CopulaDomainError):
            pseudo_loglik("gumbel", 0.5, rng.uniform(size=(10, 2)))

    def test_coarse_grid_argmax(self):
        U = pseudo("gaussian", 0.5, 2000, 1)
        grid = np.round(np.arange(0.1, 0.91, 0.1), 1)
        ll = [pseudo_loglik("gaussian", t, U) for t in grid]
        theta = fit("gaussian", U).theta_hat
        assert grid[int(np.argmax(ll))] == grid[np.argmin(np.abs(grid - theta))]


class TestFit:
    def test_recovers_parameter(self, family):
        U = pseudo(family, TRUE[family], 20_000, 2)
        res = fit(family, U)
        assert res.converged, res.message
        assert res.n == 20_000
        assert abs(res.theta_hat - TRUE[family]) < 4 * res.se

    def test_gaussian_large_sample(self):
        res = fit("gaussian", pseudo("gaussian", 0.3, 50_000, 3))
        assert abs(res.theta_hat - 0.3) < 3 * res.se

    def test_is_the_maximum(self, family):
        U = pseudo(family, TRUE[family], 3000, 4)
        res = fit(family, U)
        ll = pseudo_loglik(family, res.theta_hat, U)
        assert res.loglik == pytest.approx(ll, rel=1e-12)
        for d in (1e-4, -1e-4):
            assert pseudo_loglik(family, res.theta_hat + d, U) < ll

    @pytest.mark.parametrize("theta", [-0.95, -0.4, 0.0, 0.9, 0.99])
    def test_gaussian_range(self, theta):
        res = fit("gaussian", pseudo("gaussian", theta, 5000, 5))
        assert res.converged
        assert abs(res.theta_hat - theta) < 5 * res.se + 1e-3

    @pytest.mark.parametrize("theta", [-20.0, -2.0, 0.3, 30.0])
    def test_frank_range(self, theta):
        res = fit("frank", pseudo("frank", theta, 5000, 6))
        assert res.converged
        assert abs(res.theta_hat - theta) < 5 * res.se

    def test_frank_independent_data(self, rng):
        res = fit("frank", normalized_ranks(rng.uniform(size=(2000, 2))))
        assert res.converged
        assert abs(res.theta_hat) < 0.5

    def test_gumbel_at_independence(self):
        res = fit("gumbel", pseudo("gumbel", 1.0, 5000, 7))
        assert res.converged, res.message
        assert 1.0 <= res.theta_hat < 1.05

    def test_gumbel_negative_dependence_hits_boundary(self):
        U = pseudo("gaussian", -0.5, 2000, 8)
        res = fit("gumbel", U)
        assert res.theta_hat == 1.0
        assert res.converged

    def test_deterministic(self):
        U = pseudo("frank", 5.0, 2000, 9)
        assert fit("frank", U) == fit("frank", U) or (
            fit("frank", U).theta_hat == fit("frank", U).theta_hat
        )

    def test_monotone_transform_bit_identical(self, family):
        X = sample(CopulaModel(family, TRUE[family]), 3000, np.random.default_rng(10))
        Y = np.column_stack([np.log(X[:, 0]), np.tan(np.pi * (X[:, 1] - 0.5))])
        a = fit(family, normalized_ranks(X))
        b = fit(family, normalized_ranks(Y))
        assert (a.theta_hat, a.sigma2, a.loglik) == (b.theta_hat, b.sigma2, b.loglik)

    def test_gaussian_column_negation(self):
        X = sample(CopulaModel("gaussian", 0.3), 4000, np.random.default_rng(11))
        base = fit("gaussian", normalized_ranks(X)).theta_hat
        one = fit("gaussian", normalized_ranks(X * [-1.0, 1.0])).theta_hat
        both = fit("gaussian", normalized_ranks(-X)).theta_hat
        # reflecting one margin flips the sign; reflecting both leaves the estimate alone
        assert abs(abs(one) - abs(base)) < 1e-6 and np.sign(one) == -np.sign(base)
        assert abs(both - base) < 1e-6

    def test_column_swap(self, family):
        U = pseudo(family, TRUE[family], 2000, 12)
        assert fit(family, U[:, ::-1]).theta_hat == pytest.approx(fit(family, U).theta_hat, abs=1e-7)

    def test_too_few_rows(self, rng):
        with pytest.raises(CopulaDomainError, match="at least 30"):
            fit("gaussian", rng.uniform(size=(29, 2)))

    def test_constant_column(self):
        U = np.column_stack([np.full(50, 0.5), np.arange(1, 51) / 51])
        with pytest.raises(DegenerateSampleError):
            fit("frank", U)

    def test_non_convergence_is_reported(self):
        res = fit("frank", pseudo("frank", 5.0, 2000, 13), maxiter=3)
        assert not res.converged
        assert "not reached" in res.message

    def test_no_variance(self):
        res = fit("gumbel", pseudo("gumbel", 2.0, 500, 14), variance=False)
        assert np.isnan(res.sigma2) and res.converged


class TestVariance:
    @pytest.mark.parametrize("ties", [False, True])
    def test_rank_correction_matches_double_sum(self, rng, ties):
        x = rng.uniform(size=400)
        if ties:
            x = np.round(x, 1)
        c = rng.normal(size=400)
        np.testing.assert_allclose(_rank_correction(x, c), brute_rank_correction(x, c),
                                   atol=1e-14)

    def test_gaussian_known_limit(self):
        # for the normal copula the pseudo-likelihood variance is (1 - rho^2)^2 / n
        n, rho = 100_000, 0.3
        U = pseudo("gaussian", rho, n, 15)
        s2 = asymptotic_variance("gaussian", rho, U)
        assert n * s2 == pytest.approx((1 - rho * rho) ** 2, rel=0.03)

    def test_matches_fit(self):
        U = pseudo("frank", 5.0, 3000, 16)
        res = fit("frank", U)
        assert res.sigma2 == asymptotic_variance("frank", res.theta_hat, U)

    def test_halves_when_n_doubles(self, family):
        ratios = []
        for s in range(50):
            X = sample(CopulaModel(family, TRUE[family]), 2000, np.random.default_rng(100 + s))
            small = fit(family, normalized_ranks(X[:1000]))
            big = fit(family, normalized_ranks(X))
            ratios.append(big.sigma2 / small.sigma2)
        assert 0.4 <= np.mean(ratios) <= 0.6

    def test_positive(self, family):
        for s in range(5):
            res = fit(family, pseudo(family, TRUE[family], 300, 200 + s))
            assert res.converged and res.sigma2 > 0


def test_empirical_tau_subsamples():
    U = pseudo("gumbel", 2.0, 20_000, 17)
    full = empirical_tau(U, max_rows=20_000)
    sub = empirical_tau(U, max_rows=5000)
    assert sub == pytest.approx(full, abs=0.02)
    assert full == pytest.approx(0.5, abs=0.01)
