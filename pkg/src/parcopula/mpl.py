"""Maximum pseudo-likelihood estimation of a one-parameter copula."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from parcopula.copulas import (
    CopulaDomainError,
    CopulaFamily,
    CopulaModel,
    check_theta,
    inverse_tau,
    kernel,
    log_pdf,
)

MIN_ROWS = 30
TAU_SUBSAMPLE = 5000
FRANK_WINDOW = 1e-6
GUMBEL_DELTA = 1e-10


class DegenerateSampleError(CopulaDomainError):
    """Pseudo-sample carries no dependence information (e.g. a constant column)."""


class VarianceError(ArithmeticError):
    """The pseudo log-likelihood is not concave at the estimate."""


@dataclass(frozen=True)
class FitResult:
    """Outcome of one maximum pseudo-likelihood fit.

    ``sigma2`` is the estimated variance of ``theta_hat`` (asymptotic
    variance divided by ``n``); it is ``nan`` when the variance could not be
    computed, in which case ``converged`` is false.
    """

    family: CopulaFamily
    theta_hat: float
    sigma2: float
    n: int
    loglik: float
    iterations: int
    converged: bool
    message: str = ""
    fit_seconds: float = 0.0
    variance_seconds: float = 0.0

    @property
    def se(self) -> float:
        return float(np.sqrt(self.sigma2))


def check_pseudo_sample(U, min_rows: int = 2) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] != 2:
        raise CopulaDomainError(f"pseudo-sample must have shape (n, 2), got {U.shape}")
    if U.shape[0] < min_rows:
        raise CopulaDomainError(f"need at least {min_rows} rows, got {U.shape[0]}")
    if not ((U > 0.0) & (U < 1.0)).all():
        raise CopulaDomainError("pseudo-observations must lie strictly inside (0, 1)")
    return U


def pseudo_loglik(family, theta: float, U) -> float:
    """Sum of copula log-densities over the rows of ``U``."""
    model = CopulaModel(family, theta)
    U = check_pseudo_sample(U, min_rows=1)
    return float(np.sum(log_pdf(model, U[:, 0], U[:, 1])))


def _rank_correction(x, cross):
    """Empirical rank-correction term for one margin.

    Returns ``W_i = (1/n) sum_h [1(x_i <= x_h) - x_h] cross_h`` for every
    ``i`` in O(n log n) via a suffix sum over the sorted margin.
    """
    n = x.shape[0]
    order = np.argsort(x)
    xs = x[order]
    suffix = np.cumsum(cross[order][::-1])[::-1]
    # tied values all see the suffix starting at the first member of their group
    idx = np.arange(n)
    new = np.empty(n, dtype=bool)
    new[0] = True
    np.not_equal(xs[1:], xs[:-1], out=new[1:])
    first = np.maximum.accumulate(np.where(new, idx, 0))
    out = np.empty(n)
    out[order] = suffix[first]
    return (out - np.dot(x, cross)) / n


def asymptotic_variance(family, theta_hat: float, U) -> float:
    """Estimated variance of the estimator at ``theta_hat``.

    The sandwich ``M / I**2 / n`` where ``I`` is the mean negative Hessian
    and ``M`` the mean squared score augmented with the two rank-correction
    terms that account for estimating the margins by ranks.
    """
    t = CopulaModel(family, theta_hat).theta
    U = check_pseudo_sample(U)
    return _variance(kernel(family, U[:, 0], U[:, 1]), t, U)


def _variance(k, t, U):
    u, v = U[:, 0], U[:, 1]
    n = U.shape[0]
    info = -np.mean(k.hess(t))
    if not info > 0.0:
        raise VarianceError(f"non-positive information {info:.6g} at theta={t:.6g}")
    w1 = _rank_correction(u, k.cross(t, 1))
    w2 = _rank_correction(v, k.cross(t, 2))
    m = np.mean((k.score(t) + w1 + w2) ** 2)
    return float(m / info ** 2 / n)


def empirical_tau(U, max_rows: int = TAU_SUBSAMPLE) -> float:
    """Kendall's tau-b on at most ``max_rows`` evenly spaced rows."""
    n = U.shape[0]
    if n > max_rows:
        U = U[np.linspace(0, n - 1, max_rows).astype(np.int64)]
    return float(stats.kendalltau(U[:, 0], U[:, 1]).statistic)


def _start_value(family, tau):
    tau = float(np.clip(tau, -0.95, 0.95))
    if family is CopulaFamily.GUMBEL:
        return inverse_tau(family, max(tau, 0.0))
    if family is CopulaFamily.FRANK and abs(tau) < 1e-3:
        return 0.01 if tau >= 0 else -0.01
    return inverse_tau(family, tau)


class _Scale:
    """Map between the parameter and the unconstrained optimisation scale."""

    def __init__(self, family):
        self.family = family
        if family is CopulaFamily.GUMBEL:
            self.lo = np.log(GUMBEL_DELTA)  # theta == 1
        else:
            self.lo = -np.inf
        self.hi = np.inf

    def to_theta(self, z):
        if self.family is CopulaFamily.GAUSSIAN:
            return float(np.tanh(z))
        if self.family is CopulaFamily.GUMBEL:
            return max(1.0, 1.0 - GUMBEL_DELTA + float(np.exp(z)))
        return float(z)

    def to_z(self, theta):
        if self.family is CopulaFamily.GAUSSIAN:
            return float(np.arctanh(theta))
        if self.family is CopulaFamily.GUMBEL:
            return float(np.log(theta - 1.0 + GUMBEL_DELTA))
        return float(theta)

    def half_width(self, z):
        if self.family is CopulaFamily.FRANK:
            return max(1.0, 0.5 * abs(z))
        return 1.0


def _brent(neg, a, b, maxiter):
    res = optimize.minimize_scalar(
        neg, bounds=(a, b), method="bounded", options={"xatol": 1e-10, "maxiter": maxiter}
    )
    return float(res.x), float(res.fun), int(res.nfev), bool(res.success)


def _segments(family, a, b):
    # Frank is undefined at 0: optimise each side of the excluded window
    if family is CopulaFamily.FRANK and a < FRANK_WINDOW and b > -FRANK_WINDOW:
        segs = []
        if a < -FRANK_WINDOW:
            segs.append((a, -FRANK_WINDOW))
        if b > FRANK_WINDOW:
            segs.append((FRANK_WINDOW, b))
        return segs
    return [(a, b)]


def fit(family, U, *, min_rows: int = MIN_ROWS, tol: float = 1e-8, maxiter: int = 200,
        variance: bool = True) -> FitResult:
    """Maximise the pseudo log-likelihood of ``family`` over ``U``.

    Parameters
    ----------
    family : CopulaFamily or str
    U : array_like, shape (n, 2)
        Pseudo-observations, e.g. from :func:`parcopula.pseudo_obs.normalized_ranks`.
    min_rows : int
        Smallest accepted sample size.
    tol : float
        Convergence tolerance on the parameter.
    maxiter : int
        Cap on objective evaluations plus Newton refinement steps.
    variance : bool
        Whether to compute ``sigma2``; if false it is ``nan``.

    Returns
    -------
    FitResult
        ``converged`` is false, with a reason in ``message``, whenever the
        tolerance was not met or the variance could not be estimated.
    """
    family = CopulaFamily.parse(family)
    U = check_pseudo_sample(U, min_rows=min_rows)
    if np.ptp(U[:, 0]) == 0.0 or np.ptp(U[:, 1]) == 0.0:
        raise DegenerateSampleError("pseudo-sample has a constant column")
    n = U.shape[0]
    t0 = time.perf_counter()

    scale = _Scale(family)
    k = kernel(family, U[:, 0], U[:, 1])
    loglik = k.loglik

    def neg(z):
        ll = loglik(scale.to_theta(z))
        # a non-finite value is a numerical failure, never an optimum
        return -ll if np.isfinite(ll) else np.inf

    z0 = scale.to_z(_start_value(family, empirical_tau(U)))
    hw = scale.half_width(z0)
    a, b = max(scale.lo, z0 - hw), z0 + hw

    evals = 0
    ok = True
    z_best = None
    for _ in range(20):
        best = None
        for sa, sb in _segments(family, a, b):
            z, f, nfev, success = _brent(neg, sa, sb, maxiter)
            evals += nfev
            ok = ok and success
            if best is None or f < best[1]:
                best = (z, f, sa, sb)
        z_best, _, sa, sb = best
        span = b - a
        # optimum pinned to a bracket edge that is not a true domain limit
        at_lo = z_best - sa < 1e-6 * span and sa > scale.lo and sa != FRANK_WINDOW
        at_hi = sb - z_best < 1e-6 * span and sb != -FRANK_WINDOW
        if not (at_lo or at_hi) or evals > maxiter:
            break
        a, b = max(scale.lo, z_best - 2.0 * span), z_best + 2.0 * span
        if family is CopulaFamily.GAUSSIAN:
            a, b = max(a, -19.0), min(b, 19.0)

    theta = scale.to_theta(z_best)
    if family is CopulaFamily.FRANK and abs(theta) < FRANK_WINDOW:
        theta = FRANK_WINDOW if theta >= 0 else -FRANK_WINDOW

    # Newton refinement with the analytic derivatives
    steps = 0
    last_step = np.inf
    ll = loglik(theta)
    at_boundary = False
    while steps < 10 and evals + steps < maxiter:
        g = float(np.sum(k.score(theta)))
        h = float(np.sum(k.hess(theta)))
        if family is CopulaFamily.GUMBEL and theta == 1.0 and g <= 0.0:
            at_boundary = True
            break
        if not h < 0.0:
            break
        step = -g / h
        cand = theta + step
        try:
            cand = check_theta(family, cand)
        except CopulaDomainError:
            if family is CopulaFamily.GUMBEL and cand < 1.0:
                cand = 1.0
            else:
                break
        if family is CopulaFamily.FRANK and (abs(cand) < FRANK_WINDOW or cand * theta < 0):
            break
        ll_new = loglik(cand)
        steps += 1
        if ll_new < ll - 1e-9 * max(1.0, abs(ll)):
            break
        last_step = abs(cand - theta)
        theta, ll = cand, ll_new
        if last_step < tol:
            break

    iterations = evals + steps
    converged = ok and (last_step < tol or at_boundary) and iterations <= maxiter
    message = "" if converged else (
        f"tolerance {tol:g} not reached (last step {last_step:.3g}, {iterations} iterations)"
    )
    t1 = time.perf_counter()

    sigma2 = np.nan
    if variance:
        try:
            sigma2 = _variance(k, theta, U)
        except VarianceError as exc:
            converged = False
            message = f"variance failed: {exc}"
        else:
            if not (np.isfinite(sigma2) and sigma2 > 0.0):
                converged = False
                message = f"variance not positive and finite: {sigma2}"
    t2 = time.perf_counter()

    return FitResult(
        family=family,
        theta_hat=float(theta),
        sigma2=float(sigma2),
        n=n,
        loglik=float(ll),
        iterations=iterations,
        converged=bool(converged),
        message=message,
        fit_seconds=t1 - t0,
        variance_seconds=t2 - t1,
    )
