r"""Gaussian, Frank and Gumbel bivariate copulas.

Every function takes a :class:`CopulaModel` and array-like coordinates ``u``
and ``v`` that broadcast against each other; 0-d inputs give scalar outputs.

Closed-form densities and derivatives
-------------------------------------
Write :math:`\ell = \log c(u, v; \theta)`. The derivations are collected in
``docs/derivations.md``; the results implemented here are:

Gaussian, with :math:`x = \Phi^{-1}(u)`, :math:`y = \Phi^{-1}(v)`,
:math:`S = x^2 + y^2`, :math:`\rho = \theta`:

.. math::
    \ell &= -\tfrac12\log(1-\rho^2) - \frac{\rho^2 S - 2\rho xy}{2(1-\rho^2)} \\
    \partial_\rho \ell &= \frac{\rho}{1-\rho^2}
        + \frac{xy(1+\rho^2) - \rho S}{(1-\rho^2)^2} \\
    \partial^2_\rho \ell &= \frac{1+\rho^2}{(1-\rho^2)^2}
        + \frac{2\rho(3+\rho^2)xy - (1+3\rho^2) S}{(1-\rho^2)^3}

Frank (:math:`\theta > 0`; negative parameters use
:math:`c_\theta(u, v) = c_{-\theta}(1-u, v)`), with :math:`E=e^{-\theta}`,
:math:`A=e^{-\theta u}`, :math:`B=e^{-\theta v}`, :math:`T=(E-1)+(A-1)(B-1)`:

.. math::
    \ell &= \log\theta + \log(1-E) - \theta(u+v) - 2\log(-T) \\
    \partial_\theta \ell &= \frac1\theta + \frac{1}{e^\theta-1} - (u+v)
        - 2\frac{T'}{T}

Gumbel, with :math:`x=-\log u`, :math:`y=-\log v`,
:math:`w=(x^\theta+y^\theta)^{1/\theta}`:

.. math::
    \ell = -w + (\theta-1)(\log x + \log y) + x + y + (1-2\theta)\log w
        + \log(w+\theta-1)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import expit, ndtr, ndtri

from parcopula._bvn import bvn_cdf
from parcopula.quadrature import gauss_legendre_square

#: Coordinates are clamped to ``[EPS, 1 - EPS]`` before evaluation.
EPS = 1e-12
#: Log-densities are clipped to ``[-LOGPDF_CLIP, LOGPDF_CLIP]``.
LOGPDF_CLIP = 700.0

_SQRT_2PI = np.sqrt(2.0 * np.pi)


class CopulaDomainError(ValueError):
    """Parameter or coordinates outside the copula's domain."""


class TauRangeError(CopulaDomainError):
    """Kendall's tau not attainable by the requested family."""


class CopulaFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    FRANK = "frank"
    GUMBEL = "gumbel"

    @classmethod
    def parse(cls, value: "CopulaFamily | str") -> "CopulaFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown copula family {value!r} (expected one of {names})") from None

    def __str__(self) -> str:
        return self.value


def check_theta(family: CopulaFamily, theta: float) -> float:
    """Validate ``theta`` for ``family`` and return it as a float."""
    theta = float(theta)
    if not np.isfinite(theta):
        raise CopulaDomainError(f"{family} parameter must be finite, got {theta}")
    if family is CopulaFamily.GAUSSIAN and not -1.0 < theta < 1.0:
        raise CopulaDomainError(f"gaussian parameter must lie in (-1, 1), got {theta}")
    if family is CopulaFamily.FRANK and theta == 0.0:
        raise CopulaDomainError("frank parameter must be non-zero")
    if family is CopulaFamily.GUMBEL and theta < 1.0:
        raise CopulaDomainError(f"gumbel parameter must be >= 1, got {theta}")
    return theta


@dataclass(frozen=True)
class CopulaModel:
    """A copula family together with its dependence parameter."""

    family: CopulaFamily
    theta: float

    def __post_init__(self):
        family = CopulaFamily.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "theta", check_theta(family, self.theta))

    def cdf(self, u, v):
        return cdf(self, u, v)

    def pdf(self, u, v):
        return pdf(self, u, v)

    def log_pdf(self, u, v):
        return log_pdf(self, u, v)

    def sample(self, n, rng=None):
        return sample(self, n, rng)

    def kendall_tau(self):
        return kendall_tau(self)

    def spearman_rho(self):
        return spearman_rho(self)


# --------------------------------------------------------------------------
# argument handling


def _open_unit(u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    bad = ~((u > 0.0) & (u < 1.0) & (v > 0.0) & (v < 1.0))
    if bad.any():
        raise CopulaDomainError("coordinates must lie strictly inside (0, 1)")
    return np.clip(u, EPS, 1.0 - EPS), np.clip(v, EPS, 1.0 - EPS)


def _scalar(x):
    return x[()] if isinstance(x, np.ndarray) else x


# --------------------------------------------------------------------------
# family kernels
#
# A kernel pre-transforms a fixed set of coordinates once, so that repeated
# evaluation at different parameters (as in likelihood maximisation) only
# pays for the parameter-dependent work.


class _GaussianKernel:
    def __init__(self, u, v):
        self.x = ndtri(u)
        self.y = ndtri(v)
        self.S = self.x * self.x + self.y * self.y
        self.P = self.x * self.y
        self._sums = None

    def logpdf(self, r):
        q = 1.0 - r * r
        return -0.5 * np.log(q) - (r * r * self.S - 2.0 * r * self.P) / (2.0 * q)

    def loglik(self, r):
        # the log-density is linear in S and P
        if self._sums is None:
            self._sums = (self.S.size, float(np.sum(self.S)), float(np.sum(self.P)))
        n, S, P = self._sums
        q = 1.0 - r * r
        return -0.5 * n * np.log(q) - (r * r * S - 2.0 * r * P) / (2.0 * q)

    def score(self, r):
        q = 1.0 - r * r
        return r / q + (self.P * (1.0 + r * r) - r * self.S) / (q * q)

    def hess(self, r):
        q = 1.0 - r * r
        return (1.0 + r * r) / (q * q) + (
            2.0 * r * (3.0 + r * r) * self.P - (1.0 + 3.0 * r * r) * self.S
        ) / (q * q * q)

    def cross(self, r, j):
        # d/du = (1 / phi(x)) d/dx
        x, y = (self.x, self.y) if j == 1 else (self.y, self.x)
        q = 1.0 - r * r
        return (y * (1.0 + r * r) - 2.0 * r * x) / (q * q) * _SQRT_2PI * np.exp(0.5 * x * x)


class _FrankKernel:
    """Frank copula; negative parameters use c(u, v; t) = c(1 - u, v; -t)."""

    def __init__(self, u, v):
        self.u = u
        self.v = v
        self._ref = None

    def _oriented(self, t):
        if t > 0:
            return t, self.u, self.v
        if self._ref is None:
            self._ref = 1.0 - self.u
        return -t, self._ref, self.v

    @staticmethod
    def _terms(t, u, v):
        # R = -T = A + B - AB - E with A = e^{-tu}, B = e^{-tv}, E = e^{-t},
        # written as A(1-B) + B(1-e^{-t(1-v)}) so no large terms cancel.
        # Everything is scaled by e^{t min(u, v)}; only ratios and log R are used.
        m = np.minimum(u, v)
        A = np.exp(-t * (u - m))
        B = np.exp(-t * (v - m))
        E = np.exp(-t * (1.0 - m))
        AB = np.exp(-t * (u + v - m))
        qa = -np.expm1(-t * u)  # 1 - e^{-tu}
        qb = -np.expm1(-t * v)
        R = A * qb - B * np.expm1(-t * (1.0 - v))
        R1 = -u * A * qb - v * B * qa + E
        return m, A, B, E, AB, qa, qb, R, R1

    def logpdf(self, t):
        t, u, v = self._oriented(t)
        m, *_, R, _ = self._terms(t, u, v)
        return np.log(t) + np.log(-np.expm1(-t)) - t * (u + v) - 2.0 * (np.log(R) - t * m)

    def loglik(self, t):
        return float(np.sum(self.logpdf(t)))

    def score(self, t):
        sign = 1.0 if t > 0 else -1.0
        t, u, v = self._oriented(t)
        *_, R, R1 = self._terms(t, u, v)
        return sign * (1.0 / t + 1.0 / np.expm1(t) - (u + v) - 2.0 * R1 / R)

    def hess(self, t):
        t, u, v = self._oriented(t)
        _, A, B, E, AB, qa, qb, R, R1 = self._terms(t, u, v)
        R2 = u * u * A * qb + v * v * B * qa - 2.0 * u * v * AB - E
        r1 = R1 / R
        return -1.0 / (t * t) - 0.25 / np.sinh(0.5 * t) ** 2 - 2.0 * (R2 / R - r1 * r1)

    def cross(self, t, j):
        # under reflection the u-derivative keeps its sign, the v-derivative flips
        sign = 1.0 if (t > 0 or j == 1) else -1.0
        t, u, v = self._oriented(t)
        if j == 2:
            u, v = v, u
        _, A, _, _, AB, _, qb, R, R1 = self._terms(t, u, v)
        R_u = -t * A * qb
        R1_u = -A * qb + t * u * A * qb - t * v * AB
        return sign * (-1.0 - 2.0 * (R1_u * R - R1 * R_u) / (R * R))


class _GumbelKernel:
    """Gumbel copula in terms of x = -log u, y = -log v.

    ``x**t + y**t`` is never formed directly; everything goes through its
    logarithm and the weight ``p = x**t / (x**t + y**t)``.
    """

    def __init__(self, u, v):
        self.u = u
        self.v = v
        self.x = -np.log(u)
        self.y = -np.log(v)
        self.lx = np.log(self.x)
        self.ly = np.log(self.y)
        self.dl = self.lx - self.ly
        self.base = self.x + self.y
        self.lsum = self.lx + self.ly

    def _parts(self, t):
        p = expit(t * self.dl)
        L = np.logaddexp(t * self.lx, t * self.ly) / t  # log w
        w = np.exp(L)
        tau1 = self.ly + p * self.dl
        dL = (tau1 - L) / t
        return p, L, w, tau1, dL, w * dL, w + t - 1.0

    def logpdf(self, t):
        L = np.logaddexp(t * self.lx, t * self.ly) / t
        w = np.exp(L)
        return -w + (t - 1.0) * self.lsum + self.base + (1.0 - 2.0 * t) * L + np.log(w + t - 1.0)

    def loglik(self, t):
        return float(np.sum(self.logpdf(t)))

    def score(self, t):
        _, L, _, _, dL, dw, D = self._parts(t)
        return -dw + self.lsum - 2.0 * L + (1.0 - 2.0 * t) * dL + (dw + 1.0) / D

    def hess(self, t):
        p, L, w, tau1, dL, dw, D = self._parts(t)
        tau2 = self.ly ** 2 + p * (self.lx ** 2 - self.ly ** 2)
        d2L = (-2.0 * dL + tau2 - tau1 ** 2) / t
        d2w = w * (d2L + dL ** 2)
        return -d2w - 4.0 * dL + (1.0 - 2.0 * t) * d2L + d2w / D - ((dw + 1.0) / D) ** 2

    def cross(self, t, j):
        p, L, w, tau1, dL, dw, D = self._parts(t)
        if j == 1:
            x, lx, u = self.x, self.lx, self.u
        else:
            x, lx, u, p = self.y, self.ly, self.v, 1.0 - p
        L_x = p / x
        w_x = w * L_x
        dL_x = p * (lx - tau1) / x
        dw_x = w_x * dL + w * dL_x
        score_x = (
            -dw_x + 1.0 / x - 2.0 * L_x + (1.0 - 2.0 * t) * dL_x
            + dw_x / D - (dw + 1.0) * w_x / D ** 2
        )
        return -score_x / u  # dx/du = -1/u


_KERNELS = {
    CopulaFamily.GAUSSIAN: _GaussianKernel,
    CopulaFamily.FRANK: _FrankKernel,
    CopulaFamily.GUMBEL: _GumbelKernel,
}


def kernel(family, u, v):
    """Prepared evaluator of log-density terms on fixed interior coordinates.

    The returned object has ``logpdf(theta)``, ``loglik(theta)``,
    ``score(theta)``, ``hess(theta)`` and ``cross(theta, j)``; parameters are
    not validated, callers pass values already inside the domain.
    """
    family = CopulaFamily.parse(family)
    u, v = _open_unit(u, v)
    return _KERNELS[family](u, v)


# --------------------------------------------------------------------------
# public evaluation


def _frank_cdf_pos(t, u, v):
    a = np.expm1(-t * u)
    b = np.expm1(-t * v)
    return -np.log1p(a * b / np.expm1(-t)) / t


def _gumbel_cdf(t, u, v):
    lx = np.log(-np.log(u))
    ly = np.log(-np.log(v))
    return np.exp(-np.exp(np.logaddexp(t * lx, t * ly) / t))


def cdf(model: CopulaModel, u, v):
    """Copula distribution function on the closed unit square."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if not ((u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (v <= 1.0)).all():
        raise CopulaDomainError("coordinates must lie in [0, 1]")
    edge_zero = (u == 0.0) | (v == 0.0)
    edge_u = v == 1.0
    edge_v = u == 1.0
    uc = np.clip(u, EPS, 1.0 - EPS)
    vc = np.clip(v, EPS, 1.0 - EPS)

    fam, t = model.family, model.theta
    if fam is CopulaFamily.GAUSSIAN:
        out = bvn_cdf(ndtri(uc), ndtri(vc), t)
    elif fam is CopulaFamily.FRANK:
        if t > 0:
            out = _frank_cdf_pos(t, uc, vc)
        else:
            out = uc - _frank_cdf_pos(-t, uc, 1.0 - vc)
    else:
        out = _gumbel_cdf(t, uc, vc)

    out = np.clip(out, np.maximum(u + v - 1.0, 0.0), np.minimum(u, v))
    out = np.where(edge_v, v, out)
    out = np.where(edge_u, u, out)
    out = np.where(edge_zero, 0.0, out)
    return _scalar(out)


def log_pdf(model: CopulaModel, u, v):
    """Log-density, clipped to ``+/-LOGPDF_CLIP``."""
    out = kernel(model.family, u, v).logpdf(model.theta)
    return _scalar(np.clip(out, -LOGPDF_CLIP, LOGPDF_CLIP))


def pdf(model: CopulaModel, u, v):
    return _scalar(np.exp(log_pdf(model, u, v)))


def score_theta(model: CopulaModel, u, v):
    """Derivative of the log-density with respect to the parameter."""
    return _scalar(kernel(model.family, u, v).score(model.theta))


def hess_theta(model: CopulaModel, u, v):
    """Second derivative of the log-density with respect to the parameter."""
    return _scalar(kernel(model.family, u, v).hess(model.theta))


def cross_score(model: CopulaModel, u, v, j: int):
    """Mixed derivative of the log-density in the parameter and margin ``j``.

    ``j`` is 1 for ``u`` and 2 for ``v``.
    """
    if j not in (1, 2):
        raise ValueError(f"margin index must be 1 or 2, got {j}")
    return _scalar(kernel(model.family, u, v).cross(model.theta, j))


# --------------------------------------------------------------------------
# sampling


def _positive_stable(alpha, size, rng):
    """Chambers-Mallows-Stuck draw with Laplace transform ``exp(-s**alpha)``.

    Totally skewed (beta = 1) case written with the angle shifted to
    ``(0, pi)``, which is Kanter's representation.
    """
    U = rng.uniform(0.0, np.pi, size)
    W = rng.exponential(1.0, size)
    return (
        np.sin(alpha * U) / np.sin(U) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * U) / W) ** ((1.0 - alpha) / alpha)
    )


def sample(model: CopulaModel, n: int, rng=None) -> np.ndarray:
    """Draw ``n`` i.i.d. pairs; returns an ``(n, 2)`` array.

    ``rng`` is a :class:`numpy.random.Generator` or anything accepted by
    :func:`numpy.random.default_rng`.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    rng = np.random.default_rng(rng)
    fam, t = model.family, model.theta

    if fam is CopulaFamily.GAUSSIAN:
        z = rng.standard_normal((n, 2))
        y = t * z[:, 0] + np.sqrt(1.0 - t * t) * z[:, 1]
        return np.column_stack([ndtr(z[:, 0]), ndtr(y)])

    if fam is CopulaFamily.FRANK:
        a = abs(t)
        u = rng.uniform(size=n)
        p = rng.uniform(size=n)
        # inverse of the conditional distribution of v given u
        z = p * np.expm1(-a) / (p + (1.0 - p) * np.exp(-a * u))
        v = -np.log1p(z) / a
        if t < 0:
            u = 1.0 - u
        return np.column_stack([u, v])

    # Gumbel: Marshall-Olkin with a positive stable frailty
    if t == 1.0:
        return rng.uniform(size=(n, 2))
    alpha = 1.0 / t
    V = _positive_stable(alpha, n, rng)
    E = rng.exponential(1.0, (n, 2))
    return np.exp(-((E / V[:, None]) ** alpha))


# --------------------------------------------------------------------------
# dependence measures


def debye(x: float, k: int = 1) -> float:
    r"""Debye function :math:`D_k(x) = \frac{k}{x^k}\int_0^x \frac{t^k}{e^t-1}dt`."""
    x = float(x)
    if x == 0.0:
        return 1.0

    def f(t):
        return t ** k / np.expm1(t) if t != 0.0 else (1.0 if k == 1 else 0.0)

    val, _ = integrate.quad(f, 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    return k * val / x ** k


def kendall_tau(model: CopulaModel) -> float:
    """Population Kendall's tau."""
    fam, t = model.family, model.theta
    if fam is CopulaFamily.GAUSSIAN:
        return float(2.0 / np.pi * np.arcsin(t))
    if fam is CopulaFamily.GUMBEL:
        return 1.0 - 1.0 / t
    return 1.0 - 4.0 / t * (1.0 - debye(t, 1))


def spearman_rho(model: CopulaModel, nodes: int = 256) -> float:
    """Population Spearman's rho.

    Closed form for the Gaussian family; ``12 * int C - 3`` by tensor
    Gauss-Legendre quadrature with ``nodes`` points per axis otherwise.
    """
    if model.family is CopulaFamily.GAUSSIAN:
        return float(6.0 / np.pi * np.arcsin(model.theta / 2.0))
    u, v, w = gauss_legendre_square(nodes)
    return float(12.0 * np.sum(w * cdf(model, u, v)) - 3.0)


def inverse_tau(family: CopulaFamily | str, tau: float) -> float:
    """Parameter whose population Kendall's tau equals ``tau``."""
    family = CopulaFamily.parse(family)
    tau = float(tau)
    if not -1.0 < tau < 1.0:
        raise TauRangeError(f"tau must lie in (-1, 1), got {tau}")
    if family is CopulaFamily.GAUSSIAN:
        return float(np.sin(np.pi * tau / 2.0))
    if family is CopulaFamily.GUMBEL:
        if tau < 0.0:
            raise TauRangeError(f"gumbel cannot attain negative tau {tau}")
        return 1.0 / (1.0 - tau)
    if tau == 0.0:
        raise TauRangeError("frank cannot attain tau = 0 (parameter would be 0)")

    def gap(t):
        return kendall_tau(CopulaModel(family, t)) - tau

    # tau(theta) is odd and increasing; bracket on the matching side
    sign = 1.0 if tau > 0 else -1.0
    lo, hi = 1e-8, 1.0
    while gap(sign * hi) * sign < 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise TauRangeError(f"tau {tau} out of numerically attainable range")
    if gap(sign * lo) * sign > 0.0:
        raise TauRangeError(f"frank tau {tau} too close to 0")
    a, b = sorted((sign * lo, sign * hi))
    return optimize.brentq(gap, a, b, xtol=1e-14, rtol=1e-15, maxiter=500)
