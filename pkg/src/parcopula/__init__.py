"""Bivariate copula estimation by maximum pseudo-likelihood, whole or in independent blocks."""

__version__ = "0.1.0"

from parcopula.copulas import (  # noqa: E402
    CopulaDomainError,
    CopulaFamily,
    CopulaModel,
    TauRangeError,
    cdf,
    cross_score,
    hess_theta,
    inverse_tau,
    kendall_tau,
    log_pdf,
    pdf,
    sample,
    score_theta,
    spearman_rho,
)
from parcopula.mpl import FitResult, asymptotic_variance, fit, pseudo_loglik  # noqa: E402
from parcopula.parallel import (  # noqa: E402
    CombinedResult,
    Scheme,
    combine,
    fit_parallel,
    partition,
)
from parcopula.pseudo_obs import DataError, normalized_ranks  # noqa: E402
from parcopula.simulation import SimConfig, SimReport, run_study  # noqa: E402

__all__ = [
    "CombinedResult", "CopulaDomainError", "CopulaFamily", "CopulaModel", "DataError",
    "FitResult", "Scheme", "SimConfig", "SimReport", "TauRangeError", "asymptotic_variance",
    "cdf", "combine", "cross_score", "fit", "fit_parallel", "hess_theta", "inverse_tau",
    "kendall_tau", "log_pdf", "normalized_ranks", "partition", "pdf", "pseudo_loglik",
    "run_study", "sample", "score_theta", "spearman_rho",
]
