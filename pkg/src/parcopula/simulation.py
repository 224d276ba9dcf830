"""Monte Carlo comparison of split/combine estimates against full-data fits.

Each replicate draws one sample, fits it whole and in ``M`` blocks, and
records both estimates (a paired design). Replicate ``s`` of a cell is
seeded from ``SeedSequence([base_seed, family_code, N, M, s])`` so any
single replicate can be re-run in isolation.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from parcopula.copulas import CopulaFamily, CopulaModel, kernel, sample
from parcopula.mpl import fit
from parcopula.parallel import Scheme, default_workers, fit_parallel
from parcopula.pseudo_obs import normalized_ranks
from parcopula.quadrature import gauss_legendre_square

FAMILY_CODE = {CopulaFamily.GAUSSIAN: 1, CopulaFamily.FRANK: 2, CopulaFamily.GUMBEL: 3}

#: Parameters used in the reference study.
DEFAULT_THETA = {CopulaFamily.GAUSSIAN: 0.3, CopulaFamily.FRANK: 5.0, CopulaFamily.GUMBEL: 5.0}
DEFAULT_ROWS = (50_000, 100_000, 200_000)
DEFAULT_SUBSETS = (10, 20, 100)
DEFAULT_REPLICATES = 50

#: Relative change under node doubling above which a distance is flagged.
QUAD_CHANGE_FLAG = 0.10


class StudyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    family: CopulaFamily
    theta_true: float
    N: int
    M: int
    S: int = DEFAULT_REPLICATES
    quad_nodes: int = 200
    base_seed: int = 20160101
    workers: int = 1
    scheme: Scheme = Scheme.CONTIGUOUS

    def __post_init__(self):
        object.__setattr__(self, "family", CopulaFamily.parse(self.family))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        CopulaModel(self.family, self.theta_true)
        if self.M < 1 or self.N // self.M < 30:
            raise ValueError(f"N/M must be at least 30 (N={self.N}, M={self.M})")
        if self.S < 1:
            raise ValueError(f"need at least one replicate, got S={self.S}")
        if self.quad_nodes < 64:
            raise ValueError(f"quad_nodes must be >= 64, got {self.quad_nodes}")
        if not 0 <= self.base_seed < 2 ** 64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")

    def replicate_seed(self, s: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            [self.base_seed, FAMILY_CODE[self.family], self.N, self.M, s]
        )


@dataclass(frozen=True)
class ReplicateRow:
    s: int
    theta_full: float
    theta_combined: float
    sigma2_full: float
    blocks_used: int
    full_seconds: float
    full_fit_seconds: float
    mean_subset_seconds: float
    mean_subset_fit_seconds: float


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    theta_combined_sim: float
    theta_full_sim: float
    bias_hat: float
    mse_hat: float
    rel_l1: float
    rel_l2: float
    rel_l1_change: float
    rel_l2_change: float
    mean_subset_seconds: float
    mean_full_seconds: float
    replicates: list = field(default_factory=list)

    @property
    def quadrature_flagged(self) -> bool:
        """True if either distance moved more than 10% when nodes doubled."""
        return bool(self.rel_l1_change > QUAD_CHANGE_FLAG or self.rel_l2_change > QUAD_CHANGE_FLAG)

    @property
    def speedup(self) -> float:
        return self.mean_full_seconds / self.mean_subset_seconds


# --------------------------------------------------------------------------
# metrics


def est_bias(theta_combined, theta_full) -> float:
    """Mean of the combined estimates minus mean of the full-data estimates."""
    a = np.asarray(theta_combined, dtype=float)
    b = np.asarray(theta_full, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("need at least one replicate")
    return float(np.mean(a) - np.mean(b))


def est_mse(theta_combined, theta_full) -> float:
    """Mean squared paired difference between combined and full estimates."""
    a = np.asarray(theta_combined, dtype=float)
    b = np.asarray(theta_full, dtype=float)
    if a.size == 0 or a.shape != b.shape:
        raise ValueError("need equally many (>= 1) combined and full estimates")
    return float(np.mean((a - b) ** 2))


def _densities(family, theta_a, theta_b, quad_nodes):
    u, v, w = gauss_legendre_square(quad_nodes)
    k = kernel(family, u, v)
    ca = np.exp(k.logpdf(CopulaModel(family, theta_a).theta))
    cb = np.exp(k.logpdf(CopulaModel(family, theta_b).theta))
    return ca, cb, w


def rel_l1(family, theta_a: float, theta_b: float, quad_nodes: int = 200) -> float:
    """Relative L1 distance between two copula densities of one family.

    ``theta_a`` is the reference whose density norm is the denominator.
    """
    ca, cb, w = _densities(family, theta_a, theta_b, quad_nodes)
    return float(np.sum(w * np.abs(ca - cb)) / np.sum(w * np.abs(ca)))


def rel_l2(family, theta_a: float, theta_b: float, quad_nodes: int = 200) -> float:
    """Relative L2 distance; see :func:`rel_l1`."""
    ca, cb, w = _densities(family, theta_a, theta_b, quad_nodes)
    return float(np.sqrt(np.sum(w * (ca - cb) ** 2)) / np.sqrt(np.sum(w * ca ** 2)))


def node_doubling_change(distance, family, theta_a, theta_b, quad_nodes) -> float:
    """Relative change of ``distance`` when the nodes per axis are doubled."""
    d1 = distance(family, theta_a, theta_b, quad_nodes)
    d2 = distance(family, theta_a, theta_b, 2 * quad_nodes)
    if d1 == d2:
        return 0.0
    return float(abs(d2 - d1) / max(abs(d1), abs(d2)))


# --------------------------------------------------------------------------
# study


def run_replicate(cfg: SimConfig, s: int, executor=None) -> ReplicateRow:
    rng = np.random.default_rng(cfg.replicate_seed(s))
    X = sample(CopulaModel(cfg.family, cfg.theta_true), cfg.N, rng)

    t0 = time.perf_counter()
    full = fit(cfg.family, normalized_ranks(X))
    full_seconds = time.perf_counter() - t0
    if not full.converged:
        raise StudyError(f"replicate {s}: full-data fit failed: {full.message}")

    try:
        comb = fit_parallel(cfg.family, X, cfg.M, workers=cfg.workers, scheme=cfg.scheme,
                            executor=executor)
    except Exception as exc:
        raise StudyError(f"replicate {s}: split fit failed: {exc}") from exc

    return ReplicateRow(
        s=s,
        theta_full=full.theta_hat,
        theta_combined=comb.theta_combined,
        sigma2_full=full.sigma2,
        blocks_used=comb.blocks_used,
        full_seconds=full_seconds,
        full_fit_seconds=full.fit_seconds,
        mean_subset_seconds=float(np.mean(comb.wall_clock_per_block)),
        mean_subset_fit_seconds=float(np.mean([r.fit_seconds for r in comb.per_block])),
    )


def summarize(cfg: SimConfig, rows) -> SimReport:
    rows = list(rows)
    comb = np.array([r.theta_combined for r in rows])
    full = np.array([r.theta_full for r in rows])
    theta_c, theta_f = float(np.mean(comb)), float(np.mean(full))
    args = (cfg.family, theta_f, theta_c, cfg.quad_nodes)
    return SimReport(
        config=cfg,
        theta_combined_sim=theta_c,
        theta_full_sim=theta_f,
        bias_hat=est_bias(comb, full),
        mse_hat=est_mse(comb, full),
        rel_l1=rel_l1(*args),
        rel_l2=rel_l2(*args),
        rel_l1_change=node_doubling_change(rel_l1, *args),
        rel_l2_change=node_doubling_change(rel_l2, *args),
        # every block has the same size, so the mean of per-replicate block
        # means is the mean over all blocks and replicates
        mean_subset_seconds=float(np.mean([r.mean_subset_seconds for r in rows])),
        mean_full_seconds=float(np.mean([r.full_seconds for r in rows])),
        replicates=rows,
    )


def run_study(cfg: SimConfig, executor=None, progress=None) -> SimReport:
    """Run all ``cfg.S`` replicates of one (family, N, M) cell.

    The full-data fit always runs in the calling process; block fits use
    ``executor`` if given, otherwise a pool of ``cfg.workers`` processes.
    ``progress``, if given, is called with each finished :class:`ReplicateRow`.
    """
    own = None
    if executor is None and cfg.workers > 1 and cfg.M > 1:
        executor = own = ProcessPoolExecutor(max_workers=cfg.workers)
    try:
        rows = []
        for s in range(1, cfg.S + 1):
            row = run_replicate(cfg, s, executor)
            rows.append(row)
            if progress is not None:
                progress(row)
    finally:
        if own is not None:
            own.shutdown()
    return summarize(cfg, rows)


def run_grid(family, theta=None, rows=DEFAULT_ROWS, subsets=DEFAULT_SUBSETS,
             S=DEFAULT_REPLICATES, base_seed=20160101, workers=None, quad_nodes=200,
             scheme=Scheme.CONTIGUOUS, progress=None) -> list:
    """Run :func:`run_study` for every ``(N, M)`` pair, sharing one process pool."""
    family = CopulaFamily.parse(family)
    theta = DEFAULT_THETA[family] if theta is None else theta
    workers = default_workers() if workers is None else workers
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        reports = []
        for N in rows:
            for M in subsets:
                cfg = SimConfig(family, theta, N, M, S, quad_nodes, base_seed, workers, scheme)
                reports.append(run_study(cfg, executor=pool, progress=progress))
        return reports
    finally:
        if pool is not None:
            pool.shutdown()


def timing_table(reports) -> list:
    """One row per (family, N): mean per-subset seconds for each M, plus full-data seconds.

    Full-data time is averaged over every cell sharing the family and N.
    """
    cells = {}
    for rep in reports:
        c = rep.config
        cells.setdefault((c.family, c.N), []).append(rep)
    order = {f: i for i, f in enumerate(CopulaFamily)}
    rows = []
    for (family, N) in sorted(cells, key=lambda k: (order[k[0]], k[1])):
        reps = sorted(cells[(family, N)], key=lambda r: r.config.M)
        row = {"family": family.value, "N": N}
        for r in reps:
            row[f"subset_s_M{r.config.M}"] = r.mean_subset_seconds
        row["full_s"] = float(np.mean([r.mean_full_seconds for r in reps]))
        rows.append(row)
    return rows
