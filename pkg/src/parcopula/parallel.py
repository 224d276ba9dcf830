"""Communication-free split/fit/combine estimation.

The data matrix is cut into disjoint row blocks. Each block is ranked and
fitted on its own, with no information from any other block, and the block
estimates are merged by inverse-variance weighting.

Ranks are computed *within* each block. A block is treated as a complete
data set, which is what lets blocks live on different machines; the price is
that block estimates differ slightly from what global ranks would give.
"""

from __future__ import annotations

import enum
import os
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from parcopula.copulas import CopulaFamily
from parcopula.mpl import MIN_ROWS, FitResult, fit
from parcopula.pseudo_obs import check_data, normalized_ranks


class PartitionError(ValueError):
    """Requested partition would leave a block below the row floor."""


class CombineError(RuntimeError):
    """No block produced a usable estimate."""


class Scheme(str, enum.Enum):
    CONTIGUOUS = "contiguous"
    STRIDED = "strided"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Partition:
    """Disjoint row blocks covering a data matrix.

    ``indices[m]`` holds the row numbers (into the original matrix) of block
    ``m``; ``blocks[m]`` is the corresponding sub-matrix.
    """

    blocks: list
    indices: list
    scheme: Scheme

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class CombinedResult:
    theta_combined: float
    per_block: list
    weights: list
    wall_clock_per_block: list
    blocks_used: int
    excluded: list = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.per_block)


def partition(X, M: int, scheme=Scheme.CONTIGUOUS, min_rows: int = MIN_ROWS) -> Partition:
    """Split the rows of ``X`` into ``M`` disjoint blocks.

    Contiguous blocks hold ``N // M`` consecutive rows each, with the
    remainder appended to the last block. Strided blocks take row ``i`` into
    block ``i % M``.
    """
    X = check_data(X, min_rows=1)
    scheme = Scheme(scheme)
    M = int(M)
    N = X.shape[0]
    if M < 1:
        raise PartitionError(f"number of blocks must be >= 1, got {M}")
    if N // M < min_rows:
        raise PartitionError(
            f"{N} rows in {M} blocks leaves {N // M} rows per block (minimum {min_rows})"
        )
    if scheme is Scheme.CONTIGUOUS:
        size = N // M
        bounds = [m * size for m in range(M)] + [N]
        indices = [np.arange(bounds[m], bounds[m + 1]) for m in range(M)]
    else:
        indices = [np.arange(m, N, M) for m in range(M)]
    return Partition(blocks=[X[idx] for idx in indices], indices=indices, scheme=scheme)


def combine(results) -> CombinedResult:
    """Inverse-variance weighted mean of converged block estimates.

    Blocks that did not converge, or whose variance is not positive and
    finite, are left out and listed in ``excluded``.
    """
    results = list(results)
    if not results:
        raise CombineError("no block results to combine")
    families = {r.family for r in results}
    if len(families) > 1:
        raise ValueError(f"cannot combine estimates from different families: {families}")

    used = [
        i for i, r in enumerate(results)
        if r.converged and np.isfinite(r.sigma2) and r.sigma2 > 0.0
    ]
    if not used:
        raise CombineError("no block converged")
    theta = np.array([results[i].theta_hat for i in used])
    w = 1.0 / np.array([results[i].sigma2 for i in used])
    # scale by the largest weight: avoids overflow for tiny variances and
    # makes equal weights exactly 1, so the plain mean is reproduced
    r = w / w.max()
    theta_c = float(np.sum(r * theta) / np.sum(r))
    # rounding can push the mean a hair outside the hull of its inputs
    theta_c = min(max(theta_c, float(theta.min())), float(theta.max()))
    weights = [float("nan")] * len(results)
    for i, wi in zip(used, w):
        weights[i] = float(wi)
    return CombinedResult(
        theta_combined=theta_c,
        per_block=results,
        weights=weights,
        wall_clock_per_block=[float("nan")] * len(results),
        blocks_used=len(used),
        excluded=[i for i in range(len(results)) if i not in set(used)],
    )


def fit_block(family, block, min_rows: int = MIN_ROWS):
    """Rank and fit one block on its own; returns ``(FitResult | None, seconds, error)``."""
    t0 = time.perf_counter()
    try:
        res = fit(family, normalized_ranks(block), min_rows=min_rows)
        err = "" if res.converged else res.message
    except (ValueError, ArithmeticError) as exc:
        res, err = None, f"{type(exc).__name__}: {exc}"
    return res, time.perf_counter() - t0, err


def _fit_block_task(args):
    return fit_block(*args)


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def fit_parallel(family, X, M: int, workers: int | None = None, scheme=Scheme.CONTIGUOUS,
                 executor: Executor | None = None, min_rows: int = MIN_ROWS) -> CombinedResult:
    """Split ``X`` into ``M`` blocks, fit each independently and combine.

    Parameters
    ----------
    family : CopulaFamily or str
    X : array_like, shape (N, 2)
        Raw data; any continuous margins.
    M : int
        Number of blocks.
    workers : int, optional
        Size of the process pool; defaults to the number of CPUs. With one
        worker the blocks are fitted in the calling process.
    scheme : Scheme
        Row-to-block assignment.
    executor : concurrent.futures.Executor, optional
        Reuse an existing pool instead of starting one; ``workers`` is then
        ignored.

    Notes
    -----
    Results are gathered positionally, so the output does not depend on the
    pool size or on the order in which blocks finish.
    """
    family = CopulaFamily.parse(family)
    part = partition(X, M, scheme, min_rows=min_rows)
    tasks = [(family, b, min_rows) for b in part.blocks]
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    if executor is not None:
        outcomes = list(executor.map(_fit_block_task, tasks))
    elif workers == 1 or len(tasks) == 1:
        outcomes = [fit_block(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            outcomes = list(pool.map(_fit_block_task, tasks))

    results = []
    for m, (res, _, err) in enumerate(outcomes):
        if res is None:
            # keep a placeholder so block positions stay aligned
            n = part.blocks[m].shape[0]
            res = FitResult(family, float("nan"), float("nan"), n, float("nan"), 0, False, err)
        results.append(res)
    try:
        combined = combine(results)
    except CombineError as exc:
        msgs = "; ".join(f"block {m}: {err}" for m, (_, _, err) in enumerate(outcomes) if err)
        raise CombineError(f"{exc} ({msgs})") from None
    return CombinedResult(
        theta_combined=combined.theta_combined,
        per_block=combined.per_block,
        weights=combined.weights,
        wall_clock_per_block=[sec for _, sec, _ in outcomes],
        blocks_used=combined.blocks_used,
        excluded=combined.excluded,
    )
