"""
Per-block cost against full-data cost
=====================================

Each fit costs a fixed overhead plus a term growing like n log n. The ratio
of full-data time to per-block time therefore grows with M only until the
overhead dominates the small blocks.
"""

import time

import numpy as np

from parcopula import CopulaModel, fit, normalized_ranks, sample

N = 200_000
X = sample(CopulaModel("gaussian", 0.3), N, np.random.default_rng(3))


def timed(block, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fit("gaussian", normalized_ranks(block))
        best = min(best, time.perf_counter() - t0)
    return best


full = timed(X)
print(f"full data ({N} rows): {1e3 * full:.1f} ms")
for M in (10, 100, 1000):
    sub = timed(X[: N // M], repeat=20)
    print(f"M = {M:>4}: block of {N // M:>6} rows {1e3 * sub:7.2f} ms   ratio {full / sub:6.1f}")
