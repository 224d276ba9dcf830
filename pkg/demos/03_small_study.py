"""
A small accuracy study
======================

Repeat the split/combine experiment over seeded replicates and summarise how
far the combined estimate and its density drift from the full-data fit.
"""

from parcopula import SimConfig, run_study

for M in (10, 50):
    cfg = SimConfig("gaussian", 0.3, N=20_000, M=M, S=10, base_seed=1)
    rep = run_study(cfg)
    print(f"M = {M:>2}: bias {rep.bias_hat:+.2e}  mse {rep.mse_hat:.2e}  "
          f"rel L1 {rep.rel_l1:.2e}  rel L2 {rep.rel_l2:.2e}  speedup {rep.speedup:.1f}")

# every replicate has its own seed, so any single one can be rerun in isolation
print("replicate 3:", rep.replicates[3].theta_full, rep.replicates[3].theta_combined)
