"""
How biased is geometric resampling?
===================================

The first-reoccurrence index, truncated at M, estimates 1/p. Its mean is
(1 - (1-p)^M) / p, so the reward increment is shrunk by 1 - (1-p)^M.
Rarely covered targets are underestimated most, and raising M helps them.
"""
import numpy as np

from guard_sim.checks import bench_gr

rows = bench_gr(ps=(0.05, 0.1, 0.5, 0.9), ms=(3, 8, 15), rewards=(1.0,), rounds=50_000)
for r in rows:
    print(f"p={r.p:<5} M={r.m_trunc:<3} increment {r.mean_increment:.4f}"
          f"  predicted {r.expected_increment:.4f}  (z={r.z_increment:+.2f})")

# the shrink factor by itself
p = np.array([0.05, 0.1, 0.5])
for m in (3, 8, 15):
    print(m, np.round(1 - (1 - p) ** m, 3))
