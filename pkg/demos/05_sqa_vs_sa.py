"""
Path-integral Monte Carlo against simulated annealing
=====================================================

At an equal budget of single-spin updates, SQA with world-line cluster
moves clears the plateau far more often than SA.
"""

import numpy as np

from phwo.problems import make_plateau
from phwo.sa import SAConfig, run_sa_ensemble
from phwo.sqa import SQAConfig, run_sqa_ensemble

seeds = range(100)
for n in (16, 32, 64):
    cost = make_plateau(n, 0, 6)
    runs = run_sqa_ensemble(cost, SQAConfig(sweeps=100), seeds)
    budget = np.mean([r.spin_updates for r in runs])
    sa = run_sa_ensemble(cost, SAConfig(beta_initial=0.1, beta_final=20.0, sweeps=int(budget // n)), seeds)
    print(f"n = {n:2d}, {budget:8.0f} updates: SQA success {np.mean([r.success for r in runs]):.2f}, "
          f"SA success {np.mean([r.success for r in sa]):.2f}")
