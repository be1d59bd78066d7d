"""
Simulated annealing and the plateau random walk
===============================================

Crossing a plateau of width u - l - 1 takes a number of single-spin updates
that grows as n^(u-l-1).  The closed form for the hitting time matches a
direct linear solve and an SA threshold measurement.
"""

from phwo.benchmark import SolverOptions, threshold_time, scaling_fit
from phwo.problems import make_plateau
from phwo.sa import SAConfig, absorbing_chain_time, plateau_chain, stefanov_plateau_time

sizes = [64, 128, 256, 512, 1024]
for u in (2, 3, 4):
    closed = [stefanov_plateau_time(n, 0, u) for n in sizes]
    solved = [absorbing_chain_time(*plateau_chain(n, 0, u)) for n in sizes]
    worst = max(abs(a / b - 1) for a, b in zip(closed, solved))
    print(f"u = {u}: exponent {scaling_fit(sizes, closed).exponent:.3f}, closed form vs solve {worst:.1e}")

opts = SolverOptions(sa=SAConfig(beta_initial=0.1, beta_final=20.0), seeds=200)
small = [16, 32, 64, 128]
times = [threshold_time(make_plateau(n, 0, 3), "sa", 0.9, start=2, opts=opts).cost_units for n in small]
print("SA updates to reach p_GS = 0.9 on plateau(n, 0, 3):", [int(t) for t in times])
print(f"fitted exponent {scaling_fit(small, times).exponent:.3f} (walk law predicts 2)")
