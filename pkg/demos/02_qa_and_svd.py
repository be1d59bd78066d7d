"""
Quantum annealing against spin-vector dynamics on a plateau
===========================================================

On plateau(n, 0, 6) the semiclassical potential develops two wells whose
depths cross at s*.  A product state stays in the original well, while the
quantum state leaves the ground state early and returns to it later.
"""

import numpy as np

from phwo.problems import make_plateau
from phwo.qa import eigenpopulations, evolve, ground_prob
from phwo.spectral import min_gap
from phwo.svd import evolve_svd, find_degeneracy, svd_sector_prob

n = 128
cost = make_plateau(n, 0, 6)

deg = find_degeneracy(cost)
s_gap, gap = min_gap(cost)
print(f"wells level at s* = {deg.s_star:.5f}; minimum gap {gap:.3e} at s = {s_gap:.5f}")
print(f"global-minimum weight drops by {deg.hw_jump:.2f} across s*")

# ground probability for a few anneal times
for t_f in (5.0, 10.0, 20.0, 40.0):
    p_qa = ground_prob(evolve(cost, t_f).final, cost)
    p_svd = svd_sector_prob(evolve_svd(cost, t_f).final, cost)
    print(f"t_f = {t_f:5.1f}: QA p_GS = {p_qa:.4f}, SVD p_GS = {p_svd:.4f}")

# how much of the state sits in the lowest nine levels along the anneal
traj = evolve(cost, 10.0, sample_points=np.linspace(0.1, 1.0, 10))
for st in traj.states:
    print(f"s = {st.s:.1f}: population of lowest 9 levels = {eigenpopulations(st, cost, st.s, 9).sum():.4f}")
