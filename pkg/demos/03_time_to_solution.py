"""
Time-to-solution for the perturbed convex problem
=================================================

The ground probability oscillates with t_f, so the optimal anneal time is
located on a log grid and then refined.  Above the peak height the
optimum sits just before a peak of p_GS.
"""

from phwo.benchmark import SolverOptions, TfGrid, optimize_tts
from phwo.integrate import IntegratorConfig
from phwo.problems import make_convex_perturbed

cost = make_convex_perturbed(128)
opts = SolverOptions(integrator=IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10))

for p_d in (0.7, 0.99):
    for solver in ("qa", "svd"):
        res = optimize_tts(cost, solver, p_d, TfGrid(1, 100, 60), opts)
        print(f"p_d = {p_d}: {solver.upper():3s} t_f_opt = {res.t_f_opt:8.4f}  p = {res.p_opt:.4f}  "
              f"TTS = {res.tts_opt:8.3f}  saturated = {res.saturated}")
