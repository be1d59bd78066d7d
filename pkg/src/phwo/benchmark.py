"""Time-to-solution, threshold times and scaling fits across solvers.

Time units follow the solver: the anneal time ``t_f`` for the closed-system
dynamics (``qa``, ``svd``) and single-spin updates for the Monte Carlo
solvers (``sa``, ``sqa``), whose control parameter is the sweep count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .integrate import IntegratorConfig
from .problems import CostFunction, ParameterError
from .sa import SAConfig, run_sa_ensemble
from .sqa import SQAConfig, run_sqa_ensemble

__all__ = [
    "tts",
    "wilson_interval",
    "TfGrid",
    "SolverOptions",
    "Evaluation",
    "TTSResult",
    "evaluate",
    "optimize_tts",
    "ThresholdResult",
    "threshold_time",
    "ScalingFit",
    "scaling_fit",
    "worker_count",
    "map_ordered",
]

SOLVERS = ("qa", "svd", "sa", "sqa")
MONTE_CARLO = ("sa", "sqa")


def tts(t_f: float, p_gs: float, p_d: float = 0.7) -> float:
    """``t_f * max(1, ln(1 - p_d) / ln(1 - p_gs))``; infinite when ``p_gs = 0``."""
    if not 0.0 < p_d < 1.0:
        raise ParameterError(f"p_d must lie in (0, 1), got {p_d}")
    if not 0.0 <= p_gs <= 1.0:
        raise ParameterError(f"p_gs must lie in [0, 1], got {p_gs}")
    if p_gs >= p_d:
        return float(t_f)
    if p_gs <= 0.0:
        return math.inf
    return float(t_f) * math.log1p(-p_d) / math.log1p(-p_gs)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def worker_count() -> int:
    """Pool size from ``PHWO_THREADS`` (default 1)."""
    raw = os.environ.get("PHWO_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"PHWO_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def map_ordered(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a process pool; order is kept."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class TfGrid:
    """Log-spaced scan followed by golden-section refinement on ``log t``.

    For Monte Carlo solvers the bounds are sweep counts and grid points are
    rounded to distinct integers.
    """

    lo: float = 0.1
    hi: float = 1000.0
    per_decade: int = 200
    rel_tol: float = 1e-3
    max_refine: int = 60

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ParameterError(f"grid needs 0 < lo < hi, got {self.lo}, {self.hi}")
        if self.per_decade < 1:
            raise ParameterError("per_decade must be >= 1")

    def points(self, integer: bool = False) -> np.ndarray:
        count = max(2, int(round(self.per_decade * math.log10(self.hi / self.lo))) + 1)
        pts = np.geomspace(self.lo, self.hi, count)
        if integer:
            pts = np.unique(np.maximum(1, np.round(pts)).astype(np.int64))
        return pts


@dataclass(frozen=True)
class SolverOptions:
    integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10)
    )
    sa: SAConfig = field(default_factory=lambda: SAConfig(selection="sequential"))
    sqa: SQAConfig = field(default_factory=SQAConfig)
    seeds: int = 1000
    seed_offset: int = 0
    confidence: float = 0.95


@dataclass(frozen=True)
class Evaluation:
    """One solver run at control value ``t`` (anneal time or sweeps)."""

    t: float
    cost_units: float  # t_f, or mean single-spin updates per run
    p_gs: float
    ci: tuple[float, float] | None = None


def evaluate(cost: CostFunction, solver: str, t: float, opts: SolverOptions | None = None) -> Evaluation:
    """Ground-state probability of ``solver`` at control value ``t``."""
    opts = opts or SolverOptions()
    if solver == "qa":
        from .qa import final_ground_prob

        return Evaluation(float(t), float(t), final_ground_prob(cost, float(t), opts.integrator))
    if solver == "svd":
        from .svd import final_sector_prob

        return Evaluation(float(t), float(t), final_sector_prob(cost, float(t), opts.integrator))
    if solver not in MONTE_CARLO:
        raise ParameterError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    sweeps = int(t)
    if sweeps < 1:
        raise ParameterError(f"Monte Carlo solvers need at least one sweep, got {t}")
    seeds = range(opts.seed_offset, opts.seed_offset + opts.seeds)
    if solver == "sa":
        runs = run_sa_ensemble(cost, replace(opts.sa, sweeps=sweeps), seeds)
    else:
        runs = run_sqa_ensemble(cost, replace(opts.sqa, sweeps=sweeps), seeds)
    k = sum(r.success for r in runs)
    units = float(np.mean([r.spin_updates for r in runs]))
    return Evaluation(float(sweeps), units, k / len(runs), wilson_interval(k, len(runs), opts.confidence))


class _Evaluator:
    # picklable closure for the process pool
    def __init__(self, cost, solver, opts):
        self.cost, self.solver, self.opts = cost, solver, opts

    def __call__(self, t):
        return evaluate(self.cost, self.solver, t, self.opts)


@dataclass(frozen=True)
class TTSResult:
    solver: str
    t_f_opt: float  # in cost units: anneal time or single-spin updates
    tts_opt: float
    p_d: float
    p_opt: float
    control_opt: float  # t_f or sweeps at the optimum
    curve: list[tuple[float, float, float]]  # (cost units, p_gs, tts), sorted
    evaluations: list[Evaluation] = field(repr=False, default_factory=list)
    solved: bool = True

    rel_tol: float = 1e-3

    @property
    def saturated(self) -> bool:
        """A single run reaches ``p_d`` at the optimum, so ``TTS_opt = t_f_opt``.

        When the optimum sits on the ``p_gs = p_d`` crossing the refinement
        may stop just short of it; the equality is judged to ``rel_tol``.
        """
        return self.solved and self.tts_opt <= self.t_f_opt * (1.0 + self.rel_tol)


def _golden_log(fn, a: float, b: float, rel_tol: float, max_iter: int, integer: bool):
    # golden-section minimisation of fn(exp(x)) on [log a, log b]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x0, x1 = math.log(a), math.log(b)
    stop = math.log1p(rel_tol)

    def point(x):
        t = math.exp(x)
        return max(1, int(round(t))) if integer else t

    c = x1 - invphi * (x1 - x0)
    d = x0 + invphi * (x1 - x0)
    fc, fd = fn(point(c)), fn(point(d))
    for _ in range(max_iter):
        if x1 - x0 < stop:
            break
        if integer and point(x1) - point(x0) <= 1:
            break
        if fc <= fd:
            x1, d, fd = d, c, fc
            c = x1 - invphi * (x1 - x0)
            fc = fn(point(c))
        else:
            x0, c, fc = c, d, fd
            d = x0 + invphi * (x1 - x0)
            fd = fn(point(d))


def optimize_tts(
    cost: CostFunction,
    solver: str,
    p_d: float = 0.7,
    grid: TfGrid | None = None,
    opts: SolverOptions | None = None,
    workers: int | None = None,
    prune: bool = True,
) -> TTSResult:
    """Minimise ``TTS(t_f)`` over a dense log grid, then refine locally.

    ``p_gs(t_f)`` oscillates, so the global minimiser is located on the grid
    and only then polished by golden-section search on ``log t_f`` between
    its neighbours.  The returned optimum is the best of every evaluation
    made, grid and refinement alike.  Since ``TTS >= t_f``, the ascending
    scan stops once ``t_f`` exceeds the best TTS found (``prune``).  For ``sa``/``sqa`` the probability is
    the success fraction over ``opts.seeds`` seeds with a Wilson interval.
    """
    if solver not in SOLVERS:
        raise ParameterError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    tts(1.0, 0.5, p_d)  # validates p_d
    grid = grid or TfGrid()
    opts = opts or SolverOptions()
    integer = solver in MONTE_CARLO
    pts = grid.points(integer)
    fn = _Evaluator(cost, solver, opts)
    evals: dict[float, Evaluation] = {}

    def tts_of(ev: Evaluation) -> float:
        return tts(ev.cost_units, ev.p_gs, p_d)

    # TTS >= t_f, so grid points past the best TTS so far cannot win
    # points are kept in scan order exactly as a serial scan would, so the
    # result does not depend on the batch (worker) size
    batch = max(1, worker_count() if workers is None else workers)
    best_so_far = math.inf
    done = False
    for start in range(0, len(pts), batch):
        chunk = [t for t in pts[start : start + batch]]
        for t, ev in zip(chunk, map_ordered(fn, chunk, workers)):
            evals[float(t)] = ev
            if prune and ev.cost_units > best_so_far:
                # kept as the right bracket end for the refinement below
                done = True
                break
            best_so_far = min(best_so_far, tts_of(ev))
        if done:
            break

    def probe(t):
        key = float(t)
        if key not in evals:
            evals[key] = fn(t)
        return tts_of(evals[key])

    order = sorted(evals)
    values = [tts_of(evals[t]) for t in order]
    i = int(np.argmin(values))
    if math.isinf(values[i]):
        return TTSResult(solver, math.inf, math.inf, p_d, 0.0, math.nan,
                         _curve(evals, tts_of), list(evals.values()), solved=False)
    a = order[max(i - 1, 0)]
    b = order[min(i + 1, len(order) - 1)]
    if b > a:
        _golden_log(probe, a, b, grid.rel_tol, grid.max_refine, integer)
    best_t = min(evals, key=lambda t: (tts_of(evals[t]), t))
    best = evals[best_t]
    return TTSResult(
        solver=solver,
        t_f_opt=best.cost_units,
        tts_opt=tts_of(best),
        p_d=p_d,
        p_opt=best.p_gs,
        control_opt=best.t,
        curve=_curve(evals, tts_of),
        evaluations=[evals[t] for t in sorted(evals)],
        rel_tol=grid.rel_tol,
    )


def _curve(evals, tts_of):
    return [(evals[t].cost_units, evals[t].p_gs, tts_of(evals[t])) for t in sorted(evals)]


@dataclass(frozen=True)
class ThresholdResult:
    time: float  # control value (t_f or sweeps); inf if never reached
    cost_units: float
    p_gs: float
    left: float  # largest evaluated control value known to fail
    p_left: float
    reached: bool
    best_p: float
    evaluations: list[Evaluation] = field(repr=False, default_factory=list)


def threshold_time(
    cost: CostFunction,
    solver: str,
    p_thc: float = 0.9,
    start: float = 1.0,
    limit: float = 1e4,
    growth: float = 2.0,
    rel_tol: float = 1e-3,
    opts: SolverOptions | None = None,
) -> ThresholdResult:
    """Smallest control value whose ground probability reaches ``p_thc``.

    The raw ``p_gs`` is not monotone, so the search runs on the envelope
    ``max_{t' <= t} p_gs(t')``: expand geometrically from ``start`` until
    the envelope crosses, then bisect between the last failing and first
    passing points (on the log axis; to unit resolution for sweep counts).
    """
    if not 0.0 < p_thc < 1.0:
        raise ParameterError(f"p_thc must lie in (0, 1), got {p_thc}")
    if solver not in SOLVERS:
        raise ParameterError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    opts = opts or SolverOptions()
    integer = solver in MONTE_CARLO
    record: list[Evaluation] = []

    def run(t):
        ev = evaluate(cost, solver, t, opts)
        record.append(ev)
        return ev

    t = max(1, int(start)) if integer else float(start)
    lo_ev = None
    ev = run(t)
    while ev.p_gs < p_thc:
        lo_ev = ev
        if t >= limit:
            best = max(record, key=lambda e: e.p_gs)
            return ThresholdResult(math.inf, math.inf, ev.p_gs, t, ev.p_gs, False, best.p_gs, record)
        nxt = min(t * growth, limit)
        t = max(t + 1, int(round(nxt))) if integer else nxt
        ev = run(t)
    hi_ev = ev
    if lo_ev is None:
        return ThresholdResult(hi_ev.t, hi_ev.cost_units, hi_ev.p_gs, 0.0, 0.0, True, hi_ev.p_gs, record)
    while True:
        lo, hi = lo_ev.t, hi_ev.t
        if integer:
            if hi - lo <= 1:
                break
            mid = (int(lo) + int(hi)) // 2
        else:
            if hi / lo - 1.0 <= rel_tol:
                break
            mid = math.sqrt(lo * hi)
        mid_ev = run(mid)
        if mid_ev.p_gs >= p_thc:
            hi_ev = mid_ev
        else:
            lo_ev = mid_ev
    best = max(record, key=lambda e: e.p_gs)
    return ThresholdResult(hi_ev.t, hi_ev.cost_units, hi_ev.p_gs, lo_ev.t, lo_ev.p_gs, True, best.p_gs, record)


@dataclass(frozen=True)
class ScalingFit:
    sizes: list[float]
    times: list[float]
    exponent: float
    stderr: float
    prefactor: float


def scaling_fit(sizes, times) -> ScalingFit:
    """Least-squares power law ``times ~ C sizes^exponent`` on log-log axes."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(times, dtype=float)
    if x.shape != y.shape or x.size < 4:
        raise ParameterError("scaling fit needs at least 4 (size, time) pairs")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ParameterError("scaling fit needs strictly positive finite values")
    res = stats.linregress(np.log(x), np.log(y))
    return ScalingFit(list(x), list(y), float(res.slope), float(res.stderr), float(np.exp(res.intercept)))
