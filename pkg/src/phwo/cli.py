"""Command line: build problems, run solvers, emit figure datasets.

Every subcommand writes its CSV files plus ``manifest.json`` to ``--out``
and prints a JSON summary on stdout.  Failures print a JSON error object on
stderr and exit nonzero (2 for invalid input, 1 for numerical failures).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .integrate import IntegrationError, IntegratorConfig
from .io import build_manifest, read_config, write_csv, write_json, write_manifest
from .problems import CostFunction, ParameterError, ground_set, load_cost_file, make_problem
from .spectral import SpectralError

__all__ = ["main", "build_parser", "FIGURES"]


class UsageError(ValueError):
    pass


# --- argument handling -------------------------------------------------------

# defaults applied after merging the config file, so that "flag given" and
# "flag left at default" can be told apart
DEFAULTS: dict[str, Any] = {
    "problem": "plateau",
    "n": 64,
    "l": 0,
    "u": 6,
    "cost_file": None,
    "solver": "qa",
    "tf": "10",
    "tf_grid": "1:100:100",
    "pd": 0.7,
    "beta_initial": 0.1,
    "beta_final": 20.0,
    "beta": 30.0,
    "ntau": 64,
    "sweeps": 100,
    "seeds": 100,
    "selection": "sequential",
    "mode": "solver",
    "points": 201,
    "k": 9,
    "s": None,
    "tol": 1e-10,
    "out": "phwo-out",
    "ns": None,
}

FLOAT_KEYS = {"pd", "beta_initial", "beta_final", "beta", "tol"}
INT_KEYS = {"n", "l", "u", "ntau", "sweeps", "seeds", "points", "k"}


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--problem", help="plain_hw | plateau | spike | convex | vandam | custom")
    g.add_argument("--n", help="number of spins")
    g.add_argument("--l", help="plateau lower edge (exclusive); 'n/4' allowed")
    g.add_argument("--u", help="plateau upper edge (exclusive); 'l+6' allowed")
    g.add_argument("--cost-file", dest="cost_file", help="custom 'w value' file (implies --problem custom)")
    g.add_argument("--ns", help="comma-separated sizes for scaling commands")
    s = p.add_argument_group("solvers")
    s.add_argument("--solver", help="qa | svd | sa | sqa, comma-separated where lists are accepted")
    s.add_argument("--tf", help="anneal time(s), comma-separated")
    s.add_argument("--tf-grid", dest="tf_grid", help="lo:hi[:per_decade] log grid of t_f (sweeps for sa/sqa)")
    s.add_argument("--pd", help="target success probability p_d")
    s.add_argument("--beta-initial", dest="beta_initial", help="SA initial inverse temperature")
    s.add_argument("--beta-final", dest="beta_final", help="SA final inverse temperature")
    s.add_argument("--beta", help="SQA inverse temperature")
    s.add_argument("--ntau", help="SQA Trotter slices")
    s.add_argument("--sweeps", help="Monte Carlo sweeps")
    s.add_argument("--seeds", help="number of seeds N (seeds 0..N-1) or a range a:b")
    s.add_argument("--selection", help="SA spin selection: random | sequential")
    s.add_argument("--mode", help="annealer | solver")
    s.add_argument("--tol", help="integrator rel/abs tolerance")
    o = p.add_argument_group("output")
    o.add_argument("--points", help="number of s sample points")
    o.add_argument("--k", help="number of eigenlevels")
    o.add_argument("--s", help="comma-separated s values")
    o.add_argument("--out", help="output directory")
    o.add_argument("--manifest", help="config file (key = value lines or JSON); flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phwo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"phwo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("spectrum", "lowest levels and gap profile of H(s)"),
        ("evolve-qa", "closed-system QA trajectory with eigenpopulations"),
        ("evolve-svd", "semiclassical spin-vector dynamics trajectory"),
        ("run-sa", "simulated annealing runs"),
        ("run-sqa", "simulated quantum annealing runs"),
        ("gibbs", "classical Gibbs Hamming weight along beta = 0.1 + 5.9 s"),
        ("potential", "semiclassical potential landscapes and double-well degeneracy"),
        ("tts", "optimal time-to-solution curves"),
        ("sweep", "optimal TTS across sizes with a scaling fit"),
    ]:
        _add_common(sub.add_parser(name, help=help_text))
    rep = sub.add_parser("reproduce", help="figure presets")
    rep.add_argument("figure", help=", ".join(sorted(FIGURES)))
    _add_common(rep)
    return parser


class Params(dict):
    """Merged parameters: attribute access plus typed getters."""

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key) from None

    def given(self, key) -> bool:
        return key in self.explicit

    explicit: set = set()


def _merge(ns: argparse.Namespace) -> Params:
    raw = {k: v for k, v in vars(ns).items() if k not in ("command", "figure", "manifest")}
    given = {k for k, v in raw.items() if v is not None}
    merged: dict[str, Any] = {}
    if ns.manifest:
        for key, value in read_config(ns.manifest).items():
            if key not in DEFAULTS:
                raise UsageError(f"unknown key {key!r} in {ns.manifest}")
            merged[key] = value
            given.add(key)
    for key, value in raw.items():
        if value is not None:
            merged[key] = value
    out = Params()
    for key, default in DEFAULTS.items():
        value = merged.get(key, default)
        if value is not None and key in INT_KEYS and key not in ("l", "u"):
            value = _to_int(key, value)
        if value is not None and key in FLOAT_KEYS:
            value = _to_float(key, value)
        out[key] = value
    out.explicit = given
    return out


def _to_int(key, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')} expects an integer, got {value!r}") from None


def _to_float(key, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')} expects a number, got {value!r}") from None


def _float_list(key, text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{key} expects comma-separated numbers, got {text!r}") from None


def _int_list(key, text) -> list[int]:
    try:
        return [int(v) for v in (text if isinstance(text, list) else str(text).split(",")) if str(v).strip()]
    except ValueError:
        raise UsageError(f"--{key} expects comma-separated integers, got {text!r}") from None


def _edge(expr, n: int, l: int | None = None) -> int:
    """Plateau edge: an integer or a small expression in ``n`` and ``l``."""
    if isinstance(expr, int):
        return expr
    text = str(expr).replace(" ", "")
    try:
        return int(text)
    except ValueError:
        pass
    allowed = set("0123456789nl+-*/()")
    if not set(text) <= allowed:
        raise UsageError(f"plateau edge {expr!r} must be an integer or use n, l, + - * /")
    value = eval(text, {"__builtins__": {}}, {"n": n, "l": l if l is not None else 0})  # noqa: S307
    return int(value)


def _cost(p: Params, n: int | None = None) -> CostFunction:
    n = p.n if n is None else n
    if p.cost_file:
        return load_cost_file(p.cost_file)
    if p.problem == "custom":
        raise UsageError("--problem custom needs --cost-file")
    l = _edge(p.l, n)
    u = _edge(p.u, n, l)
    return make_problem(p.problem, n, l, u)


def _seeds(p: Params) -> list[int]:
    raw = p.seeds
    if isinstance(raw, str) and ":" in raw:
        a, b = raw.split(":", 1)
        return list(range(int(a), int(b)))
    count = _to_int("seeds", raw)
    if count < 1:
        raise UsageError("--seeds must be at least 1")
    return list(range(count))


def _tf_grid(p: Params):
    from .benchmark import TfGrid

    parts = str(p.tf_grid).split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--tf-grid expects lo:hi[:per_decade], got {p.tf_grid!r}")
    lo, hi = float(parts[0]), float(parts[1])
    per = int(parts[2]) if len(parts) == 3 else 200
    return TfGrid(lo, hi, per)


def _integrator(p: Params) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=p.tol, abs_tol=p.tol)


def _solver_opts(p: Params):
    from .benchmark import SolverOptions
    from .sa import SAConfig
    from .sqa import SQAConfig

    seeds = _seeds(p)
    return SolverOptions(
        integrator=_integrator(p),
        sa=SAConfig(beta_initial=p.beta_initial, beta_final=p.beta_final, selection=p.selection, mode=p.mode),
        sqa=SQAConfig(beta=p.beta, n_tau=p.ntau, mode=p.mode),
        seeds=len(seeds),
        seed_offset=seeds[0],
    )


def _s_grid(p: Params) -> np.ndarray:
    if p.s:
        return np.array(_float_list("s", p.s))
    return np.linspace(0.0, 1.0, p.points)


class Run:
    """Collects outputs of one command and writes the manifest last."""

    def __init__(self, command: str, p: Params, out: Path | None = None, **notes):
        self.command = command
        # the output location is not part of the configuration hash
        self.params = {k: v for k, v in p.items() if k != "out"}
        self.out = Path(out or p.out)
        self.notes = notes
        self.files: list[str] = []
        self.manifest = build_manifest(command, self.params, **notes)
        self.hash = self.manifest["config_hash"]

    def csv(self, name: str, header, rows) -> None:
        write_csv(self.out / name, header, rows, self.hash)
        self.files.append(name)

    def json(self, name: str, data) -> None:
        write_json(self.out / name, {"manifest_sha256": self.hash, **data})
        self.files.append(name)

    def finish(self, summary: dict) -> dict:
        self.manifest["outputs"] = list(self.files)
        write_manifest(self.out / "manifest.json", self.manifest)
        return {"command": self.command, "out": str(self.out), "manifest_sha256": self.hash, **summary}


# --- subcommands -------------------------------------------------------------


def cmd_spectrum(p: Params, run: Run | None = None) -> dict:
    from .spectral import build, gap_profile, min_gap, reichardt_lower_bound, spectrum

    cost = _cost(p)
    run = run or Run("spectrum", p)
    grid = _s_grid(p)
    k = min(max(2, p.k), cost.n + 1)
    rows, gap_rows = [], []
    try:
        reichardt_lower_bound(cost, 0.5)
        bounded = True
    except ParameterError:
        bounded = False
    for s in grid:
        vals = spectrum(build(cost, float(s)), k).eigenvalues
        rows += [(s, i, v) for i, v in enumerate(vals)]
        bound = reichardt_lower_bound(cost, float(s)) if bounded else math.nan
        gap_rows.append((s, vals[1] - vals[0], bound))
    run.csv("spectrum.csv", ["s", "level", "eigenvalue"], rows)
    run.csv("gap.csv", ["s", "gap", "bound"], gap_rows)
    s_min, g_min = min_gap(cost)
    return run.finish({"min_gap": {"s": s_min, "gap": g_min}, "problem": cost.describe()})


def cmd_evolve_qa(p: Params, run: Run | None = None, t_f: float | None = None) -> dict:
    from . import qa

    cost = _cost(p)
    run = run or Run("evolve-qa", p)
    t_f = _float_list("tf", p.tf)[0] if t_f is None else t_f
    grid = _s_grid(p)
    k = min(p.k, cost.n + 1)
    traj = qa.evolve(cost, t_f, _integrator(p), sample_points=list(grid))
    rows = []
    for st in traj.states:
        pops = qa.eigenpopulations(st, cost, st.s, k)
        rows.append([st.s, qa.expected_hw(st), qa.ground_prob(st, cost), *pops])
    run.csv("trajectory.csv", ["s", "hw", "p_gs", *[f"P_{i}" for i in range(k)]], rows)
    final = traj.final
    return run.finish({
        "t_f": t_f,
        "p_gs": qa.ground_prob(final, cost),
        "max_norm_drift": traj.max_norm_drift,
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
    })


def cmd_evolve_svd(p: Params, run: Run | None = None, t_f: float | None = None) -> dict:
    from . import qa, svd

    cost = _cost(p)
    run = run or Run("evolve-svd", p)
    t_f = _float_list("tf", p.tf)[0] if t_f is None else t_f
    grid = _s_grid(p)
    traj = svd.evolve_svd(cost, t_f, _integrator(p), sample_points=list(grid))
    compare = cost.n <= 4096
    qa_traj = qa.evolve(cost, t_f, _integrator(p), sample_points=list(grid)) if compare else None
    rows = []
    for i, (s, ang) in enumerate(zip(traj.s, traj.angles)):
        row = [s, ang.theta, ang.phi, cost.n * ang.p, svd.svd_sector_prob(ang, cost)]
        if qa_traj is not None:
            st = qa_traj.states[i]
            row += [qa.expected_hw(st), svd.trace_distance_to_qa(ang, st)]
        rows.append(row)
    header = ["s", "theta", "phi", "hw", "sector_prob"]
    if qa_traj is not None:
        header += ["qa_hw", "trace_distance"]
    run.csv("trajectory.csv", header, rows)
    return run.finish({"t_f": t_f, "sector_prob": svd.svd_sector_prob(traj.final, cost)})


def _mc_aggregate(results, seeds) -> dict:
    from .benchmark import wilson_interval

    k = sum(r.success for r in results)
    lo, hi = wilson_interval(k, len(results))
    updates = [r.spin_updates for r in results]
    return {
        "seeds": [int(s) for s in seeds],
        "runs": len(results),
        "success_count": int(k),
        "success_rate": k / len(results),
        "wilson_95": [lo, hi],
        "spin_updates_total": int(sum(updates)),
        "spin_updates_mean": float(np.mean(updates)),
    }


def cmd_run_sa(p: Params, run: Run | None = None) -> dict:
    from .sa import SAConfig, run_sa

    cost = _cost(p)
    run = run or Run("run-sa", p)
    seeds = _seeds(p)
    base = SAConfig(beta_initial=p.beta_initial, beta_final=p.beta_final, sweeps=p.sweeps,
                    selection=p.selection, mode=p.mode)
    results = []
    for j, seed in enumerate(seeds):
        res = run_sa(cost, replace(base, seed=seed, record_trace=(j == 0)))
        if j == 0:
            run.csv("runlog.csv", ["sweep", "beta", "w", "best_w"],
                    [(int(r[0]), r[1], int(r[2]), int(r[3])) for r in res.trace])
        results.append(res)
    agg = _mc_aggregate(results, seeds)
    run.json("aggregate.json", agg)
    return run.finish({k: v for k, v in agg.items() if k != "seeds"})


def cmd_run_sqa(p: Params, run: Run | None = None) -> dict:
    from .sqa import SQAConfig, run_sqa

    cost = _cost(p)
    run = run or Run("run-sqa", p)
    seeds = _seeds(p)
    base = SQAConfig(beta=p.beta, n_tau=p.ntau, sweeps=p.sweeps, mode=p.mode)
    results = []
    for j, seed in enumerate(seeds):
        res = run_sqa(cost, replace(base, seed=seed, record_trace=(j == 0)))
        if j == 0:
            run.csv("runlog.csv", ["sweep", "s", "min_slice_energy", "mean_cluster_size"],
                    [(int(r[0]), r[1], r[2], r[3]) for r in res.trace])
        results.append(res)
    agg = _mc_aggregate(results, seeds)
    agg["mean_cluster_size"] = float(np.mean([r.mean_cluster_size for r in results]))
    run.json("aggregate.json", agg)
    return run.finish({k: v for k, v in agg.items() if k != "seeds"})


def _gibbs_rows(cost: CostFunction, grid) -> list:
    from .sa import gibbs_background, gibbs_expected_hw

    rows = []
    for s in grid:
        beta = 0.1 + 5.9 * float(s)
        hw = gibbs_expected_hw(cost, beta)
        bg = gibbs_background(cost.n, beta)
        rows.append((s, beta, hw, bg, hw - bg))
    return rows


def cmd_gibbs(p: Params, run: Run | None = None) -> dict:
    cost = _cost(p)
    run = run or Run("gibbs", p)
    rows = _gibbs_rows(cost, _s_grid(p))
    run.csv("gibbs.csv", ["s", "beta", "hw", "background", "signal"], rows)
    signal = np.array([r[4] for r in rows])
    i = int(np.argmax(np.abs(np.diff(signal)))) if len(rows) > 1 else 0
    return run.finish({"largest_signal_step_s": rows[i][0], "signal_range": [float(signal.min()), float(signal.max())]})


def cmd_potential(p: Params, run: Run | None = None) -> dict:
    from . import svd

    cost = _cost(p)
    run = run or Run("potential", p)
    deg = svd.find_degeneracy(cost)
    if p.s:
        s_values = _float_list("s", p.s)
    elif deg is not None:
        s_values = [max(0.0, deg.s_star - 0.05), deg.s_star, min(1.0, deg.s_star + 0.05)]
    else:
        s_values = [0.25, 0.5, 0.75]
    theta = np.linspace(0.0, np.pi, p.points)
    rows, minima = [], []
    for s in s_values:
        V = svd.landscape(cost, s, theta)
        rows += [(s, t, v) for t, v in zip(theta, V)]
        for m in svd.landscape_scan(cost, s):
            minima.append({"s": s, "theta": m.theta, "value": m.value, "hw": cost.n * m.p})
    run.csv("landscape.csv", ["s", "theta", "V"], rows)
    report = {"minima": minima}
    if deg is not None:
        report["degeneracy"] = {"s_star": deg.s_star, "hw_jump": deg.hw_jump,
                                "theta_left": deg.left.theta, "theta_right": deg.right.theta}
    run.json("minima.json", report)
    return run.finish({"s_star": None if deg is None else deg.s_star})


def _solvers(p: Params) -> list[str]:
    from .benchmark import SOLVERS

    names = [s.strip() for s in str(p.solver).split(",") if s.strip()]
    bad = [s for s in names if s not in SOLVERS]
    if bad:
        raise UsageError(f"unknown solver(s) {bad}; choose from {list(SOLVERS)}")
    return names


def _tts_summary(r) -> dict:
    return {"t_f_opt": r.t_f_opt, "tts_opt": r.tts_opt, "p_opt": r.p_opt, "control_opt": r.control_opt,
            "saturated": r.saturated, "solved": r.solved}


def cmd_tts(p: Params, run: Run | None = None) -> dict:
    from .benchmark import optimize_tts

    cost = _cost(p)
    run = run or Run("tts", p)
    opts = _solver_opts(p)
    rows, summary = [], {}
    for solver in _solvers(p):
        res = optimize_tts(cost, solver, p.pd, _tf_grid(p), opts)
        rows += [(solver, cost.n, t, pg, tt) for t, pg, tt in res.curve]
        summary[solver] = _tts_summary(res)
    run.csv("tts.csv", ["solver", "n", "t_f", "p_gs", "tts"], rows)
    run.json("summary.json", summary)
    return run.finish({"results": summary})


class _SweepItem:
    def __init__(self, p, opts, grid):
        self.p, self.opts, self.grid = p, opts, grid

    def __call__(self, item):
        from .benchmark import optimize_tts

        solver, n = item
        return optimize_tts(_cost(self.p, n), solver, self.p.pd, self.grid, self.opts, workers=1)


def cmd_sweep(p: Params, run: Run | None = None) -> dict:
    from .benchmark import map_ordered, scaling_fit

    if not p.ns:
        raise UsageError("sweep needs --ns (comma-separated sizes)")
    sizes = _int_list("ns", p.ns)
    run = run or Run("sweep", p)
    items = [(solver, n) for solver in _solvers(p) for n in sizes]
    results = map_ordered(_SweepItem(p, _solver_opts(p), _tf_grid(p)), items)
    rows, fits = [], {}
    for (solver, n), res in zip(items, results):
        rows.append((solver, n, res.t_f_opt, res.p_opt, res.tts_opt))
    for solver in _solvers(p):
        pts = [(n, r.tts_opt) for (sv, n), r in zip(items, results) if sv == solver and math.isfinite(r.tts_opt)]
        if len(pts) >= 4:
            fit = scaling_fit(*zip(*pts))
            fits[solver] = {"exponent": fit.exponent, "stderr": fit.stderr, "prefactor": fit.prefactor}
        else:
            fits[solver] = None
    run.csv("results.csv", ["solver", "n", "t_f", "p_gs", "tts"], rows)
    run.json("fit.json", {"fits": fits, "sizes": sizes})
    return run.finish({"fits": fits})


# --- figure presets ------------------------------------------------------------


def _preset(p: Params, **values) -> Params:
    """Apply preset values for keys the user did not set explicitly."""
    q = Params(p)
    q.explicit = p.explicit
    for key, value in values.items():
        if not p.given(key):
            q[key] = value
    return q


def fig1a(p: Params, run: Run) -> dict:
    from .qa import ground_state_hw
    from .svd import sc_ground_hw

    q = _preset(p, problem="plateau", n=512, l=0, u=6, points=201)
    cost = _cost(q)
    grid = _s_grid(q)
    gibbs = _gibbs_rows(cost, grid)
    rows = [(s, ground_state_hw(cost, float(s)), g[2], sc_ground_hw(cost, float(s))) for s, g in zip(grid, gibbs)]
    run.csv("fig1a.csv", ["s", "gs_hw", "gibbs_hw", "sc_gs_hw"], rows)
    return {"rows": len(rows)}


def fig1b(p: Params, run: Run) -> dict:
    from . import spectral, svd

    q = _preset(p, problem="plateau", n=512, l=0, u=6, points=1025)
    cost = _cost(q)
    deg = svd.find_degeneracy(cost)
    if deg is None:
        raise SpectralError("no double-well degeneracy found")
    theta = np.linspace(0.0, np.pi, q.points)
    rows = []
    for label, s in (("pre", deg.s_star - 0.05), ("degenerate", deg.s_star), ("post", deg.s_star + 0.05)):
        rows += [(label, s, t, v) for t, v in zip(theta, svd.landscape(cost, s, theta))]
    run.csv("fig1b.csv", ["curve", "s", "theta", "V"], rows)
    inset = []
    for n in _int_list("ns", q.ns or "64,128,256,512"):
        c = _cost(q, n)
        d = svd.find_degeneracy(c)
        s_gap, _ = spectral.min_gap(c)
        inset.append((n, d.s_star, s_gap, abs(d.s_star - s_gap)))
    run.csv("fig1b_inset.csv", ["n", "s_star", "s_min_gap", "difference"], inset)
    return {"s_star": deg.s_star, "hw_jump": deg.hw_jump}


def _qa_optimal_tf(q: Params, cost: CostFunction, lo=5.0, hi=30.0) -> float:
    from .benchmark import SolverOptions, TfGrid, optimize_tts

    res = optimize_tts(cost, "qa", q.pd, TfGrid(lo, hi, 100), SolverOptions(integrator=_integrator(q)))
    return res.control_opt


def fig2a(p: Params, run: Run) -> dict:
    from . import qa
    from .spectral import build, spectrum

    q = _preset(p, problem="plateau", n=512, l=0, u=6, points=201, k=9)
    cost = _cost(q)
    t_f = _float_list("tf", q.tf)[0] if q.given("tf") else _qa_optimal_tf(q, cost)
    grid = _s_grid(q)
    traj = qa.evolve(cost, t_f, _integrator(q), sample_points=list(grid))
    k = min(q.k, cost.n + 1)
    rows = [[st.s, *qa.eigenpopulations(st, cost, st.s, k)] for st in traj.states]
    run.csv("fig2a.csv", ["s", *[f"P_{i}" for i in range(k)]], rows)
    levels = min(k + 6, cost.n + 1)
    spec_rows = []
    for s in grid:
        vals = spectrum(build(cost, float(s)), levels).eigenvalues
        spec_rows += [(s, i, v) for i, v in enumerate(vals)]
    run.csv("fig2a_inset.csv", ["s", "level", "eigenvalue"], spec_rows)
    mid = traj.states[int(np.argmin(np.abs(grid - 0.5)))]
    return {"t_f": t_f, "low9_at_half": float(np.sum(qa.eigenpopulations(mid, cost, mid.s, min(9, cost.n + 1)))),
            "p_gs": qa.ground_prob(traj.final, cost)}


def fig2b(p: Params, run: Run) -> dict:
    q = _preset(p, problem="plateau", l=0, u=6, solver="qa,svd", ns="32,64,128,256,512", tf_grid="1:40:100")
    summary = cmd_sweep(q, run)
    sa_q = _preset(q, solver="sa", ns="16,24,32,48,64", tf_grid="2:400:20", seeds=200)
    sa_q["solver"], sa_q["ns"], sa_q["tf_grid"] = "sa", sa_q["ns"], sa_q["tf_grid"]
    sa_run = Run("reproduce-fig2b-sa", sa_q, out=run.out / "sa",
                 scaled_down="SA sizes reduced to n <= 64 and 200 seeds for desk-scale runtime")
    summary["sa"] = cmd_sweep(sa_q, sa_run)
    run.notes["scaled_down"] = "SA sub-run uses n <= 64 and 200 seeds; see sa/manifest.json"
    run.manifest["scaled_down"] = run.notes["scaled_down"]
    return summary


def fig2c(p: Params, run: Run) -> dict:
    q = _preset(p, problem="plateau", n=512, l=0, u=6, points=201)
    cost = _cost(q)
    t_f = _float_list("tf", q.tf)[0] if q.given("tf") else _qa_optimal_tf(q, cost)
    return cmd_evolve_svd(q, run, t_f=t_f)


def fig4(p: Params, run: Run) -> dict:
    q = _preset(p, problem="convex", n=512, solver="qa,svd", tf_grid="1:30:200")
    return cmd_tts(q, run)


def fig5(p: Params, run: Run) -> dict:
    from .benchmark import SolverOptions, scaling_fit, threshold_time
    from .sa import SAConfig
    from .spectral import adiabatic_time_estimate
    from .sqa import SQAConfig

    q = _preset(p, problem="plateau", l=0, u=6, seeds=100)
    rows = []
    qa_sizes = _int_list("ns", q.ns or "16,32,64,128,256")
    opts = SolverOptions(integrator=_integrator(q))
    for n in qa_sizes:
        r = threshold_time(_cost(q, n), "qa", 0.9, start=1.0, limit=1e4, opts=opts)
        rows.append(("qa", n, r.time, r.p_gs))
    for n in [64, 128, 256, 512, 1024, 2048]:
        rows.append(("adiabatic_condition", n, adiabatic_time_estimate(_cost(q, n)).time, math.nan))
    seeds = _seeds(q)
    mc_opts = SolverOptions(
        sa=SAConfig(beta_initial=q.beta_initial, beta_final=q.beta_final, selection="sequential"),
        sqa=SQAConfig(beta=q.beta, n_tau=q.ntau), seeds=len(seeds), seed_offset=seeds[0],
    )
    for n in [8, 12, 16]:
        r = threshold_time(_cost(q, n), "sa", 0.9, start=2, limit=2e5, opts=mc_opts)
        rows.append(("sa", n, r.cost_units, r.p_gs))
    for n in [8, 12, 16, 24, 32]:
        r = threshold_time(_cost(q, n), "sqa", 0.9, start=2, limit=1e4, opts=mc_opts)
        rows.append(("sqa", n, r.cost_units, r.p_gs))
    run.csv("fig5.csv", ["solver", "n", "time", "p_gs"], rows)
    fits = {}
    for solver in ("qa", "adiabatic_condition", "sa", "sqa"):
        pts = [(n, t) for sv, n, t, _ in rows if sv == solver and math.isfinite(t)]
        if len(pts) >= 4:
            fits[solver] = scaling_fit(*zip(*pts)).exponent
    run.manifest["scaled_down"] = "SA at n <= 16 and SQA at n <= 32 with 100 seeds for desk-scale runtime"
    return {"exponents": fits}


def fig6a(p: Params, run: Run) -> dict:
    q = _preset(p, problem="spike", solver="qa,svd", ns="16,32,64,128,256,512", tf_grid="1:40:100")
    return cmd_sweep(q, run)


def fig6b(p: Params, run: Run) -> dict:
    q = _preset(p, problem="spike", n=512, tf="9.85", points=201, k=9)
    return fig2a(q, run)


def fig7a(p: Params, run: Run) -> dict:
    from .problems import make_plain_hw

    q = _preset(p, problem="plateau", n=128, l=0, u=26, points=401)
    cost = _cost(q)
    plain = _gibbs_rows(make_plain_hw(cost.n), _s_grid(q))
    pert = _gibbs_rows(cost, _s_grid(q))
    run.csv("fig7a.csv", ["s", "beta", "plain_hw", "plateau_hw"],
            [(a[0], a[1], a[2], b[2]) for a, b in zip(plain, pert)])
    return {"rows": len(plain)}


def _signal_family(q: Params, run: Run, name: str, sizes) -> dict:
    rows = []
    for n in sizes:
        for r in _gibbs_rows(_cost(q, n), _s_grid(q)):
            rows.append((n, r[0], r[1], r[4]))
    run.csv(f"{name}.csv", ["n", "s", "beta", "signal"], rows)
    return {"sizes": list(sizes)}


def fig7b(p: Params, run: Run) -> dict:
    q = _preset(p, problem="plateau", l=0, u=26, points=401)
    return _signal_family(q, run, "fig7b", _int_list("ns", q.ns or "128,256,512,1024"))


def fig7c(p: Params, run: Run) -> dict:
    q = _preset(p, problem="plateau", l="n/4", u="l+26", points=401)
    return _signal_family(q, run, "fig7c", _int_list("ns", q.ns or "256,512,1024,2048,3200,4096"))


FIGURES: dict[str, Callable[[Params, Run], dict]] = {
    "fig1a": fig1a, "fig1b": fig1b, "fig2a": fig2a, "fig2b": fig2b, "fig2c": fig2c,
    "fig4": fig4, "fig5": fig5, "fig6a": fig6a, "fig6b": fig6b,
    "fig7a": fig7a, "fig7b": fig7b, "fig7c": fig7c,
}


def cmd_reproduce(p: Params, figure: str) -> dict:
    if figure not in FIGURES:
        raise UsageError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    out = Path(p.out) / figure
    run = Run(f"reproduce-{figure}", p, out=out, figure=figure)
    summary = FIGURES[figure](p, run)
    if "command" in summary:  # delegated to a subcommand that already finished the run
        return summary
    return run.finish(summary)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve-qa": cmd_evolve_qa,
    "evolve-svd": cmd_evolve_svd,
    "run-sa": cmd_run_sa,
    "run-sqa": cmd_run_sqa,
    "gibbs": cmd_gibbs,
    "potential": cmd_potential,
    "tts": cmd_tts,
    "sweep": cmd_sweep,
}


def _error(kind: str, exc: BaseException, code: int) -> int:
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        if exc.code not in (0, None):
            return _error("usage", ValueError("invalid command line; see usage above"), 2)
        return 0
    try:
        p = _merge(ns)
        if ns.command == "reproduce":
            summary = cmd_reproduce(p, ns.figure)
        else:
            summary = COMMANDS[ns.command](p)
    except (UsageError, ParameterError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _error(type(exc).__name__, exc, 2)
    except (SpectralError, IntegrationError, RuntimeError, ValueError) as exc:
        return _error(type(exc).__name__, exc, 1)
    print(json.dumps(summary, default=_json_default, indent=2, sort_keys=True))
    return 0


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


if __name__ == "__main__":
    sys.exit(main())
