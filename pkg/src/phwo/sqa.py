"""Simulated quantum annealing: discrete-time path-integral Monte Carlo.

``N_tau`` replicas (Trotter slices) of the ``n`` classical spins sit on a
periodic imaginary-time ring.  At schedule point ``s`` the sampled action is
``Delta sum_tau f(w_tau) - J_perp sum_{i,tau} mu_{i,tau} mu_{i,tau+1}`` with
``Delta = beta B / N_tau`` and ``J_perp = -ln(tanh(A / 2)) / 2``, where
``A = 1 - s`` and ``B = s``.  Updates are Wolff clusters grown along
imaginary time only, so each accepted move flips a contiguous arc of one
spin's world line.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .problems import CostFunction, ParameterError, ground_set

__all__ = [
    "SQAConfig",
    "Couplings",
    "couplings",
    "PathConfiguration",
    "SQARunResult",
    "run_sqa",
    "run_sqa_ensemble",
]

_CHUNK_UNIFORMS = 1 << 20


@dataclass(frozen=True)
class SQAConfig:
    """Path-integral annealing parameters.

    ``s`` advances linearly from ``s_initial`` to ``s_final`` in steps of
    ``(s_final - s_initial) / (sweeps - 1)``.  ``j_cap`` bounds the
    imaginary-time coupling where ``A = 1 - s`` vanishes.
    """

    beta: float = 30.0
    n_tau: int = 64
    sweeps: int = 1000
    mode: str = "solver"
    seed: int = 0
    s_initial: float = 0.0
    s_final: float = 1.0
    j_cap: float = 30.0
    stop_at_ground: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.n_tau < 2:
            raise ParameterError(f"n_tau must be >= 2, got {self.n_tau}")
        if self.sweeps < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.mode not in ("annealer", "solver"):
            raise ParameterError(f"mode must be 'annealer' or 'solver', got {self.mode!r}")
        if not (0.0 <= self.s_initial <= self.s_final <= 1.0):
            raise ParameterError("need 0 <= s_initial <= s_final <= 1")
        if not self.j_cap > 0:
            raise ParameterError("j_cap must be positive")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def schedule(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.s_initial])
        return np.linspace(self.s_initial, self.s_final, self.sweeps)


@dataclass(frozen=True)
class Couplings:
    delta: float
    j_perp: float
    capped: bool = False  # J_perp hit the cap (always the case at s = 1)

    def __iter__(self):
        return iter((self.delta, self.j_perp))


def couplings(s: float, cfg: SQAConfig) -> Couplings:
    """Problem weight ``Delta = beta s / N_tau`` and imaginary-time coupling."""
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}")
    delta = cfg.beta * s / cfg.n_tau
    a = 1.0 - s
    if a <= 0.0:
        return Couplings(delta, cfg.j_cap, True)
    j = -0.5 * np.log(np.tanh(a / 2.0))
    if j >= cfg.j_cap:
        return Couplings(delta, cfg.j_cap, True)
    return Couplings(delta, float(j), False)


@dataclass
class PathConfiguration:
    """World lines as bits ``x[i, tau]``; spin values are ``mu = 1 - 2 x``."""

    bits: np.ndarray  # (n, n_tau) uint8
    weights: np.ndarray  # Hamming weight of each slice

    @classmethod
    def random(cls, n: int, n_tau: int, rng: np.random.Generator) -> "PathConfiguration":
        bits = rng.integers(0, 2, size=(n, n_tau), dtype=np.uint8)
        return cls(bits, bits.sum(axis=0).astype(np.int64))

    @property
    def spins(self) -> np.ndarray:
        return 1 - 2 * self.bits.astype(np.int8)

    def consistent(self) -> bool:
        return bool(np.array_equal(self.weights, self.bits.sum(axis=0)))


@dataclass(frozen=True)
class SQARunResult:
    best_w: int
    final_w: int
    success: bool
    spin_updates: int  # spins covered by attempted clusters
    sweeps: int
    mean_cluster_size: float
    first_hit: int | None = None
    trace: np.ndarray | None = None  # rows (sweep, s, min slice energy, mean cluster size)
    path: PathConfiguration | None = None


def run_sqa(cost: CostFunction, cfg: SQAConfig, keep_path: bool = False) -> SQARunResult:
    """One path-integral anneal from independent random slices.

    Each sweep visits every site ``i`` once: a seed slice is drawn
    uniformly, the cluster grows along the ring through parallel neighbours
    with probability ``1 - exp(-2 J_perp)`` per bond, and the whole arc is
    flipped with the Metropolis probability of
    ``Delta * sum_tau [f(w_tau after) - f(w_tau before)]``.
    """
    from ._sqa_kernel import sqa_chunk

    n, n_tau = cost.n, cfg.n_tau
    f = np.ascontiguousarray(cost.values)
    ground = np.zeros(n + 1, dtype=np.bool_)
    ground[list(ground_set(cost).weights)] = True
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    path = PathConfiguration.random(n, n_tau, rng)

    s_grid = cfg.schedule()
    cs = [couplings(float(s), cfg) for s in s_grid]
    deltas = np.array([c.delta for c in cs])
    add_probs = -np.expm1(-2.0 * np.array([c.j_perp for c in cs]))

    w_init = path.weights
    start_best = int(w_init[np.argmin(f[w_init])])
    best_w = np.array([start_best], dtype=np.int64)
    hit0 = bool(ground[w_init].any())
    state = np.array([0 if hit0 else -1, 0, 0], dtype=np.int64)
    trace = np.zeros((cfg.sweeps if cfg.record_trace else 0, 3))

    per_sweep = n * (n_tau + 3)
    chunk = max(1, _CHUNK_UNIFORMS // per_sweep)
    done = 0
    stopped = cfg.stop_at_ground and hit0
    while done < cfg.sweeps and not stopped:
        m = min(chunk, cfg.sweeps - done)
        uni = rng.random((m, n, n_tau + 3))
        ran = sqa_chunk(
            path.bits, path.weights, state, best_w, f, ground, deltas, add_probs,
            done, m, uni, cfg.stop_at_ground, trace,
        )
        done += ran
        stopped = cfg.stop_at_ground and state[0] >= 0

    final_w = int(path.weights[int(rng.integers(0, n_tau))])
    target = int(best_w[0]) if cfg.mode == "solver" else final_w
    clusters = int(state[2])
    out_trace = None
    if cfg.record_trace:
        out_trace = np.column_stack([trace[:done, 0], s_grid[:done], trace[:done, 1], trace[:done, 2]])
    return SQARunResult(
        best_w=int(best_w[0]),
        final_w=final_w,
        success=bool(ground[target]),
        spin_updates=int(state[1]),
        sweeps=done,
        mean_cluster_size=state[1] / clusters if clusters else 0.0,
        first_hit=None if state[0] < 0 else int(state[0]),
        trace=out_trace,
        path=path if keep_path else None,
    )


def run_sqa_ensemble(cost: CostFunction, cfg: SQAConfig, seeds) -> list[SQARunResult]:
    return [run_sqa(cost, replace(cfg, seed=int(s))) for s in seeds]
