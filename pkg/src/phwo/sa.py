"""Simulated annealing on Hamming-weight costs, plus its analytic hitting times.

The simulator keeps an explicit bit string so that sequential spin selection
is reproduced faithfully; energy changes are still O(1) through the running
Hamming weight.  The analytic half covers the birth-death chain picture of
Metropolis dynamics: the closed-form plateau traversal time, a direct
linear-solve oracle for any tridiagonal absorbing chain, and the fixed
temperature plain Hamming-weight hitting time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import logsumexp

from .problems import CostFunction, ParameterError, ground_set, log_binomial

__all__ = [
    "SAConfig",
    "SARunResult",
    "run_sa",
    "run_sa_ensemble",
    "stefanov_plateau_time",
    "absorbing_chain_time",
    "plateau_chain",
    "plain_hw_chain",
    "plain_hw_hitting_time",
    "simulate_chain",
    "gibbs_expected_hw",
    "gibbs_background",
    "gibbs_signal",
    "gibbs_distribution",
]

_CHUNK_UPDATES = 1 << 16


@dataclass(frozen=True)
class SAConfig:
    """Linear inverse-temperature schedule and update rules for :func:`run_sa`.

    ``stop_at_ground`` ends the run at the first visit to the ground set,
    which is how first-hitting times are measured; the default runs every
    sweep as the schedule prescribes.
    """

    beta_initial: float = 0.1
    beta_final: float = 20.0
    sweeps: int = 100
    selection: str = "random"
    mode: str = "solver"
    seed: int = 0
    stop_at_ground: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if not (self.beta_final >= self.beta_initial >= 0):
            raise ParameterError(
                f"need beta_final >= beta_initial >= 0, got {self.beta_initial}, {self.beta_final}"
            )
        if self.sweeps < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.selection not in ("random", "sequential"):
            raise ParameterError(f"selection must be 'random' or 'sequential', got {self.selection!r}")
        if self.mode not in ("annealer", "solver"):
            raise ParameterError(f"mode must be 'annealer' or 'solver', got {self.mode!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def delta_beta(self) -> float:
        if self.sweeps == 1:
            return 0.0
        return (self.beta_final - self.beta_initial) / (self.sweeps - 1)


@dataclass(frozen=True)
class SARunResult:
    best_w: int
    final_w: int
    success: bool
    spin_updates: int
    first_hit: int | None = None  # updates until the ground set was first entered
    initial_w: int = 0
    trace: np.ndarray | None = None  # rows (sweep, beta, w, best_w)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def run_sa(cost: CostFunction, cfg: SAConfig) -> SARunResult:
    """One Metropolis anneal from a uniformly random bit string.

    Each update proposes flipping one spin (chosen uniformly at random, or
    in index order for sequential selection) and accepts with
    ``min(1, exp(-beta dE))``.  Beta is advanced by ``cfg.delta_beta`` after
    every sweep of ``n`` updates.
    """
    from ._sa_kernel import sa_chunk

    n = cost.n
    f = np.ascontiguousarray(cost.values)
    ground = np.zeros(n + 1, dtype=np.bool_)
    ground[list(ground_set(cost).weights)] = True
    rng = _rng(cfg.seed)
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    w0 = int(bits.sum())
    state = np.array([w0, w0, 0 if ground[w0] else -1, 0], dtype=np.int64)
    trace = np.zeros((cfg.sweeps if cfg.record_trace else 0, 3))
    random_sel = cfg.selection == "random"
    chunk = max(1, _CHUNK_UPDATES // n)
    done = 0
    stopped = cfg.stop_at_ground and state[2] == 0
    while done < cfg.sweeps and not stopped:
        m = min(chunk, cfg.sweeps - done)
        if random_sel:
            sel = rng.integers(0, n, size=(m, n))
        else:
            sel = np.zeros((1, 1), dtype=np.int64)
        acc = rng.random((m, n))
        ran = sa_chunk(
            bits, state, f, ground, cfg.beta_initial, cfg.delta_beta, done, m,
            random_sel, sel, acc, cfg.stop_at_ground, trace,
        )
        done += ran
        stopped = cfg.stop_at_ground and state[2] >= 0
    best_w, final_w = int(state[1]), int(state[0])
    target = best_w if cfg.mode == "solver" else final_w
    out_trace = None
    if cfg.record_trace:
        out_trace = np.column_stack([np.arange(done), trace[:done]])
    return SARunResult(
        best_w=best_w,
        final_w=final_w,
        success=bool(ground[target]),
        spin_updates=int(state[3]),
        first_hit=None if state[2] < 0 else int(state[2]),
        initial_w=w0,
        trace=out_trace,
    )


def run_sa_ensemble(cost: CostFunction, cfg: SAConfig, seeds) -> list[SARunResult]:
    """Independent runs, one per seed, in the order given."""
    from dataclasses import replace

    return [run_sa(cost, replace(cfg, seed=int(s))) for s in seeds]


# --- birth-death chain hitting times -------------------------------------


def stefanov_plateau_time(n: int, l: int, u: int) -> float:
    """Mean time for a random-selection walker to fall off the plateau.

    Nodes ``i = 0..w`` (``w = u - l - 1``) stand for weight ``l + i``; the
    walker starts on node ``w`` and is absorbed at node 0.  With
    ``a_i = (l + i)/n`` and ``c_i = 1 - (l + i - 1)/n``,
    ``E tau_{r,r-1} = (1/a_r)(1 + sum_{s=r+1}^{w} prod_{t=r+1}^{s} c_t/a_t)``
    summed over ``r = 1..w``.
    """
    if not (0 <= l < u <= n):
        raise ParameterError(f"plateau needs 0 <= l < u <= n, got n={n}, l={l}, u={u}")
    width = u - l - 1
    if width < 1:
        return 0.0
    i = np.arange(width + 1, dtype=float)
    a = (l + i) / n
    c = 1.0 - (l + i - 1) / n
    total = 0.0
    for r in range(1, width + 1):
        inner, prod = 1.0, 1.0
        for s in range(r + 1, width + 1):
            prod *= c[s] / a[s]
            inner += prod
        total += inner / a[r]
    return total


def plateau_chain(n: int, l: int, u: int) -> tuple[np.ndarray, np.ndarray]:
    """``(a, c)`` for the plateau chain; entry ``i - 1`` holds ``a_i`` and ``c_i``."""
    width = u - l - 1
    if width < 1:
        raise ParameterError("plateau of width zero has no chain")
    i = np.arange(1, width + 1, dtype=float)
    a = (l + i) / n
    c = 1.0 - (l + i - 1) / n
    c[0] = 0.0
    return a, c


def plain_hw_chain(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-temperature random-selection chain on the plain Hamming weight.

    ``a_i = i/n`` and ``c_i = (n - i + 1)/n e^{-beta}``, node ``i`` = weight ``i``.
    """
    i = np.arange(1, n + 1, dtype=float)
    a = i / n
    c = (n - i + 1) / n * (0.0 if np.isinf(beta) else np.exp(-beta))
    return a, c


def absorbing_chain_time(a, c, start: int | None = None) -> float:
    """Expected steps to reach node 0 by a direct linear solve.

    ``a[i-1] = p(i -> i-1)`` for ``i = 1..w`` and ``c[i-1] = p(i-1 -> i)``
    (``c[0]`` is unused because node 0 absorbs).  The staying probability is
    whatever is left in each row.  ``start`` defaults to the rightmost node.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    w = a.size
    if c.size != w or w < 1:
        raise ParameterError("a and c must have equal positive length")
    up = np.append(c[1:], 0.0)  # p(i -> i+1) for i = 1..w
    stay = 1.0 - a - up
    if np.any(a < 0) or np.any(up < 0) or np.any(stay < -1e-12):
        raise ParameterError("transition rows are not stochastic")
    if np.any(a <= 0):
        raise ParameterError("singular chain: some node cannot step towards the absorber")
    start = w if start is None else int(start)
    if not 1 <= start <= w:
        if start == 0:
            return 0.0
        raise ParameterError(f"start node must lie in [0, {w}], got {start}")
    # (I - Q) t = 1 on the transient nodes 1..w with Q tridiagonal.  In the
    # increments d_i = t_i - t_{i-1} (t_0 = 0) the rows read
    # a_i d_i - up_i d_{i+1} = 1: an upper-bidiagonal system whose solution
    # is all positive, so it stays accurate where I - Q is ill-conditioned
    ab = np.zeros((2, w))
    ab[0, 1:] = -up[:-1]
    ab[1, :] = a
    d = solve_banded((0, 1), ab, np.ones(w))
    return float(np.sum(d[:start]))


def simulate_chain(a, c, walks: int, rng: np.random.Generator, start: int | None = None,
                   max_steps: int = 10**8) -> np.ndarray:
    """Monte Carlo absorption times of the chain of :func:`absorbing_chain_time`."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    w = a.size
    up = np.append(c[1:], 0.0)
    pos = np.full(walks, w if start is None else int(start))
    times = np.zeros(walks, dtype=np.int64)
    alive = pos > 0
    steps = 0
    while alive.any():
        if steps >= max_steps:
            raise RuntimeError("chain simulation exceeded max_steps")
        idx = np.flatnonzero(alive)
        u = rng.random(idx.size)
        p = pos[idx] - 1
        move = np.where(u < a[p], -1, np.where(u < a[p] + up[p], 1, 0))
        pos[idx] += move
        times[idx] += 1
        alive[idx] = pos[idx] > 0
        steps += 1
    return times


def plain_hw_hitting_time(n: int, beta: float, start: str = "n") -> float:
    """Mean first-hitting time of weight 0 for fixed-beta random-selection SA.

    ``E tau = sum_k n/(n-k) C(n,k)^-1 sum_{l=0}^{k} e^{-l beta} C(n, k-l)``
    with ``k`` running over ``0..n-1`` from ``start="n"`` or over
    ``n - floor(n/2) .. n-1`` from ``start="n_half"``.  Evaluated in the log
    domain; ``beta = inf`` keeps only ``l = 0`` and gives ``n H_n`` from ``n``.
    """
    if not beta >= 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    if start == "n":
        k0 = 0
    elif start == "n_half":
        k0 = n - n // 2
    else:
        raise ParameterError(f"start must be 'n' or 'n_half', got {start!r}")
    lb = log_binomial(n)
    total = 0.0
    for k in range(k0, n):
        if np.isinf(beta):
            log_inner = 0.0
        else:
            l = np.arange(k + 1)
            log_inner = logsumexp(-l * beta + lb[k - l]) - lb[k]
        total += n / (n - k) * np.exp(log_inner)
    return float(total)


# --- classical Gibbs diagnostics -------------------------------------------


def gibbs_distribution(cost: CostFunction, beta: float) -> np.ndarray:
    """``P(w) = C(n,w) e^{-beta f(w)} / Z``."""
    if not beta >= 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    logw = log_binomial(cost.n) - beta * cost.values
    return np.exp(logw - logsumexp(logw))


def gibbs_expected_hw(cost: CostFunction, beta: float) -> float:
    return float(np.arange(cost.n + 1) @ gibbs_distribution(cost, beta))


def gibbs_background(n: int, beta: float) -> float:
    """Plain Hamming-weight thermal weight ``A(beta) = n e^{-beta}/(1 + e^{-beta})``."""
    if not beta >= 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    return float(n / (np.exp(beta) + 1.0))


def gibbs_signal(cost: CostFunction, beta: float) -> float:
    """Thermal Hamming weight with the plain background ``A(beta)`` removed."""
    return gibbs_expected_hw(cost, beta) - gibbs_background(cost.n, beta)
