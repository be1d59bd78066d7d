"""Closed-system quantum annealing in the symmetric subspace.

The state starts in ``|+>^n`` and obeys ``i dpsi/ds = t_f H(s) psi`` with the
linear schedule ``s = t / t_f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .integrate import IntegrationError, IntegratorConfig, integrate
from .problems import CostFunction, ParameterError, ground_set, log_binomial
from .spectral import build, hopping, spectrum

__all__ = [
    "SymmetricState",
    "QATrajectory",
    "initial_state",
    "evolve",
    "final_ground_prob",
    "dense_evolve_oracle",
    "ground_prob",
    "eigenpopulations",
    "expected_hw",
    "trace_distance",
    "ground_state_hw",
]


@dataclass(frozen=True)
class SymmetricState:
    amplitudes: np.ndarray
    s: float = 0.0

    @property
    def n(self) -> int:
        return self.amplitudes.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class QATrajectory:
    t_f: float
    states: list[SymmetricState]
    max_norm_drift: float
    accepted_steps: int
    rejected_steps: int
    cost: CostFunction | None = field(default=None, repr=False)

    @property
    def s(self) -> np.ndarray:
        return np.array([st.s for st in self.states])

    @property
    def final(self) -> SymmetricState:
        return self.states[-1]


def initial_state(n: int) -> SymmetricState:
    """``|+>^n`` in the Dicke basis: ``a_w = sqrt(C(n, w) / 2^n)``."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    amps = np.exp(0.5 * (log_binomial(n) - n * np.log(2.0)))
    return SymmetricState(amps.astype(complex), 0.0)


def _rhs_factory(cost: CostFunction, t_f: float):
    n = cost.n
    f = cost.values
    hop = hopping(n)
    half_n = n / 2.0

    def rhs(s, psi):
        a = 1.0 - s
        # H(s) psi, with H(s) = (1 - s)(n/2 - hop/2 tridiag) + s diag(f)
        hpsi = (a * half_n + s * f) * psi
        t = (-0.5 * a) * hop
        hpsi[:-1] += t * psi[1:]
        hpsi[1:] += t * psi[:-1]
        return (-1j * t_f) * hpsi

    return rhs


def evolve(
    cost: CostFunction,
    t_f: float,
    cfg: IntegratorConfig | None = None,
    sample_points=(1.0,),
    backend: str = "compiled",
) -> QATrajectory:
    """Propagate ``|+>^n`` from ``s = 0`` to ``s = 1``.

    States are returned at each of ``sample_points``; the integration always
    ends exactly at ``s = 1``.  ``backend="python"`` runs the generic
    :func:`phwo.integrate.integrate` loop instead of the compiled kernel;
    both take identical steps up to rounding.
    """
    if not t_f > 0:
        raise ParameterError(f"t_f must be positive, got {t_f}")
    cfg = cfg or IntegratorConfig()
    points = [float(p) for p in sample_points]
    if any(p < 0 or p > 1 for p in points):
        raise ParameterError("sample points must lie in [0, 1]")
    if any(b < a for a, b in zip(points, points[1:])):
        raise ParameterError("sample points must be sorted")
    psi0 = initial_state(cost.n).amplitudes

    if backend == "python":
        drift = [0.0]

        def watch(s, y):
            d = abs(float(np.vdot(y, y).real) - 1.0)
            if d > drift[0]:
                drift[0] = d

        out, stats = integrate(_rhs_factory(cost, t_f), psi0, (0.0, 1.0), cfg, points, watch)
        states = [SymmetricState(y, s) for y, s in zip(out, points)]
        return QATrajectory(t_f, states, drift[0], stats.accepted, stats.rejected, cost)
    if backend != "compiled":
        raise ParameterError(f"unknown backend {backend!r}")

    from ._qa_kernel import evolve_tridiagonal, tableau_arrays

    head = [p for p in points if p <= 0.0]
    rest = [p for p in points if p > 0.0]
    targets = rest + ([] if rest and rest[-1] >= 1.0 else [1.0])
    flags = [True] * len(rest) + [False] * (len(targets) - len(rest))
    c, A, b5, b4, fsal = tableau_arrays(cfg.method)
    samples, count, acc, rej, drift, status, s_reached = evolve_tridiagonal(
        psi0, cost.values, hopping(cost.n), float(t_f), c, A, b5, b4, fsal,
        cfg.rel_tol, cfg.abs_tol, float(cfg.max_step), cfg.min_step, cfg.max_steps,
        np.array(targets, dtype=float), np.array(flags, dtype=np.bool_),
    )
    if status == 1:
        raise IntegrationError("step budget exhausted", s_reached)
    if status == 2:
        raise IntegrationError("step size underflow", s_reached)
    states = [SymmetricState(psi0.copy(), p) for p in head]
    states += [SymmetricState(samples[i].copy(), p) for i, p in enumerate(rest[:count])]
    return QATrajectory(t_f, states, drift, acc, rej, cost)


def final_ground_prob(cost: CostFunction, t_f: float, cfg: IntegratorConfig | None = None) -> float:
    return ground_prob(evolve(cost, t_f, cfg).final, cost)


def ground_prob(state: SymmetricState, cost: CostFunction) -> float:
    weights = list(ground_set(cost).weights)
    return float(np.sum(np.abs(state.amplitudes[weights]) ** 2))


def eigenpopulations(state: SymmetricState, cost: CostFunction, s: float, k: int) -> np.ndarray:
    """``|<e_i(s)|psi>|^2`` for the lowest ``k`` instantaneous eigenstates."""
    sl = spectrum(build(cost, s), k, want_vectors=True)
    overlaps = sl.eigenvectors.T @ state.amplitudes
    return np.abs(overlaps) ** 2


def expected_hw(state: SymmetricState) -> float:
    w = np.arange(state.amplitudes.size)
    return float(np.sum(w * np.abs(state.amplitudes) ** 2))


def ground_state_hw(cost: CostFunction, s: float) -> float:
    """Expected Hamming weight of the instantaneous ground state at ``s``."""
    vec = spectrum(build(cost, s), 1, want_vectors=True).eigenvectors[:, 0]
    return float(np.arange(cost.n + 1) @ vec**2)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace distance ``sqrt(1 - |<a|b>|^2)`` between normalized pure states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ov = np.vdot(a, b)
    mag = abs(ov)
    if mag == 0.0:
        return 1.0
    # 1 - |<a|b>| = |a - e^{-i arg<a|b>} b|^2 / 2 avoids cancellation for nearby states
    d2 = float(np.linalg.norm(a - b * (np.conj(ov) / mag)) ** 2)
    return float(np.sqrt(max(0.0, 0.5 * d2 * (1.0 + min(mag, 1.0)))))


DENSE_CAP = 12


def _dense_sparse_hamiltonians(cost: CostFunction):
    n = cost.n
    dim = 2**n
    idx = np.arange(dim)
    weights = np.zeros(dim, dtype=np.int64)
    for i in range(n):
        weights += (idx >> i) & 1
    rows, cols = [], []
    for i in range(n):
        rows.append(idx)
        cols.append(idx ^ (1 << i))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    # driver sum_i (1 - sigma^x_i)/2
    driver = sparse.csr_matrix((np.full(rows.size, -0.5), (rows, cols)), shape=(dim, dim))
    driver = driver + sparse.identity(dim, format="csr") * (n / 2.0)
    problem = cost.values[weights]
    return driver, problem, weights


def dense_evolve_oracle(
    cost: CostFunction, t_f: float, rtol: float = 1e-12, atol: float = 1e-13
) -> tuple[SymmetricState, float]:
    """Propagate in the full ``2^n`` space and project onto the Dicke basis.

    Independent of :func:`evolve`: builds the Hamiltonian qubit by qubit and
    integrates with SciPy's DOP853.  Returns the projected state and the norm
    of the non-symmetric residual.
    """
    n = cost.n
    if n > DENSE_CAP:
        raise ParameterError(f"dense oracle limited to n <= {DENSE_CAP}, got {n}")
    driver, problem, weights = _dense_sparse_hamiltonians(cost)
    dim = 2**n
    psi0 = np.full(dim, 2.0 ** (-n / 2), dtype=complex)
    if t_f == 0:
        psi = psi0
    else:
        def rhs(s, psi):
            return -1j * t_f * ((1 - s) * (driver @ psi) + s * problem * psi)

        sol = solve_ivp(rhs, (0.0, 1.0), psi0, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"dense oracle integration failed: {sol.message}")
        psi = sol.y[:, -1]
    amps = np.zeros(n + 1, dtype=complex)
    counts = np.bincount(weights, minlength=n + 1)
    np.add.at(amps, weights, psi)
    amps /= np.sqrt(counts)
    # components of psi outside the symmetric sector
    residual = psi - amps[weights] / np.sqrt(counts[weights])
    return SymmetricState(amps, 1.0), float(np.linalg.norm(residual))
