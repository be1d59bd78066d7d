"""Symmetric spin-vector dynamics (SVD).

All ``n`` spins share one coherent-state direction ``(theta, phi)``, so the
semiclassical potential is a single sum over Hamming weights and the
equations of motion are two-dimensional.  ``theta = 0`` is ``|0>^n`` and
``(theta, phi) = (pi/2, 0)`` is ``|+>^n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import xlogy
from scipy.stats import binom

from .integrate import IntegrationError, IntegratorConfig, integrate
from .problems import CostFunction, ParameterError, ground_set, log_binomial
from .qa import SymmetricState, trace_distance

__all__ = [
    "SpinCoherentAngles",
    "SvdTrajectory",
    "vsc_sym",
    "vsc_gradient",
    "evolve_svd",
    "svd_sector_prob",
    "final_sector_prob",
    "coherent_state",
    "trace_distance_to_qa",
    "landscape",
    "landscape_scan",
    "LandscapeMinimum",
    "Degeneracy",
    "find_degeneracy",
    "vsc_perturbation_magnitude",
    "sc_ground_hw",
]


@dataclass(frozen=True)
class SpinCoherentAngles:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (-1e-12 <= self.theta <= np.pi + 1e-12):
            raise ParameterError(f"theta must lie in [0, pi], got {self.theta}")

    @classmethod
    def from_vector(cls, m: np.ndarray) -> "SpinCoherentAngles":
        m = np.asarray(m, dtype=float)
        m = m / np.linalg.norm(m)
        theta = float(np.arccos(np.clip(m[2], -1.0, 1.0)))
        phi = float(np.arctan2(m[1], m[0]))
        if phi <= -np.pi:
            phi += 2 * np.pi
        return cls(theta, phi)

    def vector(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    @property
    def p(self) -> float:
        """Single-spin probability of reading 1, ``sin^2(theta/2)``."""
        return float(np.sin(self.theta / 2) ** 2)


@dataclass
class SvdTrajectory:
    t_f: float
    s: np.ndarray
    angles: list[SpinCoherentAngles]
    n: int

    @property
    def final(self) -> SpinCoherentAngles:
        return self.angles[-1]

    def expected_hw(self) -> np.ndarray:
        return np.array([self.n * a.p for a in self.angles])


def _binomial_pmf(n: int, p):
    """``C(n, w) p^w (1-p)^(n-w)`` for every ``w``; stable for large ``n``."""
    return binom.pmf(np.arange(n + 1), n, p)


def _problem_energy(cost: CostFunction, p: float) -> float:
    return float(cost.values @ _binomial_pmf(cost.n, p))


def _problem_slope(cost: CostFunction, p: float) -> float:
    """``d/dp sum_w f(w) C(n,w) p^w (1-p)^(n-w)``.

    Summing by parts turns the derivative into ``n E[f(W+1) - f(W)]`` with
    ``W ~ Bin(n-1, p)``, which avoids the ``p^(w-1)`` factors at the poles.
    """
    n = cost.n
    diffs = np.diff(cost.values)
    return float(n * diffs @ binom.pmf(np.arange(n), n - 1, p))


def vsc_sym(cost: CostFunction, angles: SpinCoherentAngles, s: float) -> float:
    """``<Omega|H(s)|Omega>`` for the symmetric product state ``|Omega>``."""
    n = cost.n
    driver = 0.5 * n * (1.0 - np.cos(angles.phi) * np.sin(angles.theta))
    return float((1.0 - s) * driver + s * _problem_energy(cost, angles.p))


def vsc_gradient(cost: CostFunction, angles: SpinCoherentAngles, s: float) -> tuple[float, float]:
    """Analytic ``(dV/dtheta, dV/dphi)``."""
    n = cost.n
    th, ph = angles.theta, angles.phi
    # dp/dtheta = sin(theta)/2
    d_theta = -(1.0 - s) * 0.5 * n * np.cos(ph) * np.cos(th)
    d_theta += s * _problem_slope(cost, angles.p) * 0.5 * np.sin(th)
    d_phi = (1.0 - s) * 0.5 * n * np.sin(th) * np.sin(ph)
    return float(d_theta), float(d_phi)


def _precession_rhs(cost: CostFunction, t_f: float):
    n = cost.n
    f = cost.values
    diffs = np.diff(f)
    w_minus = np.arange(n)

    def rhs(s, m):
        # V(m) = (1-s)(n/2)(1 - m_x) + s G((1 - m_z)/2); the field is -(t_f/n) grad V
        p = min(max(0.5 * (1.0 - m[2]), 0.0), 1.0)
        slope = n * diffs @ binom.pmf(w_minus, n - 1, p)
        bx = (t_f / n) * (1.0 - s) * 0.5 * n
        bz = (t_f / n) * s * 0.5 * slope
        # dm/ds = 2 m x B
        return 2.0 * np.array([m[1] * bz, m[2] * bx - m[0] * bz, -m[1] * bx])

    return rhs


def evolve_svd(
    cost: CostFunction,
    t_f: float,
    cfg: IntegratorConfig | None = None,
    sample_points=None,
) -> SvdTrajectory:
    """Integrate the symmetric SVD equations from ``(pi/2, 0)`` to ``s = 1``.

    The angular equations ``(n/2) sin(theta) theta' = t_f dV/dphi`` and
    ``-(n/2) sin(theta) phi' = t_f dV/dtheta`` are singular at the poles, so
    the integration runs on the unit vector ``m`` with ``dm/ds = 2 m x B``,
    ``B = -(t_f/n) grad_m V``.  Away from the poles the two forms coincide.
    """
    if not t_f > 0:
        raise ParameterError(f"t_f must be positive, got {t_f}")
    cfg = cfg or IntegratorConfig()
    points = [0.0, 1.0] if sample_points is None else [float(p) for p in sample_points]
    m0 = np.array([1.0, 0.0, 0.0])
    try:
        out, _ = integrate(_precession_rhs(cost, t_f), m0, (0.0, 1.0), cfg, points)
    except IntegrationError as exc:
        raise IntegrationError(f"SVD integration failed for n={cost.n}, t_f={t_f}", exc.s) from exc
    angles = [SpinCoherentAngles.from_vector(m) for m in out]
    return SvdTrajectory(float(t_f), np.array(points), angles, cost.n)


def svd_sector_prob(angles: SpinCoherentAngles, cost: CostFunction) -> float:
    """Probability that the product state reads out a ground-set weight."""
    weights = list(ground_set(cost).weights)
    return float(np.sum(binom.pmf(weights, cost.n, angles.p)))


def final_sector_prob(cost: CostFunction, t_f: float, cfg: IntegratorConfig | None = None) -> float:
    return svd_sector_prob(evolve_svd(cost, t_f, cfg).final, cost)


def coherent_state(n: int, angles: SpinCoherentAngles) -> np.ndarray:
    """Dicke-basis amplitudes ``sqrt(C(n,w)) cos^(n-w)(theta/2) (sin(theta/2) e^{i phi})^w``."""
    w = np.arange(n + 1)
    c, s_ = np.cos(angles.theta / 2), np.sin(angles.theta / 2)
    # xlogy keeps 0 * log(0) = 0 at the poles
    log_mag = 0.5 * log_binomial(n) + xlogy(n - w, abs(c)) + xlogy(w, abs(s_))
    mag = np.exp(log_mag)
    return mag * np.exp(1j * angles.phi * w)


def trace_distance_to_qa(angles: SpinCoherentAngles, state: SymmetricState) -> float:
    return trace_distance(coherent_state(state.n, angles), state.amplitudes)


def landscape(cost: CostFunction, s: float, theta) -> np.ndarray:
    """``V(theta, phi=0, s)`` on an array of ``theta``."""
    n = cost.n
    theta = np.asarray(theta, dtype=float)
    p = np.sin(theta / 2) ** 2
    pmf = binom.pmf(np.arange(n + 1)[None, :], n, p[:, None])
    return (1.0 - s) * 0.5 * n * (1.0 - np.sin(theta)) + s * pmf @ cost.values


@dataclass(frozen=True)
class LandscapeMinimum:
    theta: float
    value: float

    @property
    def p(self) -> float:
        return float(np.sin(self.theta / 2) ** 2)


def landscape_scan(
    cost: CostFunction, s: float, resolution: int = 4096, xtol: float = 1e-10
) -> list[LandscapeMinimum]:
    """Local minima of ``V(theta, 0, s)`` over ``theta in [0, pi]``, by ``theta``.

    A uniform grid brackets the minima; each bracket is polished by
    golden-section search.
    """
    theta = np.linspace(0.0, np.pi, resolution)
    V = landscape(cost, s, theta)
    f = lambda t: float(landscape(cost, s, [t])[0])  # noqa: E731
    minima = []
    for i in range(resolution):
        left = V[i - 1] if i > 0 else np.inf
        right = V[i + 1] if i < resolution - 1 else np.inf
        if not (V[i] <= left and V[i] < right):
            continue
        if i == 0 or i == resolution - 1 or not V[i] < left:
            minima.append(LandscapeMinimum(float(theta[i]), float(V[i])))
            continue
        res = minimize_scalar(
            f, bracket=(theta[i - 1], theta[i], theta[i + 1]), method="golden",
            tol=xtol,
        )
        t, v = float(res.x), float(res.fun)
        if not (theta[i - 1] <= t <= theta[i + 1]) or v > V[i]:
            t, v = float(theta[i]), float(V[i])
        minima.append(LandscapeMinimum(t, v))
    return minima


def sc_ground_hw(cost: CostFunction, s: float, resolution: int = 4096) -> float:
    """``<HW>`` of the global minimum of the semiclassical potential."""
    best = min(landscape_scan(cost, s, resolution), key=lambda m: m.value)
    return cost.n * best.p


@dataclass(frozen=True)
class Degeneracy:
    s_star: float
    left: LandscapeMinimum  # smaller theta (lower Hamming weight)
    right: LandscapeMinimum
    hw_jump: float  # n (p_right - p_left): drop of the global-minimum <HW> across s*


def _well_difference(cost, s, resolution):
    minima = landscape_scan(cost, s, resolution)
    if len(minima) < 2:
        return None, minima
    # the two deepest wells, ordered by theta
    a, b = sorted(sorted(minima, key=lambda m: m.value)[:2], key=lambda m: m.theta)
    return a.value - b.value, (a, b)


def find_degeneracy(
    cost: CostFunction,
    s_points: int = 101,
    resolution: int = 4096,
    tol: float = 1e-9,
) -> Degeneracy | None:
    """Point ``s*`` where the two deepest wells of ``V(theta, 0, s)`` are level.

    Scans ``s`` for a sign change of ``V_left - V_right`` and bisects until
    the well depths agree to ``tol``.  Returns ``None`` when no double well
    with a change of global minimum exists.
    """
    grid = np.linspace(0.0, 1.0, s_points)
    prev = None
    bracket = None
    # before s* the deeper well is the right one (d > 0), after it the left one
    for s in grid:
        d, _ = _well_difference(cost, s, resolution)
        if d is not None and prev is not None and prev[1] > 0 >= d:
            bracket = (prev[0], s)
            break
        prev = None if d is None else (s, d)
    if bracket is None:
        return None
    lo, hi = bracket
    wells = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        d, found = _well_difference(cost, mid, resolution)
        if d is None:
            # the double well closed inside the bracket; keep the side that has it
            d_lo, _ = _well_difference(cost, lo, resolution)
            if d_lo is None:
                return None
            hi = mid
            continue
        wells = found
        if abs(d) < tol:
            break
        if d > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    s_star = 0.5 * (lo + hi) if wells is None else mid
    if wells is None:
        _, wells = _well_difference(cost, s_star, resolution)
    left, right = wells
    return Degeneracy(float(s_star), left, right, cost.n * (right.p - left.p))


def vsc_perturbation_magnitude(cost: CostFunction, s: float, resolution: int = 4096) -> float:
    """``max_theta |V_pert - V_unpert|`` for a plateau-family cost.

    The difference is ``s sum_{l<w<u} (f(w) - w) C(n,w) p^w (1-p)^(n-w)``.
    """
    if cost.label not in ("plateau", "plain_hw"):
        raise ParameterError(f"needs a plateau-family cost, got {cost.label!r}")
    n = cost.n
    pert = cost.values - np.arange(n + 1)
    if not np.any(pert):
        return 0.0
    theta = np.linspace(0.0, np.pi, resolution)
    p = np.sin(theta / 2) ** 2
    support = np.flatnonzero(pert)
    pmf = binom.pmf(support[None, :], n, p[:, None])
    return float(s * np.max(np.abs(pmf @ pert[support])))
