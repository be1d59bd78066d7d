"""Annealing Hamiltonian in the permutation-symmetric (Dicke) basis.

In the basis ``|w>`` (uniform superposition of all weight-``w`` strings) the
linear interpolation between the transverse-field driver and the diagonal
cost is a real symmetric tridiagonal matrix, so spectra for ``n`` in the
thousands are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar

from .problems import CostFunction, ParameterError

__all__ = [
    "SymmetricHamiltonian",
    "SpectrumSlice",
    "SpectralError",
    "build",
    "spectrum",
    "dense_matrix",
    "unperturbed_gap",
    "q_of_s",
    "reichardt_lower_bound",
    "reichardt_ratio",
    "gap_profile",
    "min_gap",
    "adiabatic_numerator",
    "adiabatic_time_estimate",
    "AdiabaticEstimate",
    "hopping",
]


class SpectralError(RuntimeError):
    pass


def hopping(n: int) -> np.ndarray:
    """``sqrt((n - w)(w + 1))`` for ``w = 0..n-1``: the driver's Dicke-basis hopping."""
    w = np.arange(n, dtype=float)
    return np.sqrt((n - w) * (w + 1))


@dataclass(frozen=True)
class SymmetricHamiltonian:
    n: int
    cost: CostFunction
    s: float
    diag: np.ndarray
    offdiag: np.ndarray

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = self.diag * psi
        out[:-1] += self.offdiag * psi[1:]
        out[1:] += self.offdiag * psi[:-1]
        return out

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.apply(psi))))

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class SpectrumSlice:
    s: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None  # columns, one per level

    @property
    def gap(self) -> float:
        if self.eigenvalues.size < 2:
            raise SpectralError("gap needs at least two levels")
        return float(self.eigenvalues[1] - self.eigenvalues[0])


def build(cost: CostFunction, s: float) -> SymmetricHamiltonian:
    if not 0.0 <= s <= 1.0:
        raise ParameterError(f"s must lie in [0, 1], got {s}")
    n = cost.n
    diag = (1.0 - s) * n / 2.0 + s * cost.values
    offdiag = -(1.0 - s) / 2.0 * hopping(n)
    return SymmetricHamiltonian(n, cost, float(s), diag, offdiag)


def driver_and_problem(cost: CostFunction) -> tuple[SymmetricHamiltonian, SymmetricHamiltonian]:
    return build(cost, 0.0), build(cost, 1.0)


def _fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first component that is clearly nonzero is made positive
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        big = np.flatnonzero(np.abs(v) > tol * np.abs(v).max())
        if big.size and v[big[0]] < 0:
            vectors[:, j] = -v
    return vectors


def spectrum(H: SymmetricHamiltonian, k: int = 2, want_vectors: bool = False) -> SpectrumSlice:
    """Lowest ``k`` eigenpairs of the tridiagonal Hamiltonian."""
    dim = H.n + 1
    if not 1 <= k <= dim:
        raise ParameterError(f"k must lie in [1, {dim}], got {k}")
    try:
        if want_vectors:
            vals, vecs = linalg.eigh_tridiagonal(
                H.diag, H.offdiag, select="i", select_range=(0, k - 1)
            )
            vecs = _fix_signs(vecs)
        else:
            vals = linalg.eigh_tridiagonal(
                H.diag, H.offdiag, eigvals_only=True, select="i", select_range=(0, k - 1)
            )
            vecs = None
    except (linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(f"tridiagonal eigensolver failed at s={H.s}, n={H.n}: {exc}") from exc
    return SpectrumSlice(H.s, np.asarray(vals), vecs)


def dense_matrix(cost: CostFunction, s: float) -> np.ndarray:
    """Full ``2^n x 2^n`` Hamiltonian (tests and oracles only).

    Qubit ``i`` is bit ``i`` of the basis index; ``|1>`` contributes to the
    Hamming weight.
    """
    n = cost.n
    if n > 12:
        raise ParameterError(f"dense Hamiltonian limited to n <= 12, got {n}")
    dim = 2**n
    idx = np.arange(dim)
    weights = np.array([bin(i).count("1") for i in range(dim)])
    H = np.diag((1 - s) * n / 2.0 + s * cost.values[weights])
    for i in range(n):
        H[idx, idx ^ (1 << i)] -= (1 - s) / 2.0
    return H


def unperturbed_gap(s):
    """Closed-form gap of the plain Hamming-weight problem, ``sqrt(1 - 2s + 2s^2)``."""
    s = np.asarray(s, dtype=float)
    return np.sqrt(1.0 - 2.0 * s + 2.0 * s * s)


def q_of_s(s):
    """Probability that one qubit of the plain Hamming-weight ground state reads 1."""
    s = np.asarray(s, dtype=float)
    delta = unperturbed_gap(s)
    return (1.0 - s) ** 2 / (2.0 * delta * (delta + s))


def reichardt_ratio(cost: CostFunction) -> float:
    """``h (u - l) / sqrt(l)`` for a plateau cost."""
    l, u, h = _plateau_params(cost)
    if l == 0:
        raise ParameterError("gap bound not applicable for l = 0 (needs sqrt(l) > 0)")
    return h * (u - l) / np.sqrt(l)


def reichardt_lower_bound(cost: CostFunction, s) -> np.ndarray | float:
    """Gap lower bound ``Delta(s) - h (u - l) / sqrt(2 pi l (1 - q(s)))``.

    The constant ``1/sqrt(2 pi)`` comes from bounding the Gaussian mass on
    ``(l, u)`` by a rectangle.  The result may be negative, i.e. vacuous.
    """
    l, u, h = _plateau_params(cost)
    if l == 0:
        raise ParameterError("gap bound not applicable for l = 0 (needs sqrt(l) > 0)")
    s = np.asarray(s, dtype=float)
    bound = unperturbed_gap(s) - h * (u - l) / np.sqrt(2 * np.pi * l * (1.0 - q_of_s(s)))
    return float(bound) if bound.ndim == 0 else bound


def _plateau_params(cost: CostFunction) -> tuple[int, int, int]:
    if cost.label not in ("plateau", "plain_hw"):
        raise ParameterError(f"gap bound needs a plateau-family cost, got {cost.label!r}")
    if cost.label == "plain_hw":
        # an empty plateau at l = n - 1, u = n
        return cost.n - 1 if cost.n > 1 else 1, cost.n, 0
    return int(cost.params["l"]), int(cost.params["u"]), int(cost.params["h"])


def gap_profile(cost: CostFunction, s_grid) -> np.ndarray:
    return np.array([spectrum(build(cost, float(s)), 2).gap for s in s_grid])


def min_gap(cost: CostFunction, points: int = 201, xtol: float = 1e-10) -> tuple[float, float]:
    """Location and value of the minimum gap over ``s`` in ``[0, 1]``.

    A uniform scan brackets the minimum, then a bounded scalar search refines it.
    """
    grid = np.linspace(0.0, 1.0, points)
    gaps = gap_profile(cost, grid)
    i = int(np.argmin(gaps))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    if hi - lo <= 0:
        return float(grid[i]), float(gaps[i])
    res = minimize_scalar(
        lambda s: spectrum(build(cost, s), 2).gap,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol},
    )
    if res.fun > gaps[i]:
        return float(grid[i]), float(gaps[i])
    return float(res.x), float(res.fun)


def adiabatic_numerator(cost: CostFunction, s: float) -> float:
    """``|<e0(s)| dH/ds |e1(s)>|`` with ``dH/ds = H(1) - H(0)``."""
    n = cost.n
    H = build(cost, s)
    sl = spectrum(H, 2, want_vectors=True)
    e0, e1 = sl.eigenvectors[:, 0], sl.eigenvectors[:, 1]
    # H(1) - H(0): diagonal f(w) - n/2, off-diagonal +hopping/2
    dH = (cost.values - n / 2.0) * e1
    t = 0.5 * hopping(n)
    dH[:-1] += t * e1[1:]
    dH[1:] += t * e1[:-1]
    return float(abs(e0 @ dH))


@dataclass(frozen=True)
class AdiabaticEstimate:
    time: float  # max over s of numerator / gap^2
    s_at_max: float
    coarse_bound: float  # n * max over s of 1 / gap^2
    s_grid: np.ndarray
    ratio: np.ndarray
    gaps: np.ndarray


def adiabatic_time_estimate(
    cost: CostFunction, s_grid=None, refine: bool = True, gap_floor: float = 1e-12
) -> AdiabaticEstimate:
    """Maximum of ``|<e0|dH/ds|e1>| / Gap^2`` over ``s``.

    ``s_grid`` defaults to 401 uniform points; with ``refine`` the maximum
    is polished by a bounded scalar search between the neighbouring grid
    points.
    """
    grid = np.linspace(0.0, 1.0, 401) if s_grid is None else np.asarray(s_grid, dtype=float)
    if grid[0] > 0 or grid[-1] < 1:
        raise ParameterError("s grid must cover [0, 1]")

    def ratio_at(s):
        H = build(cost, s)
        sl = spectrum(H, 2, want_vectors=True)
        gap = sl.gap
        if gap < gap_floor:
            raise SpectralError(f"degenerate gap {gap:.3g} at s={s}, n={cost.n}")
        return adiabatic_numerator(cost, s) / gap**2, gap

    pairs = [ratio_at(float(s)) for s in grid]
    ratios = np.array([p[0] for p in pairs])
    gaps = np.array([p[1] for p in pairs])
    i = int(np.argmax(ratios))
    best_s, best = float(grid[i]), float(ratios[i])
    if refine and len(grid) > 2:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = minimize_scalar(
            lambda s: -ratio_at(s)[0], bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-9},
        )
        if -res.fun > best:
            best_s, best = float(res.x), float(-res.fun)
    coarse = cost.n * float(np.max(1.0 / gaps**2))
    return AdiabaticEstimate(best, best_s, coarse, grid, ratios, gaps)
