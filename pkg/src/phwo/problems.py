"""Perturbed Hamming-weight oracle (PHWO) cost functions.

Every cost function here depends on the bit string only through its Hamming
weight, so it is stored as the ``n + 1`` energies ``f(0), ..., f(n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np
from scipy.special import comb, gammaln

__all__ = [
    "CostFunction",
    "GroundSet",
    "ParameterError",
    "make_plain_hw",
    "make_plateau",
    "make_spike",
    "make_convex_perturbed",
    "make_vandam",
    "make_custom",
    "load_cost_file",
    "ground_set",
    "krawtchouk",
    "pauli_z_expansion",
    "pauli_z_bruteforce",
    "reconstruct_from_pauli",
    "make_problem",
]

PAULI_CAP = 24


class ParameterError(ValueError):
    """A problem or solver parameter lies outside its domain."""


@dataclass(frozen=True)
class CostFunction:
    """Energy ``values[w] = f(w)`` for every Hamming weight ``w`` of ``n`` bits."""

    n: int
    values: np.ndarray
    label: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if values.shape != (self.n + 1,):
            raise ParameterError(
                f"expected {self.n + 1} energies for n={self.n}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("cost values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def __call__(self, w):
        return self.values[w]

    def __reduce__(self):
        # the read-only params proxy does not pickle; rebuild from plain parts
        return (type(self), (self.n, np.array(self.values), self.label, dict(self.params)))

    def __eq__(self, other):
        if not isinstance(other, CostFunction):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    def describe(self) -> dict:
        return {"label": self.label, "n": self.n, **dict(self.params)}


@dataclass(frozen=True)
class GroundSet:
    weights: tuple[int, ...]
    degeneracy: int


def make_plain_hw(n: int) -> CostFunction:
    return CostFunction(n, np.arange(n + 1, dtype=float), "plain_hw", {})


def make_plateau(n: int, l: int, u: int) -> CostFunction:
    """Plateau of height ``u - 1`` on ``l < w < u``, plain Hamming weight elsewhere."""
    if not (0 <= l < u <= n):
        raise ParameterError(f"plateau needs 0 <= l < u <= n, got n={n}, l={l}, u={u}")
    values = np.arange(n + 1, dtype=float)
    values[l + 1 : u] = u - 1
    return CostFunction(n, values, "plateau", {"l": l, "u": u, "h": u - l - 1})


def make_spike(n: int) -> CostFunction:
    """Energy ``n`` at ``w = n/4``; ``n`` must be a multiple of 4."""
    if n < 4 or n % 4:
        raise ParameterError(f"spike problem needs n divisible by 4, got {n}")
    values = np.arange(n + 1, dtype=float)
    values[n // 4] = n
    return CostFunction(n, values, "spike", {})


def make_convex_perturbed(n: int) -> CostFunction:
    """``f(0) = 2`` and ``f(w) = w`` otherwise, minimized at ``w = 1``."""
    if n < 2:
        raise ParameterError(f"convex problem needs n >= 2, got {n}")
    values = np.arange(n + 1, dtype=float)
    values[0] = 2.0
    return CostFunction(n, values, "convex_perturbed", {})


def make_vandam(n: int) -> CostFunction:
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    values = np.arange(n + 1, dtype=float)
    values[n] = -1.0
    return CostFunction(n, values, "vandam", {})


def make_custom(values) -> CostFunction:
    values = np.asarray(values, dtype=float)
    return CostFunction(values.size - 1, values, "custom", {})


def load_cost_file(path: str | Path) -> CostFunction:
    """Read a ``w value`` per line file covering ``0..n`` exactly once.

    Blank lines and lines starting with ``#`` are ignored.
    """
    entries: dict[int, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"{path}:{lineno}: expected 'w value', got {raw!r}")
        w, value = int(parts[0]), float(parts[1])
        if w in entries:
            raise ParameterError(f"{path}:{lineno}: weight {w} listed twice")
        entries[w] = value
    if not entries:
        raise ParameterError(f"{path}: no entries")
    n = max(entries)
    missing = sorted(set(range(n + 1)) - set(entries))
    if missing or min(entries) < 0:
        raise ParameterError(f"{path}: weights must cover 0..{n}; missing {missing[:5]}")
    return make_custom([entries[w] for w in range(n + 1)])


def make_problem(name: str, n: int, l: int | None = None, u: int | None = None) -> CostFunction:
    """Catalog lookup by tag, as used by the command line and manifests."""
    name = {"convex": "convex_perturbed", "hw": "plain_hw"}.get(name, name)
    if name == "plain_hw":
        return make_plain_hw(n)
    if name == "plateau":
        if u is None:
            raise ParameterError("plateau needs u")
        return make_plateau(n, 0 if l is None else l, u)
    if name == "spike":
        return make_spike(n)
    if name == "convex_perturbed":
        return make_convex_perturbed(n)
    if name == "vandam":
        return make_vandam(n)
    raise ParameterError(f"unknown problem {name!r}")


def ground_set(cost: CostFunction) -> GroundSet:
    fmin = cost.values.min()
    weights = tuple(int(w) for w in np.flatnonzero(cost.values == fmin))
    degeneracy = sum(int(comb(cost.n, w, exact=True)) for w in weights)
    return GroundSet(weights, degeneracy)


def krawtchouk(n: int) -> np.ndarray:
    """Matrix ``K[k, w] = sum_j (-1)^j C(w, j) C(n - w, k - j)``.

    ``K[k, w]`` is the sum of the parity characters ``(-1)^{x.r}`` over all
    ``r`` of weight ``k`` for any fixed ``x`` of weight ``w``.  Exact integer
    arithmetic, so only sensible for moderate ``n``.
    """
    K = np.zeros((n + 1, n + 1), dtype=object)
    for w in range(n + 1):
        for k in range(n + 1):
            total = 0
            for j in range(max(0, k - (n - w)), min(w, k) + 1):
                total += (-1) ** j * comb(w, j, exact=True) * comb(n - w, k - j, exact=True)
            K[k, w] = total
    return K


def pauli_z_expansion(cost: CostFunction, cap: int = PAULI_CAP) -> np.ndarray:
    """Coefficient ``J[k]`` shared by every weight-``k`` product of Pauli-z operators.

    Weight-resolved form of ``J_r = 2^-n sum_x f(x) (-1)^{x.r}``: grouping the
    strings ``x`` by weight gives ``J[k] = 2^-n sum_w f(w) C(n,w) K[k,w] / C(n,k)``
    with ``K`` from :func:`krawtchouk`.
    """
    n = cost.n
    if n > cap:
        raise ParameterError(f"pauli_z_expansion limited to n <= {cap}, got {n}")
    K = krawtchouk(n)
    binom = [comb(n, k, exact=True) for k in range(n + 1)]
    fvals = [Fraction(float(v)) for v in cost.values]
    J = np.empty(n + 1)
    for k in range(n + 1):
        # exact rational sum; float accumulation cancels badly at n ~ 24
        total = sum(fvals[w] * (binom[w] * K[k, w]) for w in range(n + 1))
        J[k] = float(total / (binom[k] * 2**n))
    return J


def pauli_z_bruteforce(cost: CostFunction, cap: int = 16) -> np.ndarray:
    """Same coefficients from the literal sum over all ``2^n`` strings.

    Uses the representative ``r = 1^k 0^(n-k)`` for each ``k``.
    """
    n = cost.n
    if n > cap:
        raise ParameterError(f"brute-force expansion limited to n <= {cap}, got {n}")
    x = np.arange(2**n, dtype=np.int64)
    bits = (x[:, None] >> np.arange(n)) & 1
    fx = cost.values[bits.sum(axis=1)]
    J = np.empty(n + 1)
    for k in range(n + 1):
        parity = bits[:, :k].sum(axis=1) % 2
        J[k] = np.sum(fx * (1 - 2 * parity)) / 2.0**n
    return J


def reconstruct_from_pauli(J: np.ndarray) -> np.ndarray:
    """Invert :func:`pauli_z_expansion`: ``f(w) = sum_k J[k] K[k, w]``."""
    n = len(J) - 1
    K = krawtchouk(n).astype(float)
    return K.T @ np.asarray(J, dtype=float)


def log_binomial(n: int) -> np.ndarray:
    """``log C(n, w)`` for ``w = 0..n``."""
    w = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(w + 1) - gammaln(n - w + 1)
