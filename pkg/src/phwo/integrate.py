"""Adaptive embedded Runge-Kutta 4(5) pairs.

Two tableaus are provided, Cash-Karp and Dormand-Prince.  Both advance with
the fifth-order solution and use the embedded fourth-order solution only for
the error estimate.  Requested output points are hit exactly by shortening
the step that would cross them, so no interpolation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["IntegratorConfig", "IntegrationError", "Tableau", "TABLEAUS", "integrate"]


class IntegrationError(RuntimeError):
    """Raised when the step size underflows or the step budget runs out."""

    def __init__(self, message: str, s: float):
        super().__init__(f"{message} (reached s={s:.12g})")
        self.s = s


@dataclass(frozen=True)
class Tableau:
    c: np.ndarray
    a: tuple[np.ndarray, ...]
    b_high: np.ndarray
    b_low: np.ndarray
    fsal: bool = False


def _cash_karp() -> Tableau:
    c = np.array([0.0, 1 / 5, 3 / 10, 3 / 5, 1.0, 7 / 8])
    a = (
        np.array([]),
        np.array([1 / 5]),
        np.array([3 / 40, 9 / 40]),
        np.array([3 / 10, -9 / 10, 6 / 5]),
        np.array([-11 / 54, 5 / 2, -70 / 27, 35 / 27]),
        np.array([1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096]),
    )
    b5 = np.array([37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771])
    b4 = np.array([2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4])
    return Tableau(c, a, b5, b4)


def _dormand_prince() -> Tableau:
    c = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
    a = (
        np.array([]),
        np.array([1 / 5]),
        np.array([3 / 40, 9 / 40]),
        np.array([44 / 45, -56 / 15, 32 / 9]),
        np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
        np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
        np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
    )
    b5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
    b4 = np.array(
        [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
    )
    return Tableau(c, a, b5, b4, fsal=True)


TABLEAUS = {"cash_karp_45": _cash_karp(), "dormand_prince_45": _dormand_prince()}


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step limits for :func:`integrate`.

    ``rel_tol`` and ``abs_tol`` enter the usual mixed error weight
    ``abs_tol + rel_tol * |y|`` and the step is accepted when the RMS of the
    weighted error is below one.
    """

    method: str = "cash_karp_45"
    rel_tol: float = 1e-13
    abs_tol: float = 1e-13
    max_step: float = np.inf
    min_step: float = 1e-14
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in TABLEAUS:
            raise ValueError(f"unknown integrator {self.method!r}; choose from {sorted(TABLEAUS)}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


def _initial_step(rhs, s0, y0, f0, span, rtol, atol, order=5):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(s0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / order)
    return min(100 * h0, h1, span)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    s_span: tuple[float, float],
    cfg: IntegratorConfig,
    sample_points: Sequence[float] = (),
    on_accept: Callable[[float, np.ndarray], None] | None = None,
) -> tuple[list[np.ndarray], IntegrationStats]:
    """Integrate ``dy/ds = rhs(s, y)`` over ``s_span``.

    Returns the solution at each of ``sample_points`` (which must be sorted
    and lie inside ``s_span``) plus step statistics.  The final point of
    ``s_span`` is always reached exactly; include it in ``sample_points`` to
    get the end state back.
    """
    tab = TABLEAUS[cfg.method]
    s0, s1 = map(float, s_span)
    points = [float(p) for p in sample_points]
    if any(b < a for a, b in zip(points, points[1:])):
        raise ValueError("sample_points must be sorted")
    if points and (points[0] < s0 - 1e-15 or points[-1] > s1 + 1e-15):
        raise ValueError("sample_points must lie inside the integration interval")

    stats = IntegrationStats()
    y = np.array(y0, copy=True)
    s = s0
    out: list[np.ndarray] = []
    idx = 0
    while idx < len(points) and points[idx] <= s0:
        out.append(y.copy())
        idx += 1

    stages = len(tab.c)
    k = [None] * stages
    f = rhs(s, y)
    stats.evaluations += 1
    span = s1 - s0
    if span <= 0:
        return out, stats
    h = min(_initial_step(rhs, s, y, f, span, cfg.rel_tol, cfg.abs_tol), cfg.max_step)
    stats.evaluations += 1
    targets = [(p, True) for p in points[idx:]]
    if not targets or targets[-1][0] < s1:
        targets.append((s1, False))
    t_idx = 0

    while s < s1:
        target = targets[t_idx][0]
        if stats.accepted + stats.rejected >= cfg.max_steps:
            raise IntegrationError("step budget exhausted", s)
        if h < cfg.min_step * max(1.0, abs(s)):
            raise IntegrationError(f"step size underflow (h={h:.3g})", s)
        hit = s + h >= target - 1e-14 * max(1.0, abs(target))
        step = target - s if hit else h

        k[0] = f
        for i in range(1, stages):
            ai = tab.a[i]
            incr = ai[0] * k[0]
            for j in range(1, i):
                if ai[j] != 0.0:
                    incr = incr + ai[j] * k[j]
            k[i] = rhs(s + tab.c[i] * step, y + step * incr)
        stats.evaluations += stages - 1

        if tab.fsal:
            # last stage is evaluated at the fifth-order solution itself
            y_new = y + step * _combine(tab.a[-1], k)
            f_new = k[-1]
        else:
            y_new = y + step * _combine(tab.b_high, k)
            f_new = None
        err = step * _combine(tab.b_high - tab.b_low, k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))

        if err_norm <= 1.0:
            stats.accepted += 1
            s = target if hit else s + step
            y = y_new
            if f_new is None:
                f = rhs(s, y)
                stats.evaluations += 1
            else:
                f = f_new
            if on_accept is not None:
                on_accept(s, y)
            # several sample points may coincide
            while hit and t_idx < len(targets) and targets[t_idx][0] <= s:
                if targets[t_idx][1]:
                    out.append(y.copy())
                t_idx += 1
            factor = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
            # a shortened landing step says nothing about the natural step size
            h = max(h, step * factor) if hit and step < h else step * factor
        else:
            stats.rejected += 1
            h = step * max(0.2, 0.9 * err_norm ** -0.2)
        h = min(h, cfg.max_step)
    return out, stats


def _combine(weights, k):
    acc = None
    for w, kk in zip(weights, k):
        if w != 0.0:
            acc = w * kk if acc is None else acc + w * kk
    return acc
