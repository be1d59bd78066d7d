"""Compiled embedded Runge-Kutta loop specialised to the tridiagonal QA system.

Step-for-step the same algorithm as :func:`phwo.integrate.integrate` (same
tableaus, error norm, step controller and landing rule), without the Python
overhead per stage.  Kept separate so the pure-Python route can serve as a
cross-check.
"""

import numpy as np
from numba import njit

from .integrate import TABLEAUS


def tableau_arrays(method):
    tab = TABLEAUS[method]
    m = len(tab.c)
    A = np.zeros((m, m))
    for i, row in enumerate(tab.a):
        A[i, : len(row)] = row
    return tab.c.copy(), A, tab.b_high.copy(), tab.b_low.copy(), tab.fsal


@njit(cache=True)
def _rhs(s, psi, f, hop, half_n, t_f, out):
    a = 1.0 - s
    m = psi.size
    cf = -1j * t_f
    t_scale = -0.5 * a
    for w in range(m):
        acc = (a * half_n + s * f[w]) * psi[w]
        if w > 0:
            acc += t_scale * hop[w - 1] * psi[w - 1]
        if w < m - 1:
            acc += t_scale * hop[w] * psi[w + 1]
        out[w] = cf * acc


@njit(cache=True)
def _wrms(v, scale):
    acc = 0.0
    for i in range(v.size):
        r = abs(v[i]) / scale[i]
        acc += r * r
    return np.sqrt(acc / v.size)


@njit(cache=True)
def evolve_tridiagonal(psi0, f, hop, t_f, c, A, b5, b4, fsal, rtol, atol,
                       max_step, min_step, max_steps, targets, is_sample):
    """Returns (samples, n_samples, accepted, rejected, max_drift, status, s_reached)."""
    m = psi0.size
    stages = c.size
    half_n = (m - 1) / 2.0
    k = np.zeros((stages, m), dtype=np.complex128)
    y = psi0.copy()
    ytmp = np.zeros(m, dtype=np.complex128)
    ynew = np.zeros(m, dtype=np.complex128)
    err = np.zeros(m, dtype=np.complex128)
    scale = np.zeros(m)
    f0 = np.zeros(m, dtype=np.complex128)
    f1 = np.zeros(m, dtype=np.complex128)
    n_samples = 0
    for i in range(is_sample.size):
        if is_sample[i]:
            n_samples += 1
    samples = np.zeros((n_samples, m), dtype=np.complex128)
    out_idx = 0
    accepted = 0
    rejected = 0
    drift = 0.0
    s = 0.0
    s1 = 1.0

    _rhs(s, y, f, hop, half_n, t_f, f0)
    # initial step heuristic (same as the Python integrator)
    for i in range(m):
        scale[i] = atol + rtol * abs(y[i])
    d0 = _wrms(y, scale)
    d1 = _wrms(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, s1 - s)
    for i in range(m):
        ytmp[i] = y[i] + h0 * f0[i]
    _rhs(s + h0, ytmp, f, hop, half_n, t_f, f1)
    for i in range(m):
        ytmp[i] = f1[i] - f0[i]
    d2 = _wrms(ytmp, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(min(100 * h0, h1), s1 - s)
    h = min(h, max_step)

    t_idx = 0
    for i in range(m):
        k[0, i] = f0[i]
    while s < s1:
        target = targets[t_idx]
        if accepted + rejected >= max_steps:
            return samples, out_idx, accepted, rejected, drift, 1, s
        if h < min_step * max(1.0, abs(s)):
            return samples, out_idx, accepted, rejected, drift, 2, s
        hit = s + h >= target - 1e-14 * max(1.0, abs(target))
        step = target - s if hit else h

        for st in range(1, stages):
            for i in range(m):
                acc = A[st, 0] * k[0, i]
                for j in range(1, st):
                    if A[st, j] != 0.0:
                        acc += A[st, j] * k[j, i]
                ytmp[i] = y[i] + step * acc
            _rhs(s + c[st] * step, ytmp, f, hop, half_n, t_f, k[st])

        for i in range(m):
            acc = 0.0j
            e = 0.0j
            for j in range(stages):
                if fsal:
                    if j < stages - 1 and A[stages - 1, j] != 0.0:
                        acc += A[stages - 1, j] * k[j, i]
                elif b5[j] != 0.0:
                    acc += b5[j] * k[j, i]
                d = b5[j] - b4[j]
                if d != 0.0:
                    e += d * k[j, i]
            ynew[i] = y[i] + step * acc
            err[i] = step * e
            scale[i] = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        err_norm = _wrms(err, scale)

        if err_norm <= 1.0:
            accepted += 1
            s = target if hit else s + step
            for i in range(m):
                y[i] = ynew[i]
            if fsal:
                for i in range(m):
                    k[0, i] = k[stages - 1, i]
            else:
                _rhs(s, y, f, hop, half_n, t_f, f0)
                for i in range(m):
                    k[0, i] = f0[i]
            nrm = 0.0
            for i in range(m):
                nrm += y[i].real * y[i].real + y[i].imag * y[i].imag
            if abs(nrm - 1.0) > drift:
                drift = abs(nrm - 1.0)
            while hit and t_idx < targets.size and targets[t_idx] <= s:
                if is_sample[t_idx]:
                    for i in range(m):
                        samples[out_idx, i] = y[i]
                    out_idx += 1
                t_idx += 1
            if err_norm == 0.0:
                factor = 5.0
            else:
                factor = min(5.0, 0.9 * err_norm ** -0.2)
            if hit and step < h:
                h = max(h, step * factor)
            else:
                h = step * factor
        else:
            rejected += 1
            h = step * max(0.2, 0.9 * err_norm ** -0.2)
        h = min(h, max_step)
    return samples, out_idx, accepted, rejected, drift, 0, s
