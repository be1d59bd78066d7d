"""Compiled Metropolis sweeps on an explicit bit string.

Random numbers are drawn outside (NumPy Philox) and passed in per chunk of
sweeps, so the kernel itself is deterministic.
"""

import numpy as np
from numba import njit

# state vector layout
W, BEST_W, FIRST_HIT, UPDATES = 0, 1, 2, 3


@njit(cache=True)
def sa_chunk(bits, state, f, ground, beta_start, dbeta, sweep0, n_sweeps,
             random_sel, sel, acc, stop_at_ground, trace):
    """Run ``n_sweeps`` sweeps starting at global sweep index ``sweep0``.

    ``sel[k, j]`` is the spin index for update ``j`` of sweep ``k`` (ignored
    for sequential selection), ``acc[k, j]`` the acceptance uniform.
    ``trace`` rows are ``(beta, w, best_w)`` per sweep (pass a 0-row array to
    skip).  Returns the number of sweeps completed.
    """
    n = bits.size
    w = state[W]
    best = state[BEST_W]
    for k in range(n_sweeps):
        beta = beta_start + (sweep0 + k) * dbeta
        for j in range(n):
            i = sel[k, j] if random_sel else j
            if bits[i] == 1:
                dE = f[w - 1] - f[w]
                step = -1
            else:
                dE = f[w + 1] - f[w]
                step = 1
            state[UPDATES] += 1
            if dE <= 0.0 or acc[k, j] < np.exp(-beta * dE):
                bits[i] ^= 1
                w += step
                if f[w] < f[best]:
                    best = w
                if state[FIRST_HIT] < 0 and ground[w]:
                    state[FIRST_HIT] = state[UPDATES]
                    if stop_at_ground:
                        state[W] = w
                        state[BEST_W] = best
                        if trace.shape[0] > sweep0 + k:
                            trace[sweep0 + k, 0] = beta
                            trace[sweep0 + k, 1] = w
                            trace[sweep0 + k, 2] = best
                        return k + 1
        if trace.shape[0] > sweep0 + k:
            trace[sweep0 + k, 0] = beta
            trace[sweep0 + k, 1] = w
            trace[sweep0 + k, 2] = best
    state[W] = w
    state[BEST_W] = best
    return n_sweeps
