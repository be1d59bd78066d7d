"""Compiled imaginary-time Wolff sweeps for path-integral Monte Carlo."""

import numpy as np
from numba import njit

# state vector layout
FIRST_HIT, UPDATES, CLUSTERS = 0, 1, 2


@njit(cache=True)
def sqa_chunk(spins, weights, state, best_w, f, ground, deltas, add_probs,
              sweep0, n_sweeps, uni, stop_at_ground, trace):
    """Run ``n_sweeps`` sweeps; ``spins`` is ``(n, n_tau)`` of 0/1.

    ``deltas[k]`` and ``add_probs[k]`` hold the problem weight and the
    cluster-add probability for global sweep ``k``.  ``uni[k, i]`` supplies
    the uniforms for site ``i``: slot 0 picks the seed slice, slot 1 is the
    Metropolis draw, the rest feed the cluster growth.  ``best_w[0]`` holds
    the lowest-energy slice weight seen.  ``trace`` rows are
    ``(s-index, min slice energy, mean cluster size)``.
    """
    n, n_tau = spins.shape
    for k in range(n_sweeps):
        g = sweep0 + k
        delta = deltas[g]
        p_add = add_probs[g]
        sweep_cluster_total = 0
        for i in range(n):
            u = uni[k, i]
            t0 = int(u[0] * n_tau)
            if t0 >= n_tau:
                t0 = n_tau - 1
            spin0 = spins[i, t0]
            slot = 2
            right = 0
            while right < n_tau - 1:
                t = (t0 + right + 1) % n_tau
                if spins[i, t] != spin0:
                    break
                r = u[slot]
                slot += 1
                if r >= p_add:
                    break
                right += 1
            left = 0
            while right + left < n_tau - 1:
                t = (t0 - left - 1) % n_tau
                if spins[i, t] != spin0:
                    break
                r = u[slot]
                slot += 1
                if r >= p_add:
                    break
                left += 1
            size = right + left + 1
            sweep_cluster_total += size
            state[UPDATES] += size
            state[CLUSTERS] += 1
            step = -1 if spin0 == 1 else 1
            dS = 0.0
            for m in range(-left, right + 1):
                wt = weights[(t0 + m) % n_tau]
                dS += f[wt + step] - f[wt]
            dS *= delta
            if dS <= 0.0 or u[1] < np.exp(-dS):
                for m in range(-left, right + 1):
                    t = (t0 + m) % n_tau
                    spins[i, t] = 1 - spin0
                    weights[t] += step
                    wt = weights[t]
                    if f[wt] < f[best_w[0]]:
                        best_w[0] = wt
                    if state[FIRST_HIT] < 0 and ground[wt]:
                        state[FIRST_HIT] = state[UPDATES]
                if stop_at_ground and state[FIRST_HIT] >= 0:
                    _record(trace, g, weights, f, sweep_cluster_total / (i + 1))
                    return k + 1
        _record(trace, g, weights, f, sweep_cluster_total / n)
    return n_sweeps


@njit(cache=True)
def _record(trace, g, weights, f, mean_size):
    if trace.shape[0] > g:
        e = f[weights[0]]
        for t in range(weights.size):
            if f[weights[t]] < e:
                e = f[weights[t]]
        trace[g, 0] = g
        trace[g, 1] = e
        trace[g, 2] = mean_size
