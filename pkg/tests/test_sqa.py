from dataclasses import replace
from functools import reduce

import numpy as np
import pytest
from scipy.stats import chisquare

from phwo._sqa_kernel import sqa_chunk
from phwo.problems import ParameterError, make_plain_hw, make_plateau
from phwo.sa import gibbs_distribution
from phwo.sqa import PathConfiguration, SQAConfig, couplings, run_sqa, run_sqa_ensemble


def _pooled_chisquare(observed, expected, min_expected=5.0):
    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    obs_bins[-1] += o_acc
    exp_bins[-1] += e_acc
    return chisquare(obs_bins, exp_bins).pvalue


def _exact_slice_law(cost, cfg, s):
    """Weight law of one Trotter slice from the 2^n transfer matrix of the sampled action."""
    n = cost.n
    delta, j = couplings(s, cfg)
    t = np.array([[np.exp(j), np.exp(-j)], [np.exp(-j), np.exp(j)]])
    TD = reduce(np.kron, [t] * n)
    w = np.array([bin(v).count("1") for v in range(2**n)])
    TP = np.diag(np.exp(-delta * cost.values[w]))
    diag = np.diag(np.linalg.matrix_power(TP @ TD, cfg.n_tau))
    law = np.bincount(w, weights=diag, minlength=n + 1)
    return law / law.sum()


def _final_weights(cost, cfg, seeds):
    return np.bincount([r.final_w for r in run_sqa_ensemble(cost, cfg, seeds)], minlength=cost.n + 1)


def test_coupling_example():
    delta, j = couplings(0.5, SQAConfig(beta=30, n_tau=64))
    assert delta == pytest.approx(0.234375)
    assert j == pytest.approx(-0.5 * np.log(np.tanh(0.25)))
    assert j == pytest.approx(0.7034, abs=1e-4)


def test_coupling_endpoints():
    cfg = SQAConfig()
    assert couplings(0.0, cfg).delta == 0.0
    end = couplings(1.0, cfg)
    assert end.capped and end.j_perp == cfg.j_cap
    assert couplings(1 - 1e-30, cfg).capped
    assert not couplings(0.99, cfg).capped
    with pytest.raises(ParameterError):
        couplings(1.5, cfg)


def test_config_validation():
    with pytest.raises(ParameterError):
        SQAConfig(n_tau=1)
    with pytest.raises(ParameterError):
        SQAConfig(beta=0)
    with pytest.raises(ParameterError):
        SQAConfig(s_initial=0.6, s_final=0.4)
    np.testing.assert_allclose(SQAConfig(sweeps=5).schedule(), [0, 0.25, 0.5, 0.75, 1.0])


def test_path_weights_consistent_after_run():
    res = run_sqa(make_plateau(10, 0, 3), SQAConfig(sweeps=50, n_tau=16, seed=5), keep_path=True)
    assert res.path.consistent()
    assert set(np.unique(res.path.spins)) <= {-1, 1}
    assert res.sweeps == 50
    assert 1.0 <= res.mean_cluster_size <= 16.0
    assert res.spin_updates == pytest.approx(res.mean_cluster_size * 50 * 10)


def test_deterministic_given_seed():
    cost = make_plateau(12, 0, 4)
    cfg = SQAConfig(sweeps=40, n_tau=8, seed=99)
    a, b = run_sqa(cost, cfg), run_sqa(cost, cfg)
    assert (a.best_w, a.final_w, a.spin_updates) == (b.best_w, b.final_w, b.spin_updates)


def _one_sweep(bits, delta, p_add, rng):
    n, n_tau = bits.shape
    weights = bits.sum(axis=0).astype(np.int64)
    f = np.arange(n + 1, dtype=float)
    state = np.array([-1, 0, 0], dtype=np.int64)
    best = np.array([int(weights[0])], dtype=np.int64)
    ground = np.zeros(n + 1, dtype=np.bool_)
    uni = rng.random((1, n, n_tau + 3))
    sqa_chunk(bits, weights, state, best, f, ground, np.array([delta]), np.array([p_add]),
              0, 1, uni, False, np.zeros((0, 3)))
    return state, weights


def test_clusters_are_contiguous_parallel_arcs():
    rng = np.random.default_rng(0)
    n_tau = 16
    for _ in range(300):
        before = rng.integers(0, 2, size=(1, n_tau), dtype=np.uint8)
        after = before.copy()
        _one_sweep(after, 0.0, float(rng.uniform(0.2, 1.0)), rng)  # delta = 0 accepts every flip
        flipped = np.flatnonzero(before[0] != after[0])
        assert flipped.size >= 1
        assert np.all(before[0, flipped] == before[0, flipped[0]])
        # on the ring the flipped slices form one arc: at most one gap between them
        gaps = np.diff(np.append(flipped, flipped[0] + n_tau))
        assert np.sum(gaps > 1) <= 1


def test_zero_coupling_gives_single_spin_clusters():
    rng = np.random.default_rng(1)
    bits = np.zeros((6, 12), dtype=np.uint8)
    state, weights = _one_sweep(bits, 0.0, 0.0, rng)
    assert state[1] == state[2] == 6  # six clusters, six spins
    assert np.array_equal(weights, bits.sum(axis=0))


@pytest.mark.parametrize("s", [0.3, 0.6, 0.9])
def test_fixed_s_matches_transfer_matrix(s):
    cost = make_plateau(5, 0, 3)
    cfg = SQAConfig(beta=6.0, n_tau=8, sweeps=60, mode="annealer", s_initial=s, s_final=s)
    obs = _final_weights(cost, cfg, range(3000))
    assert _pooled_chisquare(obs, 3000 * _exact_slice_law(cost, cfg, s)) > 0.01


def test_capped_coupling_reduces_to_classical_gibbs():
    # at s = 1 the coupling sits at the cap, the world lines straighten and
    # whole-line flips sample exp(-beta B f) like fixed-temperature SA
    cost = make_plateau(8, 0, 3)
    cfg = SQAConfig(beta=1.0, n_tau=8, sweeps=400, mode="annealer", s_initial=1.0, s_final=1.0)
    obs = _final_weights(cost, cfg, range(3000))
    assert _pooled_chisquare(obs, 3000 * gibbs_distribution(cost, 1.0)) > 0.01


def test_anneal_solves_plain_hw():
    results = run_sqa_ensemble(make_plain_hw(16), SQAConfig(sweeps=200, n_tau=16), range(20))
    assert all(r.success for r in results)


def test_solver_mode_never_worse_than_annealer():
    cost = make_plateau(16, 0, 4)
    base = SQAConfig(sweeps=30, n_tau=8, beta=10.0)
    for seed in range(20):
        s = run_sqa(cost, replace(base, seed=seed, mode="solver"))
        a = run_sqa(cost, replace(base, seed=seed, mode="annealer"))
        assert cost.values[s.best_w] <= cost.values[a.final_w]
        assert s.success >= a.success


def test_stop_at_ground_and_trace():
    cfg = SQAConfig(sweeps=500, n_tau=8, stop_at_ground=True, record_trace=True, seed=2)
    res = run_sqa(make_plateau(12, 0, 3), cfg)
    assert res.success and res.first_hit is not None
    assert res.sweeps < 500
    assert res.trace.shape == (res.sweeps, 4)
    np.testing.assert_allclose(res.trace[:, 1], cfg.schedule()[: res.sweeps])


def test_random_path_configuration():
    p = PathConfiguration.random(7, 5, np.random.default_rng(3))
    assert p.bits.shape == (7, 5) and p.consistent()
