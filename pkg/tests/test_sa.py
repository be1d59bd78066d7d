import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import comb
from scipy.stats import binom, chisquare

from phwo.problems import ParameterError, make_convex_perturbed, make_plain_hw, make_plateau, make_spike
from phwo.sa import (
    SAConfig,
    absorbing_chain_time,
    gibbs_background,
    gibbs_distribution,
    gibbs_expected_hw,
    gibbs_signal,
    plain_hw_chain,
    plain_hw_hitting_time,
    plateau_chain,
    run_sa,
    run_sa_ensemble,
    simulate_chain,
    stefanov_plateau_time,
)


def _pooled_chisquare(observed, expected, min_expected=5.0):
    """Chi-square p-value after merging adjacent bins with small expectation."""
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


def _final_histogram(cost, cfg, seeds):
    w = [r.final_w for r in run_sa_ensemble(cost, cfg, seeds)]
    return np.bincount(w, minlength=cost.n + 1)


def test_config_validation():
    with pytest.raises(ParameterError):
        SAConfig(beta_initial=2.0, beta_final=1.0)
    with pytest.raises(ParameterError):
        SAConfig(sweeps=0)
    with pytest.raises(ParameterError):
        SAConfig(selection="shuffled")
    with pytest.raises(ParameterError):
        SAConfig(mode="best")
    assert SAConfig(beta_initial=0.0, beta_final=9.0, sweeps=10).delta_beta == pytest.approx(1.0)


def test_spin_update_count_and_schedule():
    cfg = SAConfig(beta_initial=0.5, beta_final=5.0, sweeps=10, record_trace=True)
    res = run_sa(make_plateau(20, 0, 4), cfg)
    assert res.spin_updates == 10 * 20
    np.testing.assert_allclose(res.trace[:, 1], np.linspace(0.5, 5.0, 10))
    assert np.all(np.diff(res.trace[:, 3]) <= 0)  # best weight only improves on a monotone slope


def test_deterministic_given_seed():
    cost = make_spike(16)
    cfg = SAConfig(sweeps=50, seed=1234, selection="random")
    assert run_sa(cost, cfg) == run_sa(cost, cfg)


def test_plain_hw_solved():
    cfg = SAConfig(beta_initial=0.1, beta_final=20.0, sweeps=100)
    results = run_sa_ensemble(make_plain_hw(32), cfg, range(100))
    assert np.mean([r.success for r in results]) >= 0.99


@pytest.mark.parametrize("selection", ["random", "sequential"])
def test_infinite_temperature_is_binomial(selection):
    cost = make_plateau(12, 0, 4)
    cfg = SAConfig(beta_initial=0.0, beta_final=0.0, sweeps=25, selection=selection)
    obs = _final_histogram(cost, cfg, range(3000))
    assert _pooled_chisquare(obs, 3000 * binom.pmf(np.arange(13), 12, 0.5)) > 0.01


@pytest.mark.parametrize("selection", ["random", "sequential"])
@pytest.mark.parametrize("cost,beta", [(make_plateau(12, 0, 4), 0.7), (make_convex_perturbed(10), 0.7),
                                       (make_spike(16), 0.2)], ids=["plateau", "convex", "spike"])
def test_fixed_beta_matches_gibbs(cost, beta, selection):
    # the spike barrier needs a hot chain to mix within 40 sweeps
    cfg = SAConfig(beta_initial=beta, beta_final=beta, sweeps=40, selection=selection)
    obs = _final_histogram(cost, cfg, range(3000))
    assert _pooled_chisquare(obs, 3000 * gibbs_distribution(cost, beta)) > 0.01


def test_solver_mode_dominates_annealer_mode():
    cost = make_plateau(24, 0, 3)
    base = SAConfig(beta_initial=0.1, beta_final=5.0, sweeps=30)
    for seed in range(50):
        s = run_sa(cost, SAConfig(**{**base.__dict__, "seed": seed, "mode": "solver"}))
        a = run_sa(cost, SAConfig(**{**base.__dict__, "seed": seed, "mode": "annealer"}))
        assert s.best_w == a.best_w and s.final_w == a.final_w
        assert cost.values[s.best_w] <= cost.values[a.final_w]
        assert s.success >= a.success


def test_stop_at_ground_records_first_hit():
    cfg = SAConfig(beta_initial=3.0, beta_final=3.0, sweeps=10_000, stop_at_ground=True, seed=3)
    res = run_sa(make_plateau(16, 0, 3), cfg)
    assert res.success and res.best_w == 0
    assert res.first_hit is not None and res.first_hit <= res.spin_updates < 10_000 * 16


# --- hitting times ---------------------------------------------------------------


def test_stefanov_single_node():
    assert stefanov_plateau_time(10, 0, 2) == pytest.approx(10.0)


def test_stefanov_zero_width():
    assert stefanov_plateau_time(10, 3, 4) == 0.0


def test_stefanov_matches_linear_solve_example():
    assert stefanov_plateau_time(20, 2, 6) == pytest.approx(absorbing_chain_time(*plateau_chain(20, 2, 6)), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 400).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 2)))
       .flatmap(lambda t: st.tuples(st.just(t[0]), st.just(t[1]), st.integers(t[1] + 2, min(t[0], t[1] + 9)))))
def test_stefanov_matches_linear_solve(nlu):
    n, l, u = nlu
    closed = stefanov_plateau_time(n, l, u)
    assert closed == pytest.approx(absorbing_chain_time(*plateau_chain(n, l, u)), rel=1e-9)


def test_stefanov_leading_order():
    # E tau ~ n^(u-1) (u-1)! / ... at l = 0: the ratio of successive doublings tends to 2^(u-1)
    for u in (2, 3, 4):
        r = stefanov_plateau_time(8192, 0, u) / stefanov_plateau_time(4096, 0, u)
        assert r == pytest.approx(2 ** (u - 1), rel=1e-2)


def _dense_fundamental_time(a, c, start):
    # textbook oracle: solve (I - Q) t = 1 with the full transient matrix
    w = len(a)
    Q = np.zeros((w, w))
    up = np.append(c[1:], 0.0)
    for i in range(w):
        Q[i, i] = 1.0 - a[i] - up[i]
        if i > 0:
            Q[i, i - 1] = a[i]
        if i + 1 < w:
            Q[i, i + 1] = up[i]
    return np.linalg.solve(np.eye(w) - Q, np.ones(w))[start - 1]


@pytest.mark.parametrize("chain", [plateau_chain(20, 2, 6), plateau_chain(50, 3, 8), plain_hw_chain(15, 0.8)],
                         ids=["plateau-small", "plateau", "plain"])
def test_chain_matches_dense_fundamental_matrix(chain):
    a, c = chain
    for start in (1, len(a) // 2 + 1, len(a)):
        assert absorbing_chain_time(a, c, start) == pytest.approx(_dense_fundamental_time(a, c, start), rel=1e-9)


def test_two_node_chain_is_geometric():
    assert absorbing_chain_time([0.3], [0.0]) == pytest.approx(1 / 0.3)


def test_chain_errors():
    with pytest.raises(ParameterError):
        absorbing_chain_time([0.0, 0.5], [0.0, 0.5])
    with pytest.raises(ParameterError):
        absorbing_chain_time([0.9, 0.5], [0.0, 0.6])


def test_chain_against_monte_carlo():
    a, c = plateau_chain(12, 1, 5)
    exact = absorbing_chain_time(a, c)
    times = simulate_chain(a, c, 100_000, np.random.default_rng(11))
    se = times.std(ddof=1) / math.sqrt(times.size)
    assert abs(times.mean() - exact) < 3 * se


def test_plain_hw_hitting_time_zero_temperature():
    assert plain_hw_hitting_time(3, math.inf) == pytest.approx(3 * (1 + 1 / 2 + 1 / 3))


@pytest.mark.parametrize("n,beta,start", [(10, 1.0, "n"), (10, 0.3, "n_half"), (25, 2.0, "n")])
def test_plain_hw_hitting_time_matches_chain(n, beta, start):
    node = n if start == "n" else n // 2
    exact = absorbing_chain_time(*plain_hw_chain(n, beta), start=node)
    assert plain_hw_hitting_time(n, beta, start) == pytest.approx(exact, rel=1e-9)


# --- Gibbs ---------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2000), st.floats(0.0, 40.0))
def test_plain_hw_gibbs_equals_background(n, beta):
    assert gibbs_expected_hw(make_plain_hw(n), beta) == pytest.approx(gibbs_background(n, beta), abs=1e-12 * max(1, n))
    assert abs(gibbs_signal(make_plain_hw(n), beta)) <= 1e-12 * max(1, n)


def test_infinite_temperature_mean():
    for cost in (make_plateau(40, 0, 9), make_spike(40), make_convex_perturbed(41)):
        assert gibbs_expected_hw(cost, 0.0) == pytest.approx(cost.n / 2)


def test_gibbs_distribution_normalized():
    p = gibbs_distribution(make_plateau(30, 0, 6), 1.3)
    assert p.sum() == pytest.approx(1.0)
    logw = np.log(comb(30, np.arange(31))) - 1.3 * make_plateau(30, 0, 6).values
    np.testing.assert_allclose(p, np.exp(logw) / np.exp(logw).sum(), rtol=1e-12)
