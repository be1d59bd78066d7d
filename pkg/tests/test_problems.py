import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phwo.problems import (
    CostFunction,
    ParameterError,
    ground_set,
    krawtchouk,
    load_cost_file,
    make_convex_perturbed,
    make_custom,
    make_plain_hw,
    make_plateau,
    make_problem,
    make_spike,
    make_vandam,
    pauli_z_bruteforce,
    pauli_z_expansion,
    reconstruct_from_pauli,
)


def test_plateau_values():
    assert make_plateau(4, 0, 3).values.tolist() == [0, 2, 2, 3, 4]


def test_empty_plateau_is_plain_hw():
    assert make_plateau(4, 0, 1).values.tolist() == [0, 1, 2, 3, 4]


def test_plateau_512_height():
    v = make_plateau(512, 0, 6).values
    assert np.all(v[1:6] == 5)
    assert v[0] == 0 and v[6] == 6


@pytest.mark.parametrize("args", [(4, 3, 3), (4, -1, 2), (4, 0, 5)])
def test_plateau_domain(args):
    with pytest.raises(ParameterError):
        make_plateau(*args)


def test_spike_values():
    v = make_spike(8).values
    assert v[2] == 8
    assert all(v[w] == w for w in range(9) if w != 2)
    assert make_spike(4).values.tolist() == [0, 4, 2, 3, 4]


def test_spike_needs_multiple_of_four():
    with pytest.raises(ParameterError):
        make_spike(6)


def test_convex_values():
    c = make_convex_perturbed(3)
    assert c.values.tolist() == [2, 1, 2, 3]
    assert ground_set(c).weights == (1,)
    assert make_convex_perturbed(2).values.tolist() == [2, 1, 2]
    assert ground_set(make_convex_perturbed(512)).degeneracy == 512


def test_vandam_values():
    assert make_vandam(3).values.tolist() == [0, 1, 2, -1]
    assert make_vandam(1).values.tolist() == [0, -1]
    gs = ground_set(make_vandam(8))
    assert gs.weights == (8,) and gs.degeneracy == 1


def test_ground_sets():
    gs = ground_set(make_plateau(4, 0, 3))
    assert gs.weights == (0,) and gs.degeneracy == 1
    assert ground_set(make_convex_perturbed(3)).degeneracy == 3
    flat = ground_set(make_custom(np.zeros(6)))
    assert flat.weights == tuple(range(6)) and flat.degeneracy == 2**5


def test_cost_function_validation():
    with pytest.raises(ParameterError):
        CostFunction(3, np.zeros(3))
    with pytest.raises(ParameterError):
        CostFunction(2, [0.0, np.nan, 1.0])
    c = make_plain_hw(3)
    with pytest.raises(ValueError):
        c.values[0] = 5.0


def test_make_problem_catalog():
    assert make_problem("convex", 4) == make_convex_perturbed(4)
    assert make_problem("plateau", 8, 0, 3) == make_plateau(8, 0, 3)
    with pytest.raises(ParameterError):
        make_problem("plateau", 8)
    with pytest.raises(ParameterError):
        make_problem("nope", 8)


def test_load_cost_file(tmp_path):
    p = tmp_path / "cost.txt"
    p.write_text("# w value\n0 1.5\n2 0.5\n1 -1\n")
    c = load_cost_file(p)
    assert c.n == 2 and c.values.tolist() == [1.5, -1.0, 0.5]
    p.write_text("0 1\n2 3\n")
    with pytest.raises(ParameterError):
        load_cost_file(p)
    p.write_text("0 1\n0 2\n1 3\n")
    with pytest.raises(ParameterError):
        load_cost_file(p)


def test_pauli_plain_hw_is_one_local():
    np.testing.assert_allclose(pauli_z_expansion(make_plain_hw(2)), [1.0, -0.5, 0.0], atol=1e-15)


def test_pauli_plateau_three_local():
    J = pauli_z_expansion(make_plateau(3, 0, 3))
    assert J[3] == pytest.approx(-3 / 8, abs=1e-15)
    np.testing.assert_allclose(J, pauli_z_bruteforce(make_plateau(3, 0, 3)), atol=1e-15)


def test_pauli_constant():
    np.testing.assert_allclose(pauli_z_expansion(make_custom(np.full(6, 2.5))), [2.5, 0, 0, 0, 0, 0], atol=1e-14)


def test_krawtchouk_orthogonality():
    # sum_w C(n,w) K_j(w) K_k(w) = 2^n C(n,k) delta_jk
    from scipy.special import comb

    n = 7
    K = krawtchouk(n).astype(float)
    c = comb(n, np.arange(n + 1))
    gram = (K * c) @ K.T
    np.testing.assert_allclose(gram, np.diag(2**n * c), atol=1e-9)


cost_vectors = st.integers(1, 16).flatmap(
    lambda n: st.lists(st.floats(-50, 50, allow_nan=False), min_size=n + 1, max_size=n + 1)
)


@settings(max_examples=40, deadline=None)
@given(cost_vectors)
def test_pauli_roundtrip(values):
    cost = make_custom(values)
    back = reconstruct_from_pauli(pauli_z_expansion(cost))
    np.testing.assert_allclose(back, cost.values, atol=1e-10, rtol=0)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 10).flatmap(
    lambda n: st.lists(st.integers(-20, 20), min_size=n + 1, max_size=n + 1)))
def test_pauli_matches_bruteforce(values):
    cost = make_custom(values)
    np.testing.assert_allclose(pauli_z_expansion(cost), pauli_z_bruteforce(cost), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 64).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1)))
       .flatmap(lambda t: st.tuples(st.just(t[0]), st.just(t[1]), st.integers(t[1] + 1, t[0]))))
def test_plateau_shape(nlu):
    n, l, u = nlu
    v = make_plateau(n, l, u).values
    w = np.arange(n + 1)
    inside = (w > l) & (w < u)
    assert np.all(v[inside] == u - 1)
    assert np.all(v[~inside] == w[~inside])
    assert ground_set(make_plateau(n, l, u)).weights == (0,)
