import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phwo.problems import ParameterError, make_custom, make_plain_hw, make_plateau
from phwo.spectral import (
    adiabatic_numerator,
    adiabatic_time_estimate,
    build,
    dense_matrix,
    min_gap,
    q_of_s,
    reichardt_lower_bound,
    spectrum,
    unperturbed_gap,
)


def test_build_driver_endpoint():
    H = build(make_plain_hw(2), 0.0)
    np.testing.assert_allclose(H.diag, [1, 1, 1])
    np.testing.assert_allclose(H.offdiag, [-np.sqrt(2) / 2] * 2)


def test_build_problem_endpoint():
    c = make_plateau(6, 0, 3)
    H = build(c, 1.0)
    assert np.all(H.offdiag == 0)
    np.testing.assert_array_equal(H.diag, c.values)


def test_build_midpoint_diag():
    assert build(make_plateau(4, 0, 3), 0.5).diag[1] == pytest.approx(2.0)


def test_two_level_spectrum():
    sl = spectrum(build(make_plain_hw(1), 0.5), 2)
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(sl.eigenvalues, [(1 - r) / 2, (1 + r) / 2], atol=1e-14)
    assert sl.gap == pytest.approx(r, abs=1e-14)


def test_endpoint_spectrum_sorted_values():
    c = make_custom([3.0, -1.0, 2.0, 0.5])
    np.testing.assert_allclose(spectrum(build(c, 1.0), 4).eigenvalues, np.sort(c.values))


def test_spectrum_against_dense_symmetric_block():
    H = build(make_plateau(8, 0, 3), 0.5)
    ref = np.linalg.eigvalsh(H.dense())[:3]
    np.testing.assert_allclose(spectrum(H, 3).eigenvalues, ref, rtol=1e-10, atol=1e-12)


def test_symmetric_levels_appear_in_full_space():
    c = make_plateau(6, 0, 3)
    full = np.linalg.eigvalsh(dense_matrix(c, 0.4))
    for e in spectrum(build(c, 0.4), 3).eigenvalues:
        assert np.min(np.abs(full - e)) < 1e-10


def test_spectrum_k_range():
    H = build(make_plain_hw(3), 0.3)
    with pytest.raises(ParameterError):
        spectrum(H, 5)
    with pytest.raises(ParameterError):
        spectrum(H, 0)


def test_eigenvectors_returned_orthonormal():
    sl = spectrum(build(make_plateau(10, 0, 4), 0.6), 4, want_vectors=True)
    V = sl.eigenvectors
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-12)


def test_q_and_delta_endpoints():
    assert q_of_s(0.0) == pytest.approx(0.5)
    assert q_of_s(1.0) == pytest.approx(0.0)
    assert unperturbed_gap(0.0) == unperturbed_gap(1.0) == 1.0


def test_plain_hw_min_gap():
    s, g = min_gap(make_plain_hw(1))
    assert s == pytest.approx(0.5, abs=1e-7)
    assert g == pytest.approx(1 / np.sqrt(2), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 2, 5, 8, 33, 64, 256]), st.floats(0.0, 1.0))
def test_plain_hw_gap_closed_form(n, s):
    assert spectrum(build(make_plain_hw(n), s), 2).gap == pytest.approx(float(unperturbed_gap(s)), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20).flatmap(
    lambda n: st.lists(st.floats(-10, 10, allow_nan=False), min_size=n + 1, max_size=n + 1)),
    st.floats(0.0, 1.0))
def test_tridiagonal_matches_dense(values, s):
    H = build(make_custom(values), s)
    k = min(3, H.n + 1)
    ref = np.linalg.eigvalsh(H.dense())[:k]
    np.testing.assert_allclose(spectrum(H, k).eigenvalues, ref, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_reichardt_zero_perturbation():
    c = make_plateau(64, 10, 11)
    for s in (0.1, 0.5, 0.9):
        assert reichardt_lower_bound(c, s) == pytest.approx(float(unperturbed_gap(s)), abs=1e-15)


def test_reichardt_bound_below_gap():
    c = make_plateau(512, 128, 134)
    bound = reichardt_lower_bound(c, 0.5)
    assert bound <= spectrum(build(c, 0.5), 2).gap


def test_reichardt_needs_positive_l():
    with pytest.raises(ParameterError):
        reichardt_lower_bound(make_plateau(64, 0, 6), 0.5)


@pytest.mark.parametrize("s", [0.0, 0.2, 0.5, 0.77, 1.0])
def test_adiabatic_numerator_two_level(s):
    # H(s) = const + hz Z + hx X with hz = -s/2, hx = -(1-s)/2 and dH = (-Z + X)/2,
    # so |<e0|dH|e1>| = 1 / (2 sqrt(1 - 2s + 2s^2))
    expected = 0.5 / np.sqrt(1 - 2 * s + 2 * s * s)
    assert adiabatic_numerator(make_plain_hw(1), s) == pytest.approx(expected, rel=1e-12)


def test_adiabatic_estimate_grid_must_cover_unit_interval():
    with pytest.raises(ParameterError):
        adiabatic_time_estimate(make_plain_hw(4), s_grid=np.linspace(0.1, 1.0, 11))


def test_adiabatic_estimate_plain_hw():
    est = adiabatic_time_estimate(make_plain_hw(1))
    # numerator / gap^2 = 1 / (2 Delta^3), largest where Delta is smallest
    assert est.time == pytest.approx(1 / (2 * 2**-1.5), rel=1e-6)
    assert est.s_at_max == pytest.approx(0.5, abs=1e-4)
    assert est.coarse_bound == pytest.approx(2.0, rel=1e-6)
