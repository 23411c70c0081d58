import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import SINGLE, brute_pauli, brute_sum, expm_i, random_state, single_site_gate
from deltavqe.pauli import CommutingGroup, PauliString, build_model
from deltavqe.statevec import (StateVector, apply_cz, apply_group_evolution, apply_hadamard,
                               apply_pauli_rotation, apply_pauli_string, apply_terms,
                               expectation)

P = PauliString.from_label
R2 = 1 / math.sqrt(2)


def state(*amps):
    n = int(math.log2(len(amps)))
    return StateVector(n, np.array(amps, dtype=complex))


def test_little_endian_bit_flip():
    # X on site 0 of |00> lands on index 1 (site 0 is the least-significant bit)
    s = apply_pauli_string(StateVector.basis(2, 0), P(1, "X0"))
    np.testing.assert_array_equal(s.amplitudes, [0, 1, 0, 0])
    s = apply_pauli_string(StateVector.basis(2, 0), P(1, "X1"))
    np.testing.assert_array_equal(s.amplitudes, [0, 0, 1, 0])


def test_pauli_string_examples():
    s = apply_pauli_string(state(R2, R2), P(1, "Z0"))
    np.testing.assert_allclose(s.amplitudes, [R2, -R2])
    s = apply_pauli_string(state(1, 0), P(1, "Y0"))
    np.testing.assert_allclose(s.amplitudes, [0, 1j])
    # coefficient is ignored
    s = apply_pauli_string(state(1, 0), P(-3.0, "X0"))
    np.testing.assert_allclose(s.amplitudes, [0, 1])


def test_site_out_of_range():
    with pytest.raises(ValueError):
        apply_pauli_string(StateVector.basis(2), P(1, "X2"))
    with pytest.raises(ValueError):
        apply_hadamard(StateVector.basis(2), 2)
    with pytest.raises(ValueError):
        apply_cz(StateVector.basis(2), 1, 1)


def test_rotation_examples():
    psi = state(0.6, 0.8j)
    assert np.array_equal(apply_pauli_rotation(psi.copy(), P(1, "X0"), 0.0).amplitudes,
                          psi.amplitudes)
    th = 0.37
    s = apply_pauli_rotation(StateVector.basis(1), P(1, "X0"), th)
    np.testing.assert_allclose(s.amplitudes, [math.cos(th), 1j * math.sin(th)], atol=1e-15)
    s = apply_pauli_rotation(psi.copy(), P(1, "Z0"), math.pi)
    np.testing.assert_allclose(s.amplitudes, -psi.amplitudes, atol=1e-15)
    with pytest.raises(ValueError):
        apply_pauli_rotation(psi, P(1, "X0"), float("nan"))


def test_gate_examples():
    s = apply_hadamard(StateVector.basis(1), 0)
    np.testing.assert_allclose(s.amplitudes, [R2, R2])
    s = apply_cz(StateVector.basis(2, 3), 0, 1)
    np.testing.assert_allclose(s.amplitudes, [0, 0, 0, -1])
    # |10>: site 1 set, site 0 clear -> index 2
    s = apply_cz(StateVector.basis(2, 2), 0, 1)
    np.testing.assert_allclose(s.amplitudes, [0, 0, 1, 0])


def test_expectation_examples():
    H = build_model("tfim", 8)
    zz, x = H.groups
    zero = StateVector.basis(8)
    assert expectation(zero, zz.terms) == -8
    assert expectation(zero, x.terms) == 0
    plus = StateVector(8, np.full(256, 1 / 16, dtype=complex))
    assert expectation(plus, x.terms) == pytest.approx(-8, abs=1e-12)


# -- dense equivalence at N <= 4 ------------------------------------------------

small_strings = st.integers(2, 4).flatmap(lambda n: st.tuples(
    st.just(n),
    st.dictionaries(st.integers(0, n - 1), st.sampled_from("XYZ"), min_size=1, max_size=n),
    st.floats(-2, 2, allow_nan=False), st.floats(-4, 4, allow_nan=False),
    st.integers(0, 2**32 - 1)))


@settings(max_examples=60, deadline=None)
@given(small_strings)
def test_string_and_rotation_match_dense(case):
    n, factors, coeff, theta, seed = case
    Pstr = PauliString(coeff, tuple(factors.items()))
    psi = random_state(n, np.random.default_rng(seed))
    M = brute_pauli(Pstr, n, with_coefficient=False)

    got = apply_pauli_string(StateVector(n, psi.copy()), Pstr).amplitudes
    np.testing.assert_allclose(got, M @ psi, atol=1e-10)

    got = apply_pauli_rotation(StateVector(n, psi.copy()), Pstr, theta).amplitudes
    np.testing.assert_allclose(got, expm_i(theta * coeff, M) @ psi, atol=1e-10)

    terms = [Pstr, PauliString(0.5, ((0, "Z"),))]
    np.testing.assert_allclose(apply_terms(terms, psi, n), brute_sum(terms, n) @ psi, atol=1e-10)
    dense_exp = np.vdot(psi, brute_sum(terms, n) @ psi).real
    assert expectation(StateVector(n, psi), terms) == pytest.approx(dense_exp, abs=1e-10)


@pytest.mark.parametrize("model,n", [("tfim", 2), ("tfim", 4), ("xz", 3), ("xz", 4),
                                     ("cluster", 3), ("cluster", 4)])
@pytest.mark.parametrize("theta,weight", [(0.3, 1.0), (-1.1, 0.7), (2.0, -1.5)])
def test_group_evolution_matches_dense(model, n, theta, weight, rng):
    H = build_model(model, n)
    for g in H.groups:
        psi = random_state(n, rng)
        got = apply_group_evolution(StateVector(n, psi.copy()), g, weight, theta).amplitudes
        want = expm_i(theta * weight, brute_sum(g.terms, n)) @ psi
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_two_site_zz_group_matches_dense():
    # the two ring bonds of N=2 are both Z0 Z1
    zz = build_model("tfim", 2).groups[0]
    assert [t.to_text() for t in zz.terms] == ["-1.0 * Z0 Z1"] * 2
    M = brute_sum(zz.terms, 2)
    for th in (0.0, 0.25, 1.7):
        s = apply_group_evolution(StateVector(2, np.full(4, 0.5, dtype=complex)), zz, 1.0, th)
        np.testing.assert_allclose(s.amplitudes, expm_i(th, M) @ np.full(4, 0.5), atol=1e-10)


def test_x_group_on_zero_is_product_of_single_qubit_rotations():
    n, th = 4, 0.41
    x = build_model("tfim", n).groups[1]
    got = apply_group_evolution(StateVector.basis(n), x, 1.0, th).amplitudes
    # each factor is exp(-i th X) since coefficients are -1
    single = np.array([math.cos(th), -1j * math.sin(th)])
    want = np.ones(1)
    for _ in range(n):
        want = np.kron(single, want)
    np.testing.assert_allclose(got, want, atol=1e-12)
    U = np.eye(1 << n, dtype=complex)
    for site in range(n):
        U = single_site_gate(expm_i(-th, SINGLE["X"]), site, n) @ U
    np.testing.assert_allclose(got, U[:, 0], atol=1e-12)


def test_hadamard_and_cz_match_dense(rng):
    n = 3
    Hd = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    for site in range(n):
        psi = random_state(n, rng)
        got = apply_hadamard(StateVector(n, psi.copy()), site).amplitudes
        np.testing.assert_allclose(got, single_site_gate(Hd, site, n) @ psi, atol=1e-12)
    for a, b in [(0, 1), (2, 0), (1, 2)]:
        psi = random_state(n, rng)
        diag = [(-1.0 if (i >> a) & 1 and (i >> b) & 1 else 1.0) for i in range(1 << n)]
        got = apply_cz(StateVector(n, psi.copy()), a, b).amplitudes
        np.testing.assert_allclose(got, np.array(diag) * psi, atol=1e-15)


# -- algebraic properties -----------------------------------------------------

def test_norm_preserved_over_long_sequence(rng):
    n = 6
    s = StateVector(n, random_state(n, rng))
    H = build_model("cluster", n)
    ops = 0
    for _ in range(50):
        g = H.groups[rng.integers(2)]
        apply_group_evolution(s, g, 1.0, rng.uniform(-3, 3))
        apply_hadamard(s, int(rng.integers(n)))
        apply_cz(s, 0, 3)
        apply_pauli_string(s, P(1, "Y2 X4"))
        ops += 4
    assert abs(s.norm_sq() - 1) <= 1e-12 * ops


def test_involution_and_composition(rng):
    n = 5
    psi = random_state(n, rng)
    Pstr = P(-0.7, "X0 Y2 Z4")
    s = apply_pauli_string(apply_pauli_string(StateVector(n, psi.copy()), Pstr), Pstr)
    np.testing.assert_allclose(s.amplitudes, psi, atol=1e-12)
    a = apply_pauli_rotation(apply_pauli_rotation(StateVector(n, psi.copy()), Pstr, 0.3), Pstr, 1.2)
    b = apply_pauli_rotation(StateVector(n, psi.copy()), Pstr, 1.5)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_group_term_order_independence(rng):
    n = 6
    for g in build_model("cluster", n).groups + build_model("xz", n).groups:
        psi = random_state(n, rng)
        perm = rng.permutation(len(g.terms))
        shuffled = CommutingGroup(g.label, tuple(g.terms[i] for i in perm))
        a = apply_group_evolution(StateVector(n, psi.copy()), g, 1.3, 0.77)
        b = apply_group_evolution(StateVector(n, psi.copy()), shuffled, 1.3, 0.77)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-10)


def test_expectation_is_real_for_hermitian_terms(rng):
    n = 5
    s = StateVector(n, random_state(n, rng))
    H = build_model("cluster", n)
    terms = [t for g in H.groups for t in g.terms]
    dense = np.vdot(s.amplitudes, brute_sum(terms, n) @ s.amplitudes)
    assert abs(dense.imag) < 1e-12
    assert expectation(s, terms) == pytest.approx(dense.real, abs=1e-10)
