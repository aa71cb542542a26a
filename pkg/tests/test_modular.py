import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from chanthermo.algebra import MultiMatrixAlgebra, State
from chanthermo.modular import (StandardForm, araki_entropy, connes_cocycle, modular_automorphism, relative_modular,
                                spatial_derivative, standard_pair, transposed_blocks, vector_rep)
from chanthermo.numerics import SingularityError

import oracles

dims = st.lists(st.integers(1, 3), min_size=1, max_size=2).map(tuple)


@given(dims, st.integers(0, 2 ** 31))
def test_vector_rep_implements_state(block_dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    phi = alg.random_state(rng)
    sf = StandardForm(alg)
    xi = vector_rep(phi)
    x = alg.random_element(rng)
    assert abs(np.vdot(xi, sf.left(x) @ xi) - phi(x)) < 1e-12
    # xi is fixed by J and the left/right actions commute
    assert np.abs(sf.conjugation(xi) - xi).max() < 1e-12
    y = alg.random_element(rng)
    assert np.abs(sf.left(x) @ sf.right(y) - sf.right(y) @ sf.left(x)).max() < 1e-12


@given(dims, st.integers(0, 2 ** 31))
def test_relative_modular_matrix_matches_action(block_dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    phi, psi = alg.random_state(rng), alg.random_state(rng)
    sf = StandardForm(alg)
    d = relative_modular(phi, psi)
    x = alg.random_element(rng)
    assert np.abs(d.matrix() @ sf.vec(x) - sf.vec(d.apply(x))).max() < 1e-9 * max(1, np.abs(d.matrix()).max())
    t = 0.4
    assert np.abs(d.unitary_matrix(t) @ sf.vec(x) - sf.vec(d.unitary(t, x))).max() < 1e-10
    assert np.abs(d.unitary_matrix(t) - scipy.linalg.expm(1j * t * scipy.linalg.logm(d.matrix()))).max() < 1e-8


@given(dims, st.integers(0, 2 ** 31))
def test_modular_flow_implemented_by_delta(block_dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    phi = alg.random_state(rng)
    sf = StandardForm(alg)
    u = relative_modular(phi, phi).unitary_matrix(0.9)
    x = alg.random_element(rng)
    assert np.abs(u @ sf.left(x) @ u.conj().T - sf.left(modular_automorphism(phi, 0.9, x))).max() < 1e-10
    assert np.abs(u @ vector_rep(phi) - vector_rep(phi)).max() < 1e-12


@given(dims, st.integers(0, 2 ** 31))
def test_araki_entropy_matches_trace_formula(block_dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    phi, psi = alg.random_state(rng), alg.random_state(rng)
    s = araki_entropy(phi, psi)
    ref = sum(oracles.relative_entropy(w * r, v * p) for w, r, v, p in
              zip(psi.weights, psi.densities, phi.weights, phi.densities))
    assert abs(s - ref) < 1e-9
    assert s >= -1e-12
    assert abs(araki_entropy(phi, phi)) < 1e-12


def test_araki_entropy_infinite_on_support_violation():
    alg = MultiMatrixAlgebra((2,))
    phi = State(alg, np.array([1.0]), (np.diag([1.0, 0.0]),))
    psi = alg.tracial_state()
    assert araki_entropy(phi, psi) == np.inf


def test_araki_entropy_pure_vs_mixed_qubit():
    alg = MultiMatrixAlgebra((2,))
    psi = State(alg, np.array([1.0]), (np.diag([1.0, 0.0]),))
    # S(tracial | pure) = -log(1/2) on the supported part
    assert abs(araki_entropy(alg.tracial_state(), psi) - np.log(2)) < 1e-12


@given(dims, st.integers(0, 2 ** 31), st.sampled_from([0.3, 1.1]))
def test_connes_cocycle_chain_and_identity(block_dims, seed, t):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    phi, omega, psi = (alg.random_state(rng) for _ in range(3))
    chain = connes_cocycle(phi, omega, t) @ connes_cocycle(omega, psi, t)
    assert chain.distance(connes_cocycle(phi, psi, t)) < 1e-10
    s = 0.6
    lhs = connes_cocycle(phi, psi, s + t)
    rhs = connes_cocycle(phi, psi, s) @ modular_automorphism(psi, s, connes_cocycle(phi, psi, t))
    assert lhs.distance(rhs) < 1e-10


def test_spatial_derivative_on_standard_form_is_relative_modular():
    rng = np.random.default_rng(3)
    alg = MultiMatrixAlgebra((2, 3))
    phi, psi = alg.random_state(rng), alg.random_state(rng)
    d = spatial_derivative(standard_pair(alg), phi, transposed_blocks(psi))
    assert np.abs(d.matrix() - relative_modular(phi, psi).matrix()).max() < 1e-10
    xi = vector_rep(psi)
    assert abs(-d.log_spectrum_expectation(xi) - araki_entropy(phi, psi)) < 1e-10
    assert abs(d.log_spectrum_expectation(xi) - oracles.log_expectation_dense(d.matrix(), xi)) < 1e-9


def test_spatial_derivative_rejects_singular_commutant_state():
    alg = MultiMatrixAlgebra((2,))
    with pytest.raises(SingularityError):
        spatial_derivative(standard_pair(alg), alg.tracial_state(), [np.diag([1.0, 0.0])])
