import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanthermo.algebra import MultiMatrixAlgebra
from chanthermo.bimodule import Bimodule, conjugate, relative_tensor
from chanthermo.channel import embedding_channel, homomorphism_channel
from chanthermo.index import (InclusionData, bimodule_index, certify_minimality, combined_minimal_expectation,
                              commutant_inclusion, connected_components, expectation, expectation_index,
                              inclusion_matrix, index_curve, is_connected, left_inverse, matrix_dimension,
                              minimal_expectation, relative_commutant_trace_check, scalar_dimension)
from chanthermo.numerics import ValidationError
from chanthermo.suites import random_bimodule

import oracles

seeds = st.integers(0, 2 ** 31)
C2 = MultiMatrixAlgebra((1, 1))


def _connected_matrix(rng, rows, cols, top=3):
    lam = rng.integers(0, top, size=(rows, cols))
    lam[0, :] = np.maximum(lam[0, :], 1)
    lam[:, 0] = np.maximum(lam[:, 0], 1)
    return lam


def test_inclusion_matrices():
    assert inclusion_matrix(embedding_channel(2, 2)).matrix.tolist() == [[2]]
    diag = homomorphism_channel(C2, MultiMatrixAlgebra((2,)), [[(0, 1), (1, 1)]])
    assert inclusion_matrix(diag).matrix.tolist() == [[1], [1]]
    m22 = homomorphism_channel(MultiMatrixAlgebra((2, 2)), MultiMatrixAlgebra((4,)), [[(0, 1), (1, 1)]])
    assert inclusion_matrix(m22).matrix.tolist() == [[1], [1]]
    with pytest.raises(ValidationError):
        InclusionData(C2, np.array([[1, 0], [1, 0]]))


def test_connected_components():
    lam = np.array([[1, 0, 0], [0, 2, 1], [0, 0, 1]])
    assert connected_components(lam) == [([0], [0]), ([1, 2], [1, 2])]
    assert not is_connected(lam)
    assert is_connected(np.array([[1, 2], [1, 1]]))
    assert scalar_dimension(lam) == [1.0, pytest.approx(oracles.pf_norm([[2, 1], [0, 1]]))]


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_scalar_dimension_matches_svd(rows, cols, seed):
    lam = _connected_matrix(np.random.default_rng(seed), rows, cols)
    assert abs(scalar_dimension(lam) - oracles.pf_norm(lam)) < 1e-10
    assert abs(bimodule_index(lam) - oracles.pf_norm(lam) ** 2) < 1e-9


def test_dimension_examples():
    assert bimodule_index(np.array([[2]])) == 4.0
    assert abs(bimodule_index(np.array([[1, 2], [1, 1]])) - (7 + np.sqrt(45)) / 2) < 1e-12
    assert abs(scalar_dimension(np.array([[1], [1]])) - np.sqrt(2)) < 1e-12


@given(seeds)
def test_dimension_conjugation_and_fusion(seed):
    rng = np.random.default_rng(seed)
    a, b, c = MultiMatrixAlgebra((2, 1)), MultiMatrixAlgebra((1, 2)), MultiMatrixAlgebra((2,))
    h = random_bimodule(rng, a, b, _connected_matrix(rng, 2, 2, 2))
    k = random_bimodule(rng, b, c, _connected_matrix(rng, 2, 1, 3))
    assert abs(scalar_dimension(conjugate(h)) - scalar_dimension(h)) < 1e-12
    f = relative_tensor(h, k, b.random_state(rng)).bimodule
    assert np.array_equal(matrix_dimension(f).entries, matrix_dimension(h).entries @ matrix_dimension(k).entries)
    assert scalar_dimension(f) <= scalar_dimension(h) * scalar_dimension(k) + 1e-10
    d = matrix_dimension(h)
    dop = d.operator(h)
    assert np.abs(dop @ dop - h.central_operator(d.entries ** 2)).max() < 1e-10
    x, y = a.random_element(rng), b.random_element(rng)
    assert np.abs(dop @ h.left_action(x) - h.left_action(x) @ dop).max() < 1e-10
    assert np.abs(dop @ h.right_action(y) - h.right_action(y) @ dop).max() < 1e-10


def test_dimension_multiplicative_on_factors():
    rng = np.random.default_rng(0)
    a, b, c = MultiMatrixAlgebra((2,)), MultiMatrixAlgebra((3,)), MultiMatrixAlgebra((1,))
    h, k = random_bimodule(rng, a, b, np.array([[2]])), random_bimodule(rng, b, c, np.array([[3]]))
    f = relative_tensor(h, k, b.random_state(rng)).bimodule
    assert scalar_dimension(f) == scalar_dimension(h) * scalar_dimension(k)


def test_embedding_minimal_expectation_is_partial_trace():
    inc = inclusion_matrix(embedding_channel(2, 3))
    me = minimal_expectation(inc)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    y = inc.ambient.element([np.kron(x, z)])
    assert np.abs(me.expectation(y).blocks[0] - x * np.trace(z) / 3).max() < 1e-12
    assert abs(me.closed_form - 9) < 1e-12
    assert abs(me.index - 9) < 1e-9


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_minimal_expectation_properties(rows, cols, seed):
    rng = np.random.default_rng(seed)
    lam = _connected_matrix(rng, rows, cols, 3)
    sub = MultiMatrixAlgebra(tuple(int(n) for n in rng.integers(1, 3, size=rows)))
    inc = InclusionData(sub, lam)
    me = minimal_expectation(inc)
    e = me.expectation
    amb = inc.ambient
    x, a, b, y = sub.random_element(rng), sub.random_element(rng), sub.random_element(rng), amb.random_element(rng)
    assert e(inc.embed(x)).distance(x) < 1e-10
    assert e(inc.embed(a) @ y @ inc.embed(b)).distance(a @ e(y) @ b) < 1e-10
    assert e(amb.identity()).distance(sub.identity()) < 1e-12
    assert relative_commutant_trace_check(e, rng) < 1e-10
    assert abs(me.closed_form - oracles.pf_norm(lam) ** 2) < 1e-9
    assert abs(me.index - me.closed_form) < 1e-7 * me.closed_form


def test_minimal_expectation_certificate():
    inc = InclusionData(MultiMatrixAlgebra((1, 2)), np.array([[1, 2], [1, 1]]))
    me = minimal_expectation(inc)
    best = certify_minimality(me, np.random.default_rng(0), trials=40)
    assert best >= me.index - 1e-9


def test_index_curve_on_dual_inclusion():
    diag = InclusionData(C2, np.array([[1], [1]]))
    # C ⊕ C ⊂ M_2 has a unique expectation, of index 2
    assert abs(minimal_expectation(diag).index - 2) < 1e-10
    dual = diag.dual()
    assert dual.ambient.block_dims == (2, 2)
    for w in (0.1, 0.3, 0.5, 0.77):
        assert abs(index_curve(dual, w) - oracles.index_curve(w)) < 1e-9
    assert index_curve(dual, 0.0) == np.inf
    assert abs(expectation_index(combined_minimal_expectation(dual)) - 2) < 1e-10


def test_expectation_weight_validation():
    dual = InclusionData(C2, np.array([[1], [1]])).dual()
    with pytest.raises(ValidationError):
        expectation(dual, np.array([[0.3, 0.3]]))
    with pytest.raises(ValidationError):
        expectation(InclusionData(C2, np.array([[1, 0], [1, 1]])), np.array([[0.5, 0.5], [0.5, 0.5]]))


def test_disconnected_minimal_expectation_per_component():
    inc = InclusionData(MultiMatrixAlgebra((2, 1)), np.array([[1, 0], [0, 3]]))
    parts = minimal_expectation(inc)
    assert [p.closed_form for p in parts] == [1.0, 9.0]
    e = combined_minimal_expectation(inc)
    assert np.allclose(e.weights, [[1, 0], [0, 1]])


@given(seeds)
def test_left_inverse(seed):
    rng = np.random.default_rng(seed)
    a, b = MultiMatrixAlgebra((2, 1)), MultiMatrixAlgebra((2, 2))
    h = random_bimodule(rng, a, b, _connected_matrix(rng, 2, 2, 3))
    ci = commutant_inclusion(h)
    phi = left_inverse(h)
    x = a.random_element(rng)
    assert np.abs(ci.to_operator(ci.inclusion.embed(x)) - h.left_action(x)).max() < 1e-10
    assert phi(ci.inclusion.embed(x)).distance(x) < 1e-10
    z = ci.inclusion.ambient.random_element(rng)
    op = ci.to_operator(z)
    y = b.random_element(rng)
    assert np.abs(op @ h.right_action(y) - h.right_action(y) @ op).max() < 1e-10
    assert ci.to_element(op).distance(z) < 1e-10
    with pytest.raises(ValidationError):
        ci.to_element(h.right_action(y) + h.left_action(x))
