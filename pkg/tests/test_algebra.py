import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanthermo.algebra import (MultiMatrixAlgebra, State, central_atoms, opposite_tensor, validate_state)
from chanthermo.numerics import ValidationError

dims = st.lists(st.integers(1, 4), min_size=1, max_size=3).map(tuple)


def test_dimensions():
    alg = MultiMatrixAlgebra((2, 3))
    assert alg.size == 5 and alg.dimension == 13 and alg.num_blocks == 2
    assert not alg.is_factor() and MultiMatrixAlgebra((4,)).is_factor()
    with pytest.raises(ValidationError):
        MultiMatrixAlgebra((2, 0))


def test_from_matrix_rejects_off_block():
    alg = MultiMatrixAlgebra((1, 1))
    with pytest.raises(ValidationError):
        alg.from_matrix(np.ones((2, 2)))
    x = alg.from_matrix(np.diag([1.0, 2.0]))
    assert np.abs(x.to_matrix() - np.diag([1, 2])).max() == 0


@given(dims, st.integers(0, 2 ** 31))
def test_element_algebra_ops(block_dims, seed):
    rng = np.random.default_rng(seed)
    alg = MultiMatrixAlgebra(block_dims)
    x, y = alg.random_element(rng), alg.random_element(rng)
    assert np.abs((x @ y).to_matrix() - x.to_matrix() @ y.to_matrix()).max() < 1e-12
    assert np.abs(x.adjoint().to_matrix() - x.to_matrix().conj().T).max() == 0
    assert np.abs((x + y - y).to_matrix() - x.to_matrix()).max() < 1e-12
    # opposite reverses products
    assert (x @ y).opposite().distance(y.opposite() @ x.opposite()) < 1e-12


@given(dims, st.integers(0, 2 ** 31))
def test_random_state_is_faithful_and_normalized(block_dims, seed):
    alg = MultiMatrixAlgebra(block_dims)
    phi = alg.random_state(np.random.default_rng(seed))
    assert phi.is_faithful()
    assert abs(phi(alg.identity()) - 1) < 1e-12
    x = alg.random_element(np.random.default_rng(seed + 1))
    assert phi(x.adjoint() @ x).real >= -1e-12


def test_validate_state():
    alg = MultiMatrixAlgebra((2,))
    with pytest.raises(ValidationError):
        validate_state(State(alg, np.array([1.0]), (np.diag([1.5, -0.5]),)))
    s = validate_state(State(alg, np.array([2.0]), (np.diag([2.0, 2.0]),)))
    assert abs(s.weights[0] - 1) < 1e-15 and np.abs(s.densities[0] - np.eye(2) / 2).max() < 1e-15
    with pytest.raises(ValidationError):
        validate_state(State(alg, np.array([1.0]), (np.diag([1.0, 0.0]),)), require_faithful=True)


def test_from_density_folds_weights():
    alg = MultiMatrixAlgebra((1, 2))
    s = State.from_density(alg, [np.array([[0.25]]), np.diag([0.5, 0.25])])
    assert np.abs(s.weights - [0.25, 0.75]).max() < 1e-15


def test_central_atoms_sum_to_identity():
    alg = MultiMatrixAlgebra((2, 1, 3))
    total = alg.zero()
    for p in central_atoms(alg):
        assert (p @ p).distance(p) == 0
        total = total + p
    assert total.distance(alg.identity()) == 0


def test_opposite_tensor():
    m2 = MultiMatrixAlgebra((2,))
    ot = opposite_tensor(m2, m2)
    assert ot.algebra.block_dims == (4,) and ot.algebra.dimension == 16
    rng = np.random.default_rng(0)
    n, m = m2.random_element(rng), m2.random_element(rng)
    # n ⊗ 1 and 1 ⊗ m^o commute
    a, b = ot.embed_left(n), ot.embed_right(m)
    assert (a @ b).distance(b @ a) < 1e-12
    # the right embedding is an anti-homomorphism of M
    m1 = m2.random_element(rng)
    assert ot.embed_right(m @ m1).distance(ot.embed_right(m1) @ ot.embed_right(m)) < 1e-12
    ot2 = opposite_tensor(MultiMatrixAlgebra((1, 2)), MultiMatrixAlgebra((3,)))
    assert ot2.algebra.block_dims == (3, 6)
