import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanthermo.algebra import MultiMatrixAlgebra
from chanthermo.channel import (bilinear_form, channel_from_kraus, compose, depolarizing_channel, embedding_channel,
                                homomorphism_channel, hybrid_channel, identity_channel, kraus_decompose, output_state,
                                random_channel, random_faithful_channel, random_kraus, stinespring_dilate,
                                trace_channel, transpose_channel, transpose_map, unitary_channel, validate_channel)
from chanthermo.numerics import ValidationError, random_unitary

import oracles

dims = st.lists(st.integers(1, 3), min_size=1, max_size=2).map(tuple)


def test_depolarizing_action():
    a = depolarizing_channel(0.5)
    x = a.source.element([np.array([[1, 2], [3, 4]])])
    expected = 0.5 * np.array([[1, 2], [3, 4]]) + 0.5 * 5 / 2 * np.eye(2)
    assert np.abs(a(x).blocks[0] - expected).max() < 1e-14
    assert kraus_decompose(a).rank == 4


def test_trace_and_identity_ranks():
    assert kraus_decompose(trace_channel(2)).rank == 4
    assert kraus_decompose(identity_channel(MultiMatrixAlgebra((2, 1)))).rank == 2
    assert kraus_decompose(embedding_channel(2, 2)).rank == 2


def test_transpose_map_is_rejected():
    with pytest.raises(ValidationError):
        validate_channel(transpose_map(2))


def test_non_unital_kraus_rejected():
    alg = MultiMatrixAlgebra((2,))
    with pytest.raises(ValidationError):
        validate_channel(channel_from_kraus(alg, alg, [np.diag([1.0, 0.5])]))


def test_homomorphism_embedding_checks():
    with pytest.raises(ValidationError):
        homomorphism_channel(MultiMatrixAlgebra((2,)), MultiMatrixAlgebra((3,)), [[(0, 1)]])
    h = hybrid_channel()
    x = h.source.element([np.array([[1, 2], [3, 4]])])
    y = h(x)
    assert np.abs(y.blocks[0] - x.blocks[0]).max() == 0
    assert np.abs(y.blocks[1] - np.kron(x.blocks[0], np.eye(2))).max() == 0


@given(dims, dims, st.integers(1, 3), st.integers(0, 2 ** 31))
def test_random_channel_contracts(src_dims, tgt_dims, rank, seed):
    rng = np.random.default_rng(seed)
    src, tgt = MultiMatrixAlgebra(src_dims), MultiMatrixAlgebra(tgt_dims)
    alpha = random_faithful_channel(src, tgt, rank, rng)
    x = src.random_element(rng)
    ref = oracles.choi_apply(alpha.choi, src_dims, tgt_dims, x.blocks)
    assert max(np.abs(a - b).max() for a, b in zip(alpha(x).blocks, ref)) < 1e-12
    assert alpha(src.identity()).distance(tgt.identity()) < 1e-10
    # trace duality
    y = tgt.random_element(rng)
    lhs = sum(np.trace(a @ b) for a, b in zip(alpha(x).blocks, y.blocks))
    rhs = sum(np.trace(a @ b) for a, b in zip(x.blocks, alpha.dual(y).blocks))
    assert abs(lhs - rhs) < 1e-10
    # Kadison-Schwarz
    lhs = alpha(x.adjoint() @ x) - alpha(x).adjoint() @ alpha(x)
    assert min(np.linalg.eigvalsh(b).min() for b in lhs.blocks) > -1e-10


@given(dims, dims, st.integers(1, 3), st.integers(0, 2 ** 31))
def test_kraus_and_dilation_roundtrip(src_dims, tgt_dims, rank, seed):
    rng = np.random.default_rng(seed)
    src, tgt = MultiMatrixAlgebra(src_dims), MultiMatrixAlgebra(tgt_dims)
    alpha = random_faithful_channel(src, tgt, rank, rng)
    ks = kraus_decompose(alpha)
    assert ks.unitality_residual() < 1e-9
    assert ks.rank == alpha.choi_rank()
    assert channel_from_kraus(src, tgt, ks.operators).distance(alpha) < 1e-9
    dil = stinespring_dilate(alpha)
    assert dil.environment_dim == alpha.choi_rank()
    v = dil.isometry
    assert np.abs(v.conj().T @ v - np.eye(tgt.size)).max() < 1e-9
    x = src.random_element(rng)
    assert np.abs(dil.compress(x) - alpha(x).to_matrix()).max() < 1e-9


def test_random_kraus_infeasible_rank():
    with pytest.raises(ValidationError):
        random_kraus(MultiMatrixAlgebra((1,)), MultiMatrixAlgebra((3,)), 1, np.random.default_rng(0))


def test_rank_one_qubit_channel_is_unitary():
    alpha = random_channel(MultiMatrixAlgebra((2,)), MultiMatrixAlgebra((2,)), 1, np.random.default_rng(4))
    t = kraus_decompose(alpha).operators[0]
    assert np.abs(t @ t.conj().T - np.eye(2)).max() < 1e-10


def test_unitary_channel_and_composition():
    rng = np.random.default_rng(5)
    alg = MultiMatrixAlgebra((3,))
    u = random_unitary(3, rng)
    a = unitary_channel(u, alg)
    b = unitary_channel(u.conj().T, alg)
    assert compose(b, a).distance(identity_channel(alg)) < 1e-12


@given(dims, dims, st.integers(0, 2 ** 31))
def test_transpose_channel_pairing(src_dims, tgt_dims, seed):
    rng = np.random.default_rng(seed)
    src, tgt = MultiMatrixAlgebra(src_dims), MultiMatrixAlgebra(tgt_dims)
    alpha = random_faithful_channel(src, tgt, 2, rng)
    phi_in = tgt.random_state(rng)
    phi_out = output_state(alpha, phi_in)
    beta = validate_channel(transpose_channel(alpha, phi_in))
    n, m = src.random_element(rng), tgt.random_element(rng)
    assert abs(bilinear_form(phi_in, alpha(n), m) - bilinear_form(phi_out, beta(m), n)) < 1e-10
    back = output_state(beta, phi_out)
    assert np.abs(back.weights - phi_in.weights).max() < 1e-10
    # the transpose of the transpose is the channel again
    assert transpose_channel(beta, phi_out).distance(alpha) < 1e-8


def test_output_state_of_hybrid():
    h = hybrid_channel()
    phi = h.target.random_state(np.random.default_rng(6))
    out = output_state(h, phi)
    expected = phi.weights[0] * phi.densities[0] + phi.weights[1] * np.einsum("aibi->ab", phi.densities[1].reshape(2, 2, 2, 2))
    assert np.abs(out.densities[0] - expected).max() < 1e-12
