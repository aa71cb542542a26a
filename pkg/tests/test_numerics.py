import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from chanthermo.numerics import (SingularityError, ValidationError, fix_phase, func_calc, herm_eig, pf_eigen,
                                 psd_rank, random_unitary)

import oracles


def rand_pd(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g @ g.conj().T + 0.1 * np.eye(n)


def test_herm_eig_reconstructs():
    rng = np.random.default_rng(0)
    a = rand_pd(5, rng)
    spec = herm_eig(a)
    assert np.abs(spec.reconstruct() - a).max() < 1e-12
    assert np.all(np.diff(spec.eigenvalues) >= 0)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        herm_eig(np.array([[1, 2], [0, 1]]))
    with pytest.raises(ValidationError):
        herm_eig(np.ones((2, 3)))
    with pytest.raises(ValidationError):
        herm_eig(np.array([[np.nan, 0], [0, 1]]))


def test_fix_phase_makes_pivot_positive():
    rng = np.random.default_rng(1)
    v = random_unitary(4, rng)
    w = fix_phase(v)
    pivots = w[np.argmax(np.abs(w), axis=0), np.arange(4)]
    assert np.abs(pivots.imag).max() < 1e-14 and np.all(pivots.real > 0)


def test_func_calc_against_scipy():
    rng = np.random.default_rng(2)
    a = rand_pd(4, rng)
    assert np.abs(func_calc(a, "log") - scipy.linalg.logm(a)).max() < 1e-10
    assert np.abs(func_calc(a, "sqrt") - scipy.linalg.sqrtm(a)).max() < 1e-10
    assert np.abs(func_calc(a, "exp") - scipy.linalg.expm(a)).max() < 1e-8 * np.abs(scipy.linalg.expm(a)).max()
    assert np.abs(func_calc(a, "inv") - np.linalg.inv(a)).max() < 1e-10
    t = 0.7
    assert np.abs(func_calc(a, "ipow", t) - scipy.linalg.expm(1j * t * scipy.linalg.logm(a))).max() < 1e-10


def test_func_calc_singular_raises():
    a = np.diag([1.0, 0.0])
    with pytest.raises(SingularityError):
        func_calc(a, "log")
    with pytest.raises(SingularityError):
        func_calc(a, "inv")
    assert np.abs(func_calc(a, "sqrt") - a).max() < 1e-15


def test_psd_rank():
    assert psd_rank(np.diag([1.0, 1e-13, 0.5])) == 2


def test_pf_examples():
    pf = pf_eigen(np.array([[1, 1], [1, 0]]))
    assert abs(pf.norm - (1 + 5 ** 0.5) / 2) < 1e-12
    assert abs(pf_eigen(np.array([[2]])).norm - 2) < 1e-14
    assert abs(pf_eigen(np.array([[1], [1]])).norm - 2 ** 0.5) < 1e-12


def test_pf_rejects_bad_input():
    with pytest.raises(ValidationError):
        pf_eigen(np.array([[1, -1], [0, 1]]))
    with pytest.raises(ValidationError):
        pf_eigen(np.zeros((2, 2)))


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 31))
def test_pf_matches_svd_and_eigen_equations(rows, cols, seed):
    rng = np.random.default_rng(seed)
    d = rng.integers(0, 4, size=(rows, cols)).astype(float)
    d[0, 0] += 1
    pf = pf_eigen(d)
    assert abs(pf.norm - oracles.pf_norm(d)) < 1e-9 * max(1, pf.norm)
    assert np.abs(d @ pf.right - pf.norm * pf.left).max() < 1e-8
    assert np.abs(d.T @ pf.left - pf.norm * pf.right).max() < 1e-8
    assert np.all(pf.left >= 0) and np.all(pf.right >= 0)


@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_random_unitary_is_unitary(n, seed):
    u = random_unitary(n, np.random.default_rng(seed))
    assert np.abs(u.conj().T @ u - np.eye(n)).max() < 1e-12
