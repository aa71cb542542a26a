"""Dense complex-matrix kernels: Hermitian spectra, functional calculus and
Perron-Frobenius data for nonnegative matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ValidationError(ValueError):
    """Input does not satisfy a structural or tolerance contract."""


class SingularityError(ArithmeticError):
    """A spectral function was requested outside the positive-definite cone."""


def hermitian_tolerance(a: np.ndarray) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(a, 2))) if a.size else 1e-9


def positivity_floor(eigenvalues: np.ndarray) -> float:
    top = float(np.max(eigenvalues)) if len(eigenvalues) else 0.0
    return 1e-10 * max(top, 0.0)


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    vectors = np.array(vectors, dtype=complex, copy=True)
    if vectors.size == 0:
        return vectors
    # near-ties resolve to the first index so the choice is deterministic
    mags = np.abs(vectors)
    rows = np.argmax(mags >= mags.max(axis=0) - 1e-12, axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    phases = np.ones_like(pivots)
    nz = np.abs(pivots) > 0
    phases[nz] = pivots[nz] / np.abs(pivots[nz])
    return vectors / phases[None, :]


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigen-decomposition A = U diag(eigenvalues) U*, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        u = self.eigenvectors
        return (u * f(self.eigenvalues)) @ u.conj().T


def herm_eig(a: np.ndarray) -> HermitianSpectrum:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    skew = float(np.linalg.norm(a - a.conj().T, 2)) if a.size else 0.0
    if skew > hermitian_tolerance(a):
        raise ValidationError(f"matrix is not Hermitian (|A - A*| = {skew:.3e})")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return HermitianSpectrum(w, fix_phase(v))


def _checked_positive(spec: HermitianSpectrum, what: str) -> None:
    lam = spec.eigenvalues
    if len(lam) and lam[0] <= positivity_floor(lam):
        raise SingularityError(f"{what} needs a positive definite matrix (min eigenvalue {lam[0]:.3e})")


def func_calc(a: np.ndarray, f: str, t: float | None = None) -> np.ndarray:
    """Apply ``log``, ``exp``, ``sqrt``, ``inv`` or the imaginary power
    ``ipow`` (A^{it}) on the spectrum of a Hermitian matrix."""
    spec = herm_eig(a)
    if f == "exp":
        return spec.apply(np.exp)
    if f == "sqrt":
        if len(spec.eigenvalues) and spec.eigenvalues[0] < -positivity_floor(spec.eigenvalues) - 1e-12:
            raise SingularityError("square root of a matrix with negative spectrum")
        return spec.apply(lambda x: np.sqrt(np.clip(x, 0.0, None)))
    _checked_positive(spec, f)
    if f == "log":
        return spec.apply(np.log)
    if f == "inv":
        return spec.apply(lambda x: 1.0 / x)
    if f == "ipow":
        if t is None:
            raise ValidationError("imaginary power needs a parameter t")
        return spec.apply(lambda x: np.exp(1j * t * np.log(x)))
    if f == "pow":
        if t is None:
            raise ValidationError("power needs an exponent t")
        return spec.apply(lambda x: x ** t)
    raise ValidationError(f"unknown function {f!r}")


def block_diag(blocks) -> np.ndarray:
    """Direct sum of (possibly rectangular) blocks."""
    blocks = list(blocks)
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def logm(a: np.ndarray) -> np.ndarray:
    return func_calc(a, "log")


def sqrtm(a: np.ndarray) -> np.ndarray:
    return func_calc(a, "sqrt")


def ipow(a: np.ndarray, t: float) -> np.ndarray:
    return func_calc(a, "ipow", t)


def psd_rank(a: np.ndarray, rel: float = 1e-10) -> int:
    lam = herm_eig(a).eigenvalues
    if not len(lam) or lam[-1] <= 0:
        return 0
    return int(np.sum(lam > rel * lam[-1]))


@dataclass(frozen=True)
class PerronFrobenius:
    """Operator norm of a nonnegative matrix with nonnegative extremal vectors:
    D @ right = norm * left and D.T @ left = norm * right."""

    norm: float
    left: np.ndarray
    right: np.ndarray


def pf_eigen(d: np.ndarray, tol: float = 1e-14, max_iter: int = 100_000) -> PerronFrobenius:
    d = np.atleast_2d(np.asarray(d, dtype=float))
    if d.ndim != 2 or not np.all(np.isfinite(d)):
        raise ValidationError("expected a finite real matrix")
    if np.any(d < 0):
        raise ValidationError("matrix has negative entries")
    if not np.any(d > 0):
        raise ValidationError("matrix is identically zero")
    # power iteration on the shifted Gram matrix keeps iterates nonnegative
    gram = d.T @ d
    gram = gram + np.eye(gram.shape[0]) * float(np.max(gram))
    right = np.ones(d.shape[1]) / np.sqrt(d.shape[1])
    for _ in range(max_iter):
        nxt = gram @ right
        nxt /= np.linalg.norm(nxt)
        if np.linalg.norm(nxt - right) < tol:
            right = nxt
            break
        right = nxt
    left = d @ right
    norm = float(np.linalg.norm(left))
    left = left / norm
    return PerronFrobenius(norm, np.clip(left, 0.0, None), np.clip(right, 0.0, None))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary from the QR decomposition of a complex Gaussian matrix."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]
