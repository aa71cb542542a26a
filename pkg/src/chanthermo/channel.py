"""Unital completely positive maps between multi-matrix algebras.

A channel alpha: N -> M is stored by its block Choi matrices
C_ij = sum_{a,b} e_ab ⊗ alpha(e_ab)_j over matrix units e_ab of block i of N,
compressed to block j of M. Row index of C_ij is a * q_j + c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra, State, validate_state
from .numerics import ValidationError, block_diag, func_calc, herm_eig, psd_rank


@dataclass(frozen=True)
class Channel:
    source: MultiMatrixAlgebra
    target: MultiMatrixAlgebra
    choi: tuple[tuple[np.ndarray, ...], ...]

    def block(self, i: int, j: int) -> np.ndarray:
        return self.choi[i][j]

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.algebra != self.source:
            raise ValidationError("argument does not live in the source algebra")
        out = []
        for j, q in enumerate(self.target.block_dims):
            acc = np.zeros((q, q), dtype=complex)
            for i, n in enumerate(self.source.block_dims):
                c = self.choi[i][j].reshape(n, q, n, q)
                acc += np.einsum("ab,acbd->cd", x.blocks[i], c)
            out.append(acc)
        return AlgebraElement(self.target, tuple(out))

    def dual(self, y: AlgebraElement) -> AlgebraElement:
        """Trace dual: tr(alpha(x) y) = tr(x dual(y)) summed over blocks."""
        if y.algebra != self.target:
            raise ValidationError("argument does not live in the target algebra")
        out = []
        for i, n in enumerate(self.source.block_dims):
            acc = np.zeros((n, n), dtype=complex)
            for j, q in enumerate(self.target.block_dims):
                c = self.choi[i][j].reshape(n, q, n, q)
                acc += np.einsum("acbd,dc->ba", c, y.blocks[j])
            out.append(acc)
        return AlgebraElement(self.source, tuple(out))

    def full_choi(self) -> np.ndarray:
        """Block-diagonal assembly of all Choi blocks, ordered by (i, j)."""
        return block_diag([c for row in self.choi for c in row])

    def choi_rank(self) -> int:
        return sum(psd_rank(c) for row in self.choi for c in row if np.linalg.norm(c) > 0)

    def is_faithful(self) -> bool:
        out = output_state(self, self.target.tracial_state(), check=False)
        return out.is_faithful()

    def distance(self, other: "Channel") -> float:
        return max(
            float(np.linalg.norm(a - b)) for ra, rb in zip(self.choi, other.choi) for a, b in zip(ra, rb)
        )


def channel_from_function(
    source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, f: Callable[[AlgebraElement], AlgebraElement]
) -> Channel:
    rows = []
    for i, n in enumerate(source.block_dims):
        row = []
        images = {(a, b): f(source.matrix_unit(i, a, b)) for a in range(n) for b in range(n)}
        for j, q in enumerate(target.block_dims):
            c = np.zeros((n * q, n * q), dtype=complex)
            for (a, b), img in images.items():
                c[a * q:(a + 1) * q, b * q:(b + 1) * q] = img.blocks[j]
            row.append(c)
        rows.append(tuple(row))
    return Channel(source, target, tuple(rows))


def channel_from_kraus(source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, kraus: Sequence[np.ndarray]) -> Channel:
    """alpha(x) = sum_a T_a x T_a* with T_a of shape (target.size, source.size)."""
    ops = [np.asarray(t, dtype=complex) for t in kraus]
    for k, t in enumerate(ops):
        if t.shape != (target.size, source.size):
            raise ValidationError(f"kraus[{k}] has shape {t.shape}, expected {(target.size, source.size)}")

    def f(x: AlgebraElement) -> AlgebraElement:
        full = x.to_matrix()
        return target.from_matrix(sum(t @ full @ t.conj().T for t in ops))

    return channel_from_function(source, target, f)


def validate_channel(alpha: Channel, tol: float = 1e-9) -> Channel:
    """Check Choi positivity block by block and unitality; return a
    Hermitian-symmetrized copy."""
    n_src, n_tgt = alpha.source.num_blocks, alpha.target.num_blocks
    if len(alpha.choi) != n_src or any(len(r) != n_tgt for r in alpha.choi):
        raise ValidationError("Choi data does not match the block structure")
    rows = []
    worst = np.inf
    for i, n in enumerate(alpha.source.block_dims):
        row = []
        for j, q in enumerate(alpha.target.block_dims):
            c = np.asarray(alpha.choi[i][j], dtype=complex)
            if c.shape != (n * q, n * q):
                raise ValidationError(f"choi[{i}][{j}] has shape {c.shape}, expected {(n * q, n * q)}")
            lam = herm_eig(c).eigenvalues
            worst = min(worst, float(lam[0]))
            if lam[0] < -tol * (1 + abs(lam[-1])):
                raise ValidationError(f"not completely positive: choi[{i}][{j}] has eigenvalue {lam[0]:.6g}")
            row.append((c + c.conj().T) / 2)
        rows.append(tuple(row))
    out = Channel(alpha.source, alpha.target, tuple(rows))
    unit = out(alpha.source.identity())
    err = unit.distance(alpha.target.identity())
    if err > 1e-10 * max(1, alpha.target.size):
        raise ValidationError(f"not unital: |alpha(1) - 1| = {err:.3e}")
    return out


@dataclass(frozen=True)
class KrausSet:
    """alpha(x) = sum_a T_a x T_a*, with sum_a T_a T_a* = 1."""

    operators: tuple[np.ndarray, ...]
    eigenvalues: tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.operators)

    def unitality_residual(self) -> float:
        s = sum(t @ t.conj().T for t in self.operators)
        return float(np.linalg.norm(s - np.eye(s.shape[0]), 2))


def kraus_decompose(alpha: Channel, rel_cutoff: float = 1e-10) -> KrausSet:
    """Kraus operators from the spectral decomposition of each Choi block,
    ordered by descending Choi eigenvalue."""
    src, tgt = alpha.source, alpha.target
    found = []
    for i, n in enumerate(src.block_dims):
        for j, q in enumerate(tgt.block_dims):
            c = alpha.choi[i][j]
            if not np.any(c):
                continue
            spec = herm_eig(c)
            top = spec.eigenvalues[-1]
            for k in range(len(spec.eigenvalues) - 1, -1, -1):
                lam = spec.eigenvalues[k]
                if lam <= rel_cutoff * top:
                    break
                v = spec.eigenvectors[:, k].reshape(n, q)
                t = np.zeros((tgt.size, src.size), dtype=complex)
                t[tgt.offsets[j]:tgt.offsets[j] + q, src.offsets[i]:src.offsets[i] + n] = np.sqrt(lam) * v.T
                found.append((-lam, i, j, k, t))
    found.sort(key=lambda item: item[:4])
    return KrausSet(tuple(f[-1] for f in found), tuple(-f[0] for f in found))


def compose(beta: Channel, alpha: Channel) -> Channel:
    """beta ∘ alpha for alpha: N -> M and beta: M -> L."""
    if beta.source != alpha.target:
        raise ValidationError("composition needs beta.source == alpha.target")
    return channel_from_function(alpha.source, beta.target, lambda x: beta(alpha(x)))


def output_state(alpha: Channel, phi_in: State, check: bool = True) -> State:
    """phi_out = phi_in ∘ alpha as a state on the source algebra."""
    if phi_in.algebra != alpha.target:
        raise ValidationError("input state must live on the target algebra")
    dens = alpha.dual(phi_in.density_element())
    blocks = [(b + b.conj().T) / 2 for b in dens.blocks]
    out = State.from_density(alpha.source, blocks)
    if check and not out.is_faithful():
        raise ValidationError("output state is not faithful")
    return out


def bilinear_form(phi: State, m1: AlgebraElement, m2: AlgebraElement) -> complex:
    """<m1, m2>_phi = (xi_phi, m1 xi_phi m2)."""
    from .modular import cone_representative

    xi = cone_representative(phi)
    return complex(sum(np.trace(x.conj().T @ a @ x @ b) for x, a, b in zip(xi.blocks, m1.blocks, m2.blocks)))


def transpose_channel(alpha: Channel, phi_in: State) -> Channel:
    """The unital CP map alpha': M -> N with <alpha(n), m>_phi = <alpha'(m), n>_psi,
    psi = phi_in ∘ alpha."""
    if not phi_in.is_faithful():
        raise ValidationError("transpose needs a faithful input state")
    psi = output_state(alpha, phi_in)
    rho_half = [func_calc(b, "sqrt") for b in phi_in.weighted_densities()]
    sig_inv_half = [func_calc(b, "pow", -0.5) for b in psi.weighted_densities()]
    src, tgt = alpha.source, alpha.target

    def f(m: AlgebraElement) -> AlgebraElement:
        inner = AlgebraElement(tgt, tuple(r @ b @ r for r, b in zip(rho_half, m.blocks)))
        d = alpha.dual(inner)
        return AlgebraElement(src, tuple(s @ b @ s for s, b in zip(sig_inv_half, d.blocks)))

    return channel_from_function(tgt, src, f)


@dataclass(frozen=True)
class DilationPair:
    """alpha(n) = v* rho(n) v with rho(n) = n ⊗ 1_r on C^{N.size} ⊗ C^r."""

    source: MultiMatrixAlgebra
    isometry: np.ndarray
    environment_dim: int

    def homomorphism(self, n: AlgebraElement) -> np.ndarray:
        return np.kron(n.to_matrix(), np.eye(self.environment_dim))

    def compress(self, n: AlgebraElement) -> np.ndarray:
        v = self.isometry
        return v.conj().T @ self.homomorphism(n) @ v


def stinespring_dilate(alpha: Channel) -> DilationPair:
    ks = kraus_decompose(alpha)
    r = ks.rank
    src, tgt = alpha.source, alpha.target
    v = np.zeros((src.size * r, tgt.size), dtype=complex)
    for a, t in enumerate(ks.operators):
        # row (p, a) of v is T_a* restricted to source index p
        v[a::r, :] = t.conj().T
    return DilationPair(src, v, r)


# ---------------------------------------------------------------------------
# standard channels


def identity_channel(algebra: MultiMatrixAlgebra) -> Channel:
    return channel_from_function(algebra, algebra, lambda x: x)


def unitary_channel(u: np.ndarray, algebra: MultiMatrixAlgebra) -> Channel:
    """Inner automorphism x -> u x u* with u block diagonal in the algebra."""
    ue = algebra.from_matrix(u)
    return channel_from_function(algebra, algebra, lambda x: ue @ x @ ue.adjoint())


def depolarizing_channel(lam: float, n: int = 2) -> Channel:
    """x -> lam x + (1 - lam) tr(x)/n 1 on M_n."""
    alg = MultiMatrixAlgebra((n,))

    def f(x: AlgebraElement) -> AlgebraElement:
        b = x.blocks[0]
        return alg.element([lam * b + (1 - lam) * np.trace(b) / n * np.eye(n)])

    return channel_from_function(alg, alg, f)


def trace_channel(n: int = 2) -> Channel:
    """x -> tr(x) 1/n on M_n."""
    return depolarizing_channel(0.0, n)


def transpose_map(n: int = 2) -> Channel:
    """x -> x^T; positive but not completely positive."""
    alg = MultiMatrixAlgebra((n,))
    return channel_from_function(alg, alg, lambda x: x.opposite())


def homomorphism_channel(
    source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, embedding: Sequence[Sequence[tuple[int, int]]]
) -> Channel:
    """Unital *-homomorphism: target block j is ⊕ over ``embedding[j]`` entries
    (i, k) of x_i ⊗ 1_k."""
    if len(embedding) != target.num_blocks:
        raise ValidationError("embedding needs one entry list per target block")
    for j, entries in enumerate(embedding):
        size = sum(source.block_dims[i] * k for i, k in entries)
        if size != target.block_dims[j]:
            raise ValidationError(f"embedding of target block {j} fills {size} of {target.block_dims[j]} dimensions")

    def f(x: AlgebraElement) -> AlgebraElement:
        return target.element([block_diag([np.kron(x.blocks[i], np.eye(k)) for i, k in entries]) for entries in embedding])

    return channel_from_function(source, target, f)


def embedding_channel(p: int, m: int) -> Channel:
    """n -> n ⊗ 1_m from M_p into M_p ⊗ M_m."""
    return homomorphism_channel(MultiMatrixAlgebra((p,)), MultiMatrixAlgebra((p * m,)), [[(0, m)]])


def hybrid_channel() -> Channel:
    """x -> x ⊕ (x ⊗ 1_2) from M_2 into M_2 ⊕ M_4."""
    return homomorphism_channel(MultiMatrixAlgebra((2,)), MultiMatrixAlgebra((2, 4)), [[(0, 1)], [(0, 2)]])


def random_kraus(
    source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, rank: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Gaussian Kraus operators, ``rank`` per block pair, polar-corrected so that
    sum_a T_a T_a* = 1."""
    if rank < 1:
        raise ValidationError("Kraus rank must be positive")
    ops = []
    for i, n in enumerate(source.block_dims):
        for j, q in enumerate(target.block_dims):
            for _ in range(rank):
                g = rng.standard_normal((q, n)) + 1j * rng.standard_normal((q, n))
                t = np.zeros((target.size, source.size), dtype=complex)
                t[target.offsets[j]:target.offsets[j] + q, source.offsets[i]:source.offsets[i] + n] = g
                ops.append(t)
    s = sum(t @ t.conj().T for t in ops)
    lam = herm_eig(s).eigenvalues
    if lam[0] <= 1e-10 * lam[-1]:
        raise ValidationError(f"Kraus rank {rank} is too small for a unital map between {source.block_dims} and {target.block_dims}")
    corr = func_calc(s, "pow", -0.5)
    return [corr @ t for t in ops]


def random_channel(
    source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, rank: int, rng: np.random.Generator
) -> Channel:
    return validate_channel(channel_from_kraus(source, target, random_kraus(source, target, rank, rng)))


def random_faithful_channel(
    source: MultiMatrixAlgebra, target: MultiMatrixAlgebra, rank: int, rng: np.random.Generator, max_rank: int = 64
) -> Channel:
    """Random channel of the smallest feasible rank >= ``rank`` that is faithful."""
    while rank <= max_rank:
        try:
            alpha = random_channel(source, target, rank, rng)
        except ValidationError:
            rank += 1
            continue
        if alpha.is_faithful():
            return alpha
        rank += 1
    raise ValidationError(f"no faithful channel from {source.block_dims} to {target.block_dims} up to rank {max_rank}")
