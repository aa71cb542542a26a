"""Multi-matrix algebras, their elements and faithful states.

An algebra is a direct sum of full matrix blocks. Elements are stored block by
block; states are stored as a weight vector over the central atoms plus one
trace-one density per block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import ValidationError, herm_eig, positivity_floor


@dataclass(frozen=True)
class MultiMatrixAlgebra:
    block_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        if not dims or any(n < 1 for n in dims):
            raise ValidationError(f"block dimensions must be positive, got {self.block_dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def size(self) -> int:
        """Dimension of the Hilbert space the blocks act on."""
        return sum(self.block_dims)

    @property
    def dimension(self) -> int:
        """Vector-space dimension of the algebra."""
        return sum(n * n for n in self.block_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.block_dims)[:-1]]))

    def is_factor(self) -> bool:
        return self.num_blocks == 1

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.eye(n, dtype=complex) for n in self.block_dims))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.zeros((n, n), dtype=complex) for n in self.block_dims))

    def matrix_unit(self, block: int, a: int, b: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[block][a, b] = 1.0
        return AlgebraElement(self, tuple(blocks))

    def matrix_units(self):
        """Yield (block, a, b, e_ab) over all matrix units."""
        for i, n in enumerate(self.block_dims):
            for a in range(n):
                for b in range(n):
                    yield i, a, b, self.matrix_unit(i, a, b)

    def element(self, blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.asarray(b, dtype=complex) for b in blocks))

    def from_matrix(self, x: np.ndarray, check: bool = True, tol: float = 1e-9) -> "AlgebraElement":
        """Cut a block-diagonal matrix into blocks; off-block mass is an error when checked."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.size, self.size):
            raise ValidationError(f"expected a {self.size}x{self.size} matrix, got {x.shape}")
        blocks = []
        for off, n in zip(self.offsets, self.block_dims):
            blocks.append(x[off:off + n, off:off + n].copy())
        out = AlgebraElement(self, tuple(blocks))
        if check:
            leak = np.linalg.norm(x - out.to_matrix())
            if leak > tol * (1 + np.linalg.norm(x)):
                raise ValidationError(f"matrix is not block diagonal (off-block norm {leak:.3e})")
        return out

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> "AlgebraElement":
        blocks = []
        for n in self.block_dims:
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            blocks.append((g + g.conj().T) / 2 if hermitian else g)
        return AlgebraElement(self, tuple(blocks))

    def random_state(self, rng: np.random.Generator) -> "State":
        """A random faithful state: Dirichlet weights and Wishart-type densities."""
        weights = rng.dirichlet(np.ones(self.num_blocks) * 2.0)
        weights = 0.05 / self.num_blocks + 0.95 * weights
        densities = []
        for n in self.block_dims:
            g = rng.standard_normal((n, 2 * n)) + 1j * rng.standard_normal((n, 2 * n))
            rho = g @ g.conj().T + 0.05 * np.eye(n)
            densities.append(rho / np.trace(rho).real)
        return State(self, np.asarray(weights), tuple(densities))

    def tracial_state(self) -> "State":
        weights = np.asarray(self.block_dims, dtype=float) / self.size
        return State(self, weights, tuple(np.eye(n, dtype=complex) / n for n in self.block_dims))


@dataclass(frozen=True)
class AlgebraElement:
    algebra: MultiMatrixAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != self.algebra.num_blocks:
            raise ValidationError("number of blocks does not match the algebra")
        for b, n in zip(self.blocks, self.algebra.block_dims):
            if np.shape(b) != (n, n):
                raise ValidationError(f"block shape {np.shape(b)} does not match dimension {n}")

    def to_matrix(self) -> np.ndarray:
        out = np.zeros((self.algebra.size, self.algebra.size), dtype=complex)
        for off, n, b in zip(self.algebra.offsets, self.algebra.block_dims, self.blocks):
            out[off:off + n, off:off + n] = b
        return out

    def _check(self, other: "AlgebraElement") -> None:
        if other.algebra != self.algebra:
            raise ValidationError("elements live in different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(scalar * b for b in self.blocks))

    __rmul__ = __mul__

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(b.conj().T for b in self.blocks))

    def opposite(self) -> "AlgebraElement":
        """The image m^o in the opposite algebra, realized as the transpose."""
        return AlgebraElement(self.algebra, tuple(b.T for b in self.blocks))

    def norm(self) -> float:
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def distance(self, other: "AlgebraElement") -> float:
        return (self - other).norm()


@dataclass(frozen=True)
class State:
    """phi(x) = sum_i weights[i] * tr(densities[i] @ x_i)."""

    algebra: MultiMatrixAlgebra
    weights: np.ndarray
    densities: tuple[np.ndarray, ...]

    def __call__(self, x: AlgebraElement) -> complex:
        return complex(sum(w * np.trace(r @ b) for w, r, b in zip(self.weights, self.densities, x.blocks)))

    def weighted_densities(self) -> tuple[np.ndarray, ...]:
        return tuple(w * r for w, r in zip(self.weights, self.densities))

    def density_element(self) -> AlgebraElement:
        return AlgebraElement(self.algebra, self.weighted_densities())

    def is_faithful(self) -> bool:
        if np.any(self.weights <= 0):
            return False
        for r in self.densities:
            lam = herm_eig(r).eigenvalues
            if lam[0] <= positivity_floor(lam):
                return False
        return True

    @classmethod
    def from_density(cls, algebra: MultiMatrixAlgebra, blocks: Sequence[np.ndarray]) -> "State":
        """Factor per-block positive matrices (weights folded in) into weights and densities."""
        traces = np.array([np.trace(b).real for b in blocks])
        total = traces.sum()
        if total <= 0:
            raise ValidationError("functional has zero total mass")
        weights = traces / total
        dens = tuple(
            np.asarray(b, dtype=complex) / t if t > 0 else np.eye(n, dtype=complex) / n
            for b, t, n in zip(blocks, traces, algebra.block_dims)
        )
        return validate_state(cls(algebra, weights, dens))


def validate_state(s: State, require_faithful: bool = False) -> State:
    """Normalize a state and check positivity; optionally insist on faithfulness."""
    alg = s.algebra
    weights = np.asarray(s.weights, dtype=float).ravel()
    if len(weights) != alg.num_blocks or len(s.densities) != alg.num_blocks:
        raise ValidationError("state does not match the algebra's block structure")
    if np.any(weights < -1e-12):
        raise ValidationError(f"negative weight in {weights}")
    weights = np.clip(weights, 0.0, None)
    if weights.sum() <= 0:
        raise ValidationError("weights sum to zero")
    weights = weights / weights.sum()
    densities = []
    for i, (r, n) in enumerate(zip(s.densities, alg.block_dims)):
        r = np.asarray(r, dtype=complex)
        if r.shape != (n, n):
            raise ValidationError(f"densities[{i}] has shape {r.shape}, expected {(n, n)}")
        spec = herm_eig(r)
        lam = spec.eigenvalues
        if lam[0] < -1e-9 * max(1.0, abs(lam[-1])):
            raise ValidationError(f"densities[{i}] has negative eigenvalue {lam[0]:.3e}")
        r = (r + r.conj().T) / 2
        tr = np.trace(r).real
        if tr <= 0:
            raise ValidationError(f"densities[{i}] has non-positive trace")
        densities.append(r / tr)
    out = State(alg, weights, tuple(densities))
    if require_faithful and not out.is_faithful():
        raise ValidationError("state is not faithful")
    return out


def central_atoms(algebra: MultiMatrixAlgebra) -> list[AlgebraElement]:
    atoms = []
    for i in range(algebra.num_blocks):
        blocks = [np.zeros((n, n), dtype=complex) for n in algebra.block_dims]
        blocks[i] = np.eye(algebra.block_dims[i], dtype=complex)
        atoms.append(AlgebraElement(algebra, tuple(blocks)))
    return atoms


@dataclass(frozen=True)
class OppositeTensor:
    """N ⊗ M^o as a multi-matrix algebra with blocks indexed by pairs (i, j)."""

    left: MultiMatrixAlgebra
    right: MultiMatrixAlgebra
    algebra: MultiMatrixAlgebra
    pairs: tuple[tuple[int, int], ...]

    def embed_left(self, n: AlgebraElement) -> AlgebraElement:
        """n ⊗ 1."""
        blocks = [np.kron(n.blocks[i], np.eye(self.right.block_dims[j])) for i, j in self.pairs]
        return AlgebraElement(self.algebra, tuple(blocks))

    def embed_right(self, m: AlgebraElement) -> AlgebraElement:
        """1 ⊗ m^o with m^o the transpose."""
        blocks = [np.kron(np.eye(self.left.block_dims[i]), m.blocks[j].T) for i, j in self.pairs]
        return AlgebraElement(self.algebra, tuple(blocks))


def opposite_tensor(left: MultiMatrixAlgebra, right: MultiMatrixAlgebra) -> OppositeTensor:
    pairs = tuple((i, j) for i in range(left.num_blocks) for j in range(right.num_blocks))
    dims = tuple(left.block_dims[i] * right.block_dims[j] for i, j in pairs)
    return OppositeTensor(left, right, MultiMatrixAlgebra(dims), pairs)
