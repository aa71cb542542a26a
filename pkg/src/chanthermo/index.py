"""Inclusion data, matrix and scalar dimensions, minimal conditional
expectations and the left inverse of a channel.

An inclusion A ⊂ B is held in canonical coordinates: block j of B is
⊕_i C^{n_i} ⊗ C^{Λ_ij} (i outer, then a, then s) and A acts as ⊕_i x_i ⊗ 1_{Λ_ij}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra, State
from .bimodule import Bimodule
from .channel import Channel, channel_from_function
from .numerics import ValidationError, block_diag, herm_eig, pf_eigen


@dataclass(frozen=True)
class InclusionData:
    sub: MultiMatrixAlgebra
    matrix: np.ndarray

    def __post_init__(self) -> None:
        lam = np.asarray(self.matrix, dtype=int)
        if lam.ndim != 2 or lam.shape[0] != self.sub.num_blocks or np.any(lam < 0):
            raise ValidationError(f"inclusion matrix {lam.tolist()} does not fit the subalgebra")
        if np.any(lam.sum(axis=0) == 0):
            raise ValidationError("inclusion is not unital: some ambient block contains no subalgebra block")
        object.__setattr__(self, "matrix", lam)

    @property
    def ambient(self) -> MultiMatrixAlgebra:
        n = np.asarray(self.sub.block_dims)
        return MultiMatrixAlgebra(tuple(int(k) for k in n @ self.matrix))

    def slots(self, i: int, j: int) -> slice:
        """Rows of ambient block j occupied by C^{n_i} ⊗ C^{Λ_ij}."""
        n = self.sub.block_dims
        start = sum(n[r] * self.matrix[r, j] for r in range(i))
        return slice(start, start + n[i] * self.matrix[i, j])

    def embed(self, x: AlgebraElement) -> AlgebraElement:
        blocks = []
        for j in range(self.matrix.shape[1]):
            blocks.append(block_diag([np.kron(x.blocks[i], np.eye(self.matrix[i, j]))
                                      for i in range(self.sub.num_blocks) if self.matrix[i, j]]))
        return self.ambient.element(blocks)

    def dual(self) -> "InclusionData":
        """B ⊂ B_1 from the basic construction: inclusion matrix Λ^T."""
        return InclusionData(self.ambient, self.matrix.T)


def inclusion_matrix(theta: Channel, tol: float = 1e-9) -> InclusionData:
    """Λ_ij = rank of the image of a minimal projection of N_i inside M_j."""
    src, tgt = theta.source, theta.target
    one = theta(src.identity())
    if one.distance(tgt.identity()) > tol:
        raise ValidationError("embedding is not unital")
    lam = np.zeros((src.num_blocks, tgt.num_blocks), dtype=int)
    for i in range(src.num_blocks):
        p = theta(src.matrix_unit(i, 0, 0))
        if (p @ p).distance(p) > tol or p.distance(p.adjoint()) > tol:
            raise ValidationError("map is not a *-homomorphism on matrix units")
        for j in range(tgt.num_blocks):
            lam[i, j] = int(round(np.trace(p.blocks[j]).real))
    n = np.asarray(src.block_dims)
    if np.any(n @ lam != np.asarray(tgt.block_dims)):
        raise ValidationError("embedding is not injective on every block or not unital")
    return InclusionData(src, lam)


def connected_components(obj: Bimodule | InclusionData | np.ndarray) -> list[tuple[list[int], list[int]]]:
    """Components of the bipartite graph on nonzero multiplicity entries, as
    (row indices, column indices)."""
    if isinstance(obj, Bimodule):
        lam = obj.multiplicity
    elif isinstance(obj, InclusionData):
        lam = obj.matrix
    else:
        lam = np.asarray(obj)
    rows, cols = lam.shape
    seen_r, seen_c = [False] * rows, [False] * cols
    out = []
    for start in range(rows):
        if seen_r[start] or not np.any(lam[start]):
            continue
        comp_r, comp_c, stack = [], [], [("r", start)]
        seen_r[start] = True
        while stack:
            kind, v = stack.pop()
            if kind == "r":
                comp_r.append(v)
                for c in np.nonzero(lam[v])[0]:
                    if not seen_c[c]:
                        seen_c[c] = True
                        stack.append(("c", int(c)))
            else:
                comp_c.append(v)
                for r in np.nonzero(lam[:, v])[0]:
                    if not seen_r[r]:
                        seen_r[r] = True
                        stack.append(("r", int(r)))
        out.append((sorted(comp_r), sorted(comp_c)))
    return out


def is_connected(obj) -> bool:
    return len(connected_components(obj)) == 1


@dataclass(frozen=True)
class DimensionMatrix:
    entries: np.ndarray

    def operator(self, h: Bimodule) -> np.ndarray:
        """D = sum d_ij l(p_i) r(q_j) on H."""
        return h.central_operator(self.entries)

    def log_operator(self, h: Bimodule) -> np.ndarray:
        logs = np.where(self.entries > 0, np.log(np.where(self.entries > 0, self.entries, 1.0)), 0.0)
        return h.central_operator(logs)


def matrix_dimension(h: Bimodule) -> DimensionMatrix:
    """d_ij = m_ij: the square root of [r(M)' : l(N)] on the type I factorial piece H_ij."""
    return DimensionMatrix(h.multiplicity.astype(float))


def _pf_norm(mat: np.ndarray) -> float:
    return pf_eigen(mat).norm


def scalar_dimension(h: Bimodule | np.ndarray) -> float | list[float]:
    """d_H = ||D_H||; for a disconnected input, one value per component."""
    d = h.multiplicity if isinstance(h, Bimodule) else np.asarray(h)
    comps = connected_components(d)
    values = [_pf_norm(d[np.ix_(r, c)].astype(float)) for r, c in comps]
    return values[0] if len(values) == 1 else values


def bimodule_index(h: Bimodule | np.ndarray) -> float | list[float]:
    d = scalar_dimension(h)
    return d * d if isinstance(d, float) else [x * x for x in d]


# ---------------------------------------------------------------------------
# conditional expectations


@dataclass(frozen=True)
class Expectation:
    """E(y)_i = sum_j weights[i, j] (id ⊗ omega_ij)(y_j restricted to slot i),
    with omega_ij a density on C^{Λ_ij} (normalized trace by default)."""

    inclusion: InclusionData
    weights: np.ndarray
    densities: dict

    def __call__(self, y: AlgebraElement) -> AlgebraElement:
        inc = self.inclusion
        out = []
        for i, n in enumerate(inc.sub.block_dims):
            acc = np.zeros((n, n), dtype=complex)
            for j in range(inc.matrix.shape[1]):
                lam = inc.matrix[i, j]
                if not lam:
                    continue
                s = inc.slots(i, j)
                piece = y.blocks[j][s, s].reshape(n, lam, n, lam)
                acc += self.weights[i, j] * np.einsum("asbt,ts->ab", piece, self.densities[i, j])
            out.append(acc)
        return inc.sub.element(out)

    def as_channel(self) -> Channel:
        """E as a unital CP map B -> A."""
        return channel_from_function(self.inclusion.ambient, self.inclusion.sub, self)

    def index(self) -> float:
        return expectation_index(self)


def _uniform_densities(inc: InclusionData) -> dict:
    return {(i, j): np.eye(inc.matrix[i, j]) / inc.matrix[i, j]
            for i in range(inc.matrix.shape[0]) for j in range(inc.matrix.shape[1]) if inc.matrix[i, j]}


def expectation(inc: InclusionData, weights: np.ndarray, densities: dict | None = None) -> Expectation:
    w = np.asarray(weights, dtype=float)
    if w.shape != inc.matrix.shape or np.any(w < 0) or np.any((w > 0) & (inc.matrix == 0)):
        raise ValidationError("expectation weights must be nonnegative and supported on the inclusion matrix")
    if np.any(np.abs(w.sum(axis=1) - 1) > 1e-12):
        raise ValidationError("expectation weights must sum to one over each subalgebra block")
    return Expectation(inc, w, _uniform_densities(inc) if densities is None else densities)


def expectation_index(e: Expectation, tol: float = 1e-12) -> float:
    """Smallest c with c E - id completely positive on B: per ambient block j,
    the generalized eigenvalue c_j = Ω* C_E^+ Ω with Ω = sum_a |a a>, provided
    Ω lies in the range of the Choi matrix C_E; otherwise infinite."""
    inc = e.inclusion
    amb = inc.ambient
    worst = 0.0
    for j, k in enumerate(amb.block_dims):
        choi = np.zeros((k * k, k * k), dtype=complex)
        for a in range(k):
            for b in range(k):
                x = inc.embed(e(amb.matrix_unit(j, a, b))).blocks[j]
                choi += np.kron(np.outer(np.eye(k)[a], np.eye(k)[b]), x)
        omega = np.eye(k).reshape(-1)
        spec = herm_eig(choi)
        keep = spec.eigenvalues > tol * max(1.0, spec.eigenvalues[-1])
        u = spec.eigenvectors[:, keep]
        coeff = u.conj().T @ omega
        if np.linalg.norm(omega - u @ coeff) > 1e-8:
            return float("inf")
        worst = max(worst, float(np.sum(np.abs(coeff) ** 2 / spec.eigenvalues[keep])))
    return worst


@dataclass(frozen=True)
class MinimalExpectation:
    expectation: Expectation
    closed_form: float
    perron: tuple[np.ndarray, np.ndarray]

    @cached_property
    def index(self) -> float:
        """Index from the eigenvalue program, independent of the closed form d²."""
        return expectation_index(self.expectation)


def minimal_expectation(inc: InclusionData) -> MinimalExpectation | list[MinimalExpectation]:
    """Expectation with weights w_ij = Λ_ij t_j / (d s_i) from the Perron-Frobenius
    data Λ t = d s, Λ^T s = d t; tracial on the relative commutant. Disconnected
    inclusions are handled per component."""
    comps = connected_components(inc)
    if len(comps) > 1:
        return [minimal_expectation(_restrict(inc, r, c)) for r, c in comps]
    lam = inc.matrix.astype(float)
    pf = pf_eigen(lam)
    d, s, t = pf.norm, pf.left, pf.right
    w = lam * t[None, :] / (d * s[:, None])
    w = w / w.sum(axis=1, keepdims=True)
    e = expectation(inc, w)
    return MinimalExpectation(e, d * d, (s, t))


def combined_minimal_expectation(inc: InclusionData) -> Expectation:
    """Minimal expectation on a possibly disconnected inclusion, assembled from
    the per-component Perron-Frobenius weights."""
    w = np.zeros(inc.matrix.shape)
    for rows, cols in connected_components(inc):
        part = minimal_expectation(_restrict(inc, rows, cols))
        w[np.ix_(rows, cols)] = part.expectation.weights
    return expectation(inc, w)


def _restrict(inc: InclusionData, rows: Sequence[int], cols: Sequence[int]) -> InclusionData:
    sub = MultiMatrixAlgebra(tuple(inc.sub.block_dims[i] for i in rows))
    return InclusionData(sub, inc.matrix[np.ix_(rows, cols)])


def perturbed_expectation(e: Expectation, rng: np.random.Generator, scale: float = 0.3) -> Expectation:
    """A random faithful expectation near e: weights moved on the simplex and
    slot densities replaced by random mixtures with the current ones."""
    inc = e.inclusion
    w = e.weights * np.exp(scale * rng.standard_normal(e.weights.shape))
    w = np.where(inc.matrix > 0, w, 0.0)
    w = w / w.sum(axis=1, keepdims=True)
    dens = {}
    for key, rho in e.densities.items():
        lam = rho.shape[0]
        g = rng.standard_normal((lam, lam)) + 1j * rng.standard_normal((lam, lam))
        r = g @ g.conj().T
        r = r / np.trace(r).real
        mix = rng.uniform(0, scale)
        dens[key] = (1 - mix) * rho + mix * r
    return Expectation(inc, w, dens)


def certify_minimality(minimal: MinimalExpectation, rng: np.random.Generator, trials: int = 200) -> float:
    """Smallest index among ``trials`` random perturbations of the candidate."""
    best = float("inf")
    for _ in range(trials):
        best = min(best, expectation_index(perturbed_expectation(minimal.expectation, rng)))
    return best


def index_curve(inc: InclusionData, w: float) -> float:
    """Index of the expectation with weights (w, 1 - w) for a one-row inclusion
    with two ambient blocks."""
    if inc.matrix.shape[1] != 2 or inc.matrix.shape[0] != 1:
        raise ValidationError("index curve needs one subalgebra block inside two ambient blocks")
    return expectation_index(expectation(inc, np.array([[w, 1 - w]])))


# ---------------------------------------------------------------------------
# the inclusion l(N) ⊂ r(M)' of a bimodule and the left inverse


@dataclass(frozen=True)
class CommutantInclusion:
    """l(N) ⊂ r(M)' on a bimodule H, with r(M)' ≅ ⊕_j M_{k_j}, k_j = sum_i n_i m_ij."""

    bimodule: Bimodule
    inclusion: InclusionData

    def _positions(self, j: int) -> list[int]:
        h = self.bimodule
        pos = []
        for i in range(h.left.num_blocks):
            b = h.block(i, j)
            if b is None:
                continue
            pos += [b.index(a, k, 0) for a in range(b.n) for k in range(b.m)]
        return pos

    def to_element(self, op: np.ndarray, tol: float = 1e-8) -> AlgebraElement:
        """Read an operator on H commuting with r(M) as an element of r(M)'."""
        nf = self.bimodule.lower(op)
        blocks = [nf[np.ix_(self._positions(j), self._positions(j))] for j in range(self.inclusion.matrix.shape[1])]
        y = self.inclusion.ambient.element(blocks)
        if np.linalg.norm(self.to_operator(y) - op) > tol * max(1.0, np.linalg.norm(op)):
            raise ValidationError("operator does not commute with the right action")
        return y

    def to_operator(self, y: AlgebraElement) -> np.ndarray:
        h = self.bimodule
        nf = np.zeros((h.dim, h.dim), dtype=complex)
        for j, q in enumerate(h.right.block_dims):
            pos = self._positions(j)
            for c in range(q):
                idx = [p + c for p in pos]
                nf[np.ix_(idx, idx)] = y.blocks[j]
        return h.lift(nf)

    def pair(self):
        """(r(M)', r(M)) as a represented pair on H."""
        from .modular import RepresentedPair

        h = self.bimodule
        cols = []
        for j, q in enumerate(h.right.block_dims):
            pos = self._positions(j)
            for p in pos:
                for c in range(q):
                    e = np.zeros(h.dim, dtype=complex)
                    e[p + c] = 1.0
                    cols.append(h.from_normal(e))
        return RepresentedPair(self.inclusion.ambient.block_dims, h.right.block_dims, np.array(cols).T)


def commutant_inclusion(h: Bimodule) -> CommutantInclusion:
    if np.any(h.multiplicity.sum(axis=0) == 0):
        raise ValidationError("right action is not faithful on the bimodule")
    return CommutantInclusion(h, InclusionData(h.left, h.multiplicity))


def left_inverse(h: Bimodule) -> Channel:
    """Φ = l^{-1} ∘ ε: r(M)' -> N, with ε the minimal expectation of l(N) ⊂ r(M)'.
    Returned as a channel whose source is r(M)' in canonical coordinates."""
    inc = commutant_inclusion(h).inclusion
    return combined_minimal_expectation(inc).as_channel()


def relative_commutant_trace_check(e: Expectation, rng: np.random.Generator) -> float:
    """|E(xy) - E(yx)| for random x, y in the relative commutant A' ∩ B."""
    inc = e.inclusion
    amb = inc.ambient

    def random_commutant() -> AlgebraElement:
        blocks = []
        for j in range(inc.matrix.shape[1]):
            parts = []
            for i, n in enumerate(inc.sub.block_dims):
                lam = inc.matrix[i, j]
                if lam:
                    g = rng.standard_normal((lam, lam)) + 1j * rng.standard_normal((lam, lam))
                    parts.append(np.kron(np.eye(n), g))
            blocks.append(block_diag(parts))
        return amb.element(blocks)

    x, y = random_commutant(), random_commutant()
    return e(x @ y).distance(e(y @ x))


def output_density_on_commutant(phi_out: State, phi_map: Channel) -> tuple[np.ndarray, ...]:
    """Density of phi_out ∘ Φ on the source of Φ (trace dual of Φ applied to rho_out)."""
    return phi_map.dual(phi_out.density_element()).blocks

