"""N-M bimodules at finite dimension.

Every bimodule is held in normal form ⊕_{ij} C^{n_i} ⊗ C^{m_ij} ⊗ C^{q_j}, with N
acting on the first slot and M acting from the right on the third slot, together
with a unitary ``frame`` whose columns are the normal-form basis vectors written
in the bimodule's own (concrete) coordinates. A normal-form vector block is
indexed (a, k, c) row-major.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra, State, central_atoms
from .channel import Channel, output_state
from .modular import StandardForm
from .numerics import ValidationError, block_diag, func_calc, herm_eig

Rep = Callable[[AlgebraElement], np.ndarray]


@dataclass(frozen=True)
class Block:
    i: int
    j: int
    offset: int
    n: int
    m: int
    q: int

    @property
    def size(self) -> int:
        return self.n * self.m * self.q

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)

    def index(self, a: int, k: int, c: int) -> int:
        return self.offset + (a * self.m + k) * self.q + c


@dataclass(frozen=True, eq=False)
class Bimodule:
    left: MultiMatrixAlgebra
    right: MultiMatrixAlgebra
    multiplicity: np.ndarray
    frame: np.ndarray | None = None
    xi: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        mult = np.asarray(self.multiplicity, dtype=int)
        if mult.shape != (self.left.num_blocks, self.right.num_blocks) or np.any(mult < 0):
            raise ValidationError(f"multiplicity matrix {mult.tolist()} does not fit the algebras")
        object.__setattr__(self, "multiplicity", mult)
        if self.frame is not None and self.frame.shape != (self.dim, self.dim):
            raise ValidationError("frame must be a square unitary of the bimodule dimension")

    # -- layout -----------------------------------------------------------
    @property
    def blocks(self) -> list[Block]:
        if "blocks" not in self._cache:
            out, pos = [], 0
            for i, n in enumerate(self.left.block_dims):
                for j, q in enumerate(self.right.block_dims):
                    m = int(self.multiplicity[i, j])
                    if m:
                        out.append(Block(i, j, pos, n, m, q))
                        pos += n * m * q
            self._cache["blocks"] = out
        return self._cache["blocks"]

    def block(self, i: int, j: int) -> Block | None:
        for b in self.blocks:
            if (b.i, b.j) == (i, j):
                return b
        return None

    @property
    def dim(self) -> int:
        return int(sum(n * self.multiplicity[i, j] * q
                       for i, n in enumerate(self.left.block_dims)
                       for j, q in enumerate(self.right.block_dims)))

    def is_factorial(self) -> bool:
        return len(self.blocks) == 1

    # -- coordinates ------------------------------------------------------
    def lift(self, op: np.ndarray) -> np.ndarray:
        """Normal-form operator -> concrete operator."""
        if self.frame is None:
            return op
        return self.frame @ op @ self.frame.conj().T

    def lower(self, op: np.ndarray) -> np.ndarray:
        if self.frame is None:
            return op
        return self.frame.conj().T @ op @ self.frame

    def to_normal(self, v: np.ndarray) -> np.ndarray:
        return v if self.frame is None else self.frame.conj().T @ v

    def from_normal(self, v: np.ndarray) -> np.ndarray:
        return v if self.frame is None else self.frame @ v

    def block_view(self, v: np.ndarray, b: Block) -> np.ndarray:
        """Normal-form coordinates of a concrete vector on block b, shape (n, m, q)."""
        return self.to_normal(v)[b.slice].reshape(b.n, b.m, b.q)

    # -- actions ----------------------------------------------------------
    def normal_left(self, x: AlgebraElement) -> np.ndarray:
        return block_diag([np.kron(x.blocks[b.i], np.eye(b.m * b.q)) for b in self.blocks])

    def normal_right(self, y: AlgebraElement) -> np.ndarray:
        return block_diag([np.kron(np.eye(b.n * b.m), y.blocks[b.j].T) for b in self.blocks])

    def left_action(self, x: AlgebraElement) -> np.ndarray:
        if x.algebra != self.left:
            raise ValidationError("left action needs an element of the left algebra")
        return self.lift(self.normal_left(x))

    def right_action(self, y: AlgebraElement) -> np.ndarray:
        if y.algebra != self.right:
            raise ValidationError("right action needs an element of the right algebra")
        return self.lift(self.normal_right(y))

    def central_operator(self, values: dict[tuple[int, int], complex] | np.ndarray) -> np.ndarray:
        """sum_ij values[i, j] l(p_i) r(q_j)."""
        diag = np.concatenate([np.full(b.size, values[b.i, b.j], dtype=complex) for b in self.blocks]) if self.blocks else np.zeros(0)
        return self.lift(np.diag(diag))

    def multiplicity_operator(self, mats: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
        """Element of the relative commutant: ⊕ 1_n ⊗ mats[i, j] ⊗ 1_q."""
        return self.lift(block_diag([np.kron(np.kron(np.eye(b.n), mats[b.i, b.j]), np.eye(b.q)) for b in self.blocks]))

    def with_xi(self, xi: np.ndarray | None) -> "Bimodule":
        return Bimodule(self.left, self.right, self.multiplicity, self.frame, xi)


# ---------------------------------------------------------------------------
# decomposition of concrete bimodules


def normal_form(left: MultiMatrixAlgebra, right: MultiMatrixAlgebra, left_rep: Rep, right_rep: Rep, dim: int,
                tol: float = 1e-8) -> Bimodule:
    """Bring a concrete bimodule (commuting unital left representation and right
    anti-representation on C^dim) to normal form.

    For each pair of central atoms the multiplicity space is the range of
    l(e_00) r(e_00); the full block basis is l(e_a0) r(e_0c) w_k.
    """
    mult = np.zeros((left.num_blocks, right.num_blocks), dtype=int)
    columns = []
    for i, n in enumerate(left.block_dims):
        for j, q in enumerate(right.block_dims):
            corner = left_rep(left.matrix_unit(i, 0, 0)) @ right_rep(right.matrix_unit(j, 0, 0))
            spec = herm_eig((corner + corner.conj().T) / 2)
            keep = spec.eigenvalues > 0.5
            w = spec.eigenvectors[:, keep][:, ::-1]
            m = w.shape[1]
            mult[i, j] = m
            if not m:
                continue
            lefts = [left_rep(left.matrix_unit(i, a, 0)) for a in range(n)]
            rights = [right_rep(right.matrix_unit(j, 0, c)) for c in range(q)]
            moved = [[lefts[a] @ (rights[c] @ w) for c in range(q)] for a in range(n)]
            for a in range(n):
                for k in range(m):
                    for c in range(q):
                        columns.append(moved[a][c][:, k])
    frame = np.array(columns).T if columns else np.zeros((dim, 0))
    if frame.shape != (dim, dim):
        raise ValidationError(f"actions are not unital: normal form spans {frame.shape[1]} of {dim} dimensions")
    err = np.linalg.norm(frame.conj().T @ frame - np.eye(dim))
    if err > tol:
        raise ValidationError(f"actions do not form a bimodule (frame defect {err:.2e})")
    return Bimodule(left, right, mult, frame)


def identity_bimodule(algebra: MultiMatrixAlgebra, phi: State | None = None) -> Bimodule:
    """L²(M) in normal form; with ``phi`` the cyclic vector is its cone representative."""
    mult = np.eye(algebra.num_blocks, dtype=int)
    xi = None
    if phi is not None:
        from .modular import vector_rep

        xi = vector_rep(phi)
    return Bimodule(algebra, algebra, mult, None, xi)


def homomorphism_bimodule(theta: Channel) -> Bimodule:
    """_θL²(M) for a unital homomorphism θ: N -> M, concretely on L²(M)."""
    sf = StandardForm(theta.target)
    return normal_form(theta.source, theta.target,
                       lambda x: sf.left(theta(x)), sf.right, sf.dim)


# ---------------------------------------------------------------------------
# GNS bimodule of a channel


def gns_gram(alpha: Channel, phi_in: State, i: int, j: int) -> np.ndarray:
    """Reduced Gram matrix G[(b, c), (b', c')] = phi~(e_bb' ⊗ e_c'c^o) on block pair (i, j),
    where phi~(n ⊗ m^o) = <alpha(n), m>_phi = tr(rho^{1/2} alpha(n) rho^{1/2} m)."""
    n = alpha.source.block_dims[i]
    root = func_calc(phi_in.weighted_densities()[j], "sqrt")
    side = np.kron(np.eye(n), root)
    return side @ alpha.choi[i][j] @ side


def gns_bimodule(alpha: Channel, phi_in: State, cutoff: float = 1e-10) -> Bimodule:
    """GNS bimodule H_alpha of phi~ on N ⊗ M^o, in normal form, with cyclic vector xi.

    The class of e_ab ⊗ e_cd lives in sector (a, d) with multiplicity coordinates
    Λ^{1/2} U* e_(b, c), where G = U Λ U* is the reduced Gram matrix of the pair.
    """
    if phi_in.algebra != alpha.target:
        raise ValidationError("input state must live on the channel's target algebra")
    if not phi_in.is_faithful():
        raise ValidationError("GNS bimodule needs a faithful input state")
    src, tgt = alpha.source, alpha.target
    spectra = {}
    top = 0.0
    for i in range(src.num_blocks):
        for j in range(tgt.num_blocks):
            g = gns_gram(alpha, phi_in, i, j)
            spec = herm_eig(g)
            if spec.eigenvalues[0] < -1e-9 * max(1.0, spec.eigenvalues[-1]):
                raise ValidationError(f"pairing functional is not positive on block ({i}, {j}): the channel is not CP")
            spectra[i, j] = spec
            top = max(top, float(spec.eigenvalues[-1]))
    mult = np.zeros((src.num_blocks, tgt.num_blocks), dtype=int)
    pieces = {}
    for (i, j), spec in spectra.items():
        keep = spec.eigenvalues > cutoff * top
        lam = spec.eigenvalues[keep][::-1]
        u = spec.eigenvectors[:, keep][:, ::-1]
        mult[i, j] = len(lam)
        pieces[i, j] = (lam, u)
    h = Bimodule(src, tgt, mult)
    xi = np.zeros(h.dim, dtype=complex)
    for b in h.blocks:
        lam, u = pieces[b.i, b.j]
        # xi = [1 ⊗ 1] = sum_{a,c} [e_aa ⊗ e_cc]: sector (a, c), coordinates Λ^{1/2} U* e_(a, c)
        coords = (np.sqrt(lam)[:, None] * u.conj().T).reshape(b.m, b.n, b.q)
        xi[b.slice] = coords.transpose(1, 0, 2).reshape(-1)
    return h.with_xi(xi)


def gns_vector(h: Bimodule, x: AlgebraElement, y: AlgebraElement) -> np.ndarray:
    """Class of x ⊗ y^o in the GNS space: l(x) r(y) xi."""
    if h.xi is None:
        raise ValidationError("bimodule has no cyclic vector")
    return h.left_action(x) @ (h.right_action(y) @ h.xi)


# ---------------------------------------------------------------------------
# structural operations


@dataclass(frozen=True)
class FactorialPiece:
    i: int
    j: int
    bimodule: Bimodule
    isometry: np.ndarray


def central_decomposition(h: Bimodule) -> list[FactorialPiece]:
    """Reduced bimodules H_ij = l(p_i) r(q_j) H over the factors N_i, M_j."""
    out = []
    for b in h.blocks:
        piece = Bimodule(MultiMatrixAlgebra((b.n,)), MultiMatrixAlgebra((b.q,)), np.array([[b.m]]))
        iso = np.zeros((h.dim, b.size), dtype=complex)
        iso[b.slice, :] = np.eye(b.size)
        iso = h.from_normal(iso)
        xi = None
        if h.xi is not None:
            xi = iso.conj().T @ h.xi
        out.append(FactorialPiece(b.i, b.j, piece.with_xi(xi), iso))
    return out


def _conjugation_permutation(h: Bimodule, hbar: Bimodule) -> np.ndarray:
    """P with normal(conj H) coordinates = P @ conj(normal(H) coordinates)."""
    perm = np.zeros((h.dim, h.dim))
    for b in h.blocks:
        bb = hbar.block(b.j, b.i)
        for a in range(b.n):
            for k in range(b.m):
                for c in range(b.q):
                    perm[bb.index(c, k, a), b.index(a, k, c)] = 1.0
    return perm


def conjugate(h: Bimodule) -> Bimodule:
    """The M-N bimodule on the conjugate space, l(m) x̄ = conj(r(m*) x) and
    r(n) x̄ = conj(l(n*) x). Coordinates are the complex conjugates of H's."""
    nf = Bimodule(h.right, h.left, h.multiplicity.T)
    perm = _conjugation_permutation(h, nf)
    base = np.eye(h.dim) if h.frame is None else h.frame
    frame = base.conj() @ perm.T
    xi = None if h.xi is None else h.xi.conj()
    return Bimodule(h.right, h.left, h.multiplicity.T.copy(), frame, xi)


@dataclass(frozen=True)
class DirectSum:
    bimodule: Bimodule
    injections: tuple[np.ndarray, np.ndarray]

    @property
    def projections(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(v.conj().T for v in self.injections)


def direct_sum(h: Bimodule, k: Bimodule) -> DirectSum:
    if h.left != k.left or h.right != k.right:
        raise ValidationError("direct sum needs bimodules over the same algebras")
    total = h.dim + k.dim
    inj_h = np.zeros((total, h.dim), dtype=complex)
    inj_h[:h.dim] = np.eye(h.dim)
    inj_k = np.zeros((total, k.dim), dtype=complex)
    inj_k[h.dim:] = np.eye(k.dim)
    s = Bimodule(h.left, h.right, h.multiplicity + k.multiplicity)
    fh = np.eye(h.dim) if h.frame is None else h.frame
    fk = np.eye(k.dim) if k.frame is None else k.frame
    frame = np.zeros((total, total), dtype=complex)
    for b in s.blocks:
        bh, bk = h.block(b.i, b.j), k.block(b.i, b.j)
        mh = bh.m if bh else 0
        for a in range(b.n):
            for kk in range(b.m):
                for c in range(b.q):
                    if kk < mh:
                        col = inj_h @ fh[:, bh.index(a, kk, c)]
                    else:
                        col = inj_k @ fk[:, bk.index(a, kk - mh, c)]
                    frame[:, b.index(a, kk, c)] = col
    return DirectSum(Bimodule(h.left, h.right, s.multiplicity, frame), (inj_h, inj_k))


@dataclass(frozen=True)
class Fusion:
    """H ⊗_phi K in normal form together with the fusion map on simple tensors."""

    h: Bimodule
    k: Bimodule
    phi: State
    bimodule: Bimodule
    # (i, l) -> list of (j, start) giving where the j-summand sits in the multiplicity slot
    layout: dict

    def fuse(self, x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """x ⊗_phi eta -> contraction of x's right slot with rho_phi^{-1/2} eta's left slot."""
        out = np.zeros(self.bimodule.dim, dtype=complex)
        roots = [func_calc(r, "pow", -0.5) for r in self.phi.weighted_densities()]
        for b in self.bimodule.blocks:
            target = np.zeros((b.n, b.m, b.q), dtype=complex)
            for j, start in self.layout[b.i, b.j]:
                bh, bk = self.h.block(b.i, j), self.k.block(j, b.j)
                xv = self.h.block_view(x, bh).reshape(bh.n * bh.m, bh.q)
                ev = self.k.block_view(eta, bk).reshape(bk.n, bk.m * bk.q)
                z = (xv @ roots[j] @ ev).reshape(bh.n, bh.m, bk.m, bk.q)
                target[:, start:start + bh.m * bk.m, :] = z.reshape(bh.n, bh.m * bk.m, bk.q)
            out[b.slice] = target.reshape(-1)
        return out


def relative_tensor(h: Bimodule, k: Bimodule, phi: State) -> Fusion:
    if h.right != k.left or phi.algebra != h.right:
        raise ValidationError("relative tensor product needs matching middle algebras and a state on them")
    if not phi.is_faithful():
        raise ValidationError("relative tensor product needs a faithful middle state")
    mult = h.multiplicity @ k.multiplicity
    fused = Bimodule(h.left, k.right, mult)
    layout = {}
    for b in fused.blocks:
        entries, start = [], 0
        for j in range(h.right.num_blocks):
            mh, mk = int(h.multiplicity[b.i, j]), int(k.multiplicity[j, b.j])
            if mh and mk:
                entries.append((j, start))
                start += mh * mk
        layout[b.i, b.j] = entries
    return Fusion(h, k, phi, fused, layout)


def multiplicity_blocks(t: np.ndarray, src: Bimodule, dst: Bimodule) -> dict[tuple[int, int], np.ndarray]:
    """For an intertwiner t: src -> dst, the matrices t_ij on multiplicity spaces."""
    tn = dst.to_normal(t @ src.from_normal(np.eye(src.dim)))
    out = {}
    for b in src.blocks:
        bd = dst.block(b.i, b.j)
        if bd is None:
            out[b.i, b.j] = np.zeros((0, b.m), dtype=complex)
            continue
        rows = [bd.index(0, kk, 0) for kk in range(bd.m)]
        cols = [b.index(0, kk, 0) for kk in range(b.m)]
        out[b.i, b.j] = tn[np.ix_(rows, cols)]
    return out


def tensor_intertwiners(t: np.ndarray, s: np.ndarray, src: Fusion, dst: Fusion) -> np.ndarray:
    """T ⊗ S: src.h ⊗ src.k -> dst.h ⊗ dst.k, characterized by
    (T ⊗ S) fuse(x, eta) = fuse(T x, S eta)."""
    tb = multiplicity_blocks(t, src.h, dst.h)
    sb = multiplicity_blocks(s, src.k, dst.k)
    out = np.zeros((dst.bimodule.dim, src.bimodule.dim), dtype=complex)
    for b in src.bimodule.blocks:
        bd = dst.bimodule.block(b.i, b.j)
        if bd is None:
            continue
        mat = np.zeros((bd.m, b.m), dtype=complex)
        dst_start = dict(dst.layout[b.i, b.j])
        for j, start in src.layout[b.i, b.j]:
            if j not in dst_start:
                continue
            piece = np.kron(tb[b.i, j], sb[j, b.j])
            d0 = dst_start[j]
            mat[d0:d0 + piece.shape[0], start:start + piece.shape[1]] = piece
        full = np.kron(np.kron(np.eye(b.n), mat), np.eye(b.q))
        out[bd.slice, b.slice] = full
    return out


# ---------------------------------------------------------------------------
# intertwiners


def _generators(algebra: MultiMatrixAlgebra, block: int) -> Iterator[AlgebraElement]:
    n = algebra.block_dims[block]
    for a in range(n - 1):
        yield algebra.matrix_unit(block, a, a + 1)
        yield algebra.matrix_unit(block, a + 1, a)


def _range_basis(p: np.ndarray) -> np.ndarray:
    spec = herm_eig((p + p.conj().T) / 2)
    return spec.eigenvectors[:, spec.eigenvalues > 0.5]


def intertwiner_basis(h: Bimodule, h2: Bimodule, max_unknowns: int = 576, tol: float = 1e-9) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) basis of Hom(H, H2), from the null space of the
    joint commutation equations, solved separately on each pair of central atoms."""
    if h.left != h2.left or h.right != h2.right:
        raise ValidationError("intertwiners need bimodules over the same algebras")
    atoms_n, atoms_m = central_atoms(h.left), central_atoms(h.right)
    basis = []
    for i in range(h.left.num_blocks):
        for j in range(h.right.num_blocks):
            b1 = _range_basis(h.left_action(atoms_n[i]) @ h.right_action(atoms_m[j]))
            b2 = _range_basis(h2.left_action(atoms_n[i]) @ h2.right_action(atoms_m[j]))
            d1, d2 = b1.shape[1], b2.shape[1]
            if not d1 or not d2:
                continue
            if d1 * d2 > max_unknowns:
                basis.extend(_normal_form_intertwiners(h, h2, i, j))
                continue
            gram = np.zeros((d1 * d2, d1 * d2), dtype=complex)
            gens = [(h.left_action(g), h2.left_action(g)) for g in _generators(h.left, i)]
            gens += [(h.right_action(g), h2.right_action(g)) for g in _generators(h.right, j)]
            for g1, g2 in gens:
                r1 = b1.conj().T @ g1 @ b1
                r2 = b2.conj().T @ g2 @ b2
                # row-major vec: vec(r2 X - X r1) = (r2 ⊗ 1 - 1 ⊗ r1^T) vec X
                a = np.kron(r2, np.eye(d1)) - np.kron(np.eye(d2), r1.T)
                gram += a.conj().T @ a
            spec = herm_eig(gram)
            scale = max(1.0, float(spec.eigenvalues[-1]))
            for col in np.where(spec.eigenvalues < tol * scale)[0]:
                x = spec.eigenvectors[:, col].reshape(d2, d1)
                basis.append(b2 @ x @ b1.conj().T)
    return basis


def _normal_form_intertwiners(h: Bimodule, h2: Bimodule, i: int, j: int) -> list[np.ndarray]:
    b1, b2 = h.block(i, j), h2.block(i, j)
    out = []
    for k2 in range(b2.m):
        for k1 in range(b1.m):
            e = np.zeros((b2.m, b1.m))
            e[k2, k1] = 1.0
            t = np.zeros((h2.dim, h.dim), dtype=complex)
            t[b2.slice, b1.slice] = np.kron(np.kron(np.eye(b1.n), e), np.eye(b1.q))
            f1 = np.eye(h.dim) if h.frame is None else h.frame
            f2 = np.eye(h2.dim) if h2.frame is None else h2.frame
            out.append(f2 @ t @ f1.conj().T)
    return out


def intertwiner_residual(t: np.ndarray, h: Bimodule, h2: Bimodule, rng: np.random.Generator | None = None) -> float:
    """Largest commutator norm of t against the two actions on matrix units."""
    worst = 0.0
    for _, _, _, e in h.left.matrix_units():
        worst = max(worst, float(np.linalg.norm(t @ h.left_action(e) - h2.left_action(e) @ t)))
    for _, _, _, e in h.right.matrix_units():
        worst = max(worst, float(np.linalg.norm(t @ h.right_action(e) - h2.right_action(e) @ t)))
    return worst


def cyclic_equivalence(h1: Bimodule, h2: Bimodule) -> np.ndarray:
    """Unitary U: H1 -> H2 with U l(x) r(y) xi1 = l(x) r(y) xi2, built from the
    spanning vectors; raises if the pairing functionals differ."""
    if h1.xi is None or h2.xi is None:
        raise ValidationError("cyclic equivalence needs cyclic vectors on both sides")
    units_m = [y for _, _, _, y in h1.right.matrix_units()]
    r1 = np.array([h1.right_action(y) @ h1.xi for y in units_m]).T
    r2 = np.array([h2.right_action(y) @ h2.xi for y in units_m]).T
    cols1, cols2 = [], []
    for _, _, _, x in h1.left.matrix_units():
        cols1.append(h1.left_action(x) @ r1)
        cols2.append(h2.left_action(x) @ r2)
    a1, a2 = np.hstack(cols1), np.hstack(cols2)
    u = a2 @ np.linalg.pinv(a1, rcond=1e-10)
    if u.shape[0] != u.shape[1]:
        raise ValidationError("cyclic bimodules have different dimensions")
    err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]))
    if err > 1e-7 or np.linalg.norm(u @ a1 - a2) > 1e-7 * max(1.0, np.linalg.norm(a2)):
        raise ValidationError(f"pairings differ: no unitary maps one cyclic vector to the other (defect {err:.2e})")
    return u


def sub_bimodule(h: Bimodule, projection: np.ndarray) -> tuple[Bimodule, np.ndarray]:
    """eH for a projection e in the relative commutant, with its inclusion isometry."""
    v = _range_basis(projection)
    sub = normal_form(h.left, h.right,
                      lambda x: v.conj().T @ h.left_action(x) @ v,
                      lambda y: v.conj().T @ h.right_action(y) @ v, v.shape[1])
    return sub, v


def channel_bimodule(alpha: Channel, phi_in: State) -> tuple[Bimodule, State]:
    """GNS bimodule together with the output state."""
    return gns_bimodule(alpha, phi_in), output_state(alpha, phi_in)
