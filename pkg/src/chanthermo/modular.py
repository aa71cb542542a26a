"""Standard form, relative modular operators, Connes cocycles, Araki relative
entropy and spatial derivatives at finite dimension."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, MultiMatrixAlgebra, State
from .numerics import (
    SingularityError,
    block_diag,
    ValidationError,
    func_calc,
    herm_eig,
    positivity_floor,
)


@dataclass(frozen=True)
class StandardForm:
    """L²(M): blocks x_i with <x, y> = sum tr(x_i* y_i), stored row-major."""

    algebra: MultiMatrixAlgebra

    @property
    def dim(self) -> int:
        return self.algebra.dimension

    def vec(self, x: AlgebraElement) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in x.blocks])

    def unvec(self, v: np.ndarray) -> AlgebraElement:
        blocks, pos = [], 0
        for n in self.algebra.block_dims:
            blocks.append(np.asarray(v[pos:pos + n * n]).reshape(n, n))
            pos += n * n
        return AlgebraElement(self.algebra, tuple(blocks))

    def left(self, m: AlgebraElement) -> np.ndarray:
        return block_diag([np.kron(b, np.eye(len(b))) for b in m.blocks])

    def right(self, m: AlgebraElement) -> np.ndarray:
        return block_diag([np.kron(np.eye(len(b)), b.T) for b in m.blocks])

    def conjugation(self, v: np.ndarray) -> np.ndarray:
        """J: x -> x*."""
        return self.vec(self.unvec(v).adjoint())


def cone_representative(phi: State) -> AlgebraElement:
    """Blocks sqrt(mu_i) rho_i^{1/2}."""
    return AlgebraElement(phi.algebra, tuple(np.sqrt(w) * func_calc(r, "sqrt") for w, r in zip(phi.weights, phi.densities)))


def vector_rep(phi: State) -> np.ndarray:
    if not phi.is_faithful():
        raise SingularityError("vector representative requested for a non-faithful state")
    return StandardForm(phi.algebra).vec(cone_representative(phi))


def modular_automorphism(phi: State, t: float, x: AlgebraElement) -> AlgebraElement:
    """sigma_t(x) = rho^{it} x rho^{-it}."""
    blocks = []
    for r, b in zip(phi.densities, x.blocks):
        u = func_calc(r, "ipow", t)
        blocks.append(u @ b @ u.conj().T)
    return AlgebraElement(x.algebra, tuple(blocks))


@dataclass(frozen=True)
class RelativeModular:
    """Delta(phi|psi): x -> rho_phi x rho_psi^{-1} blockwise, weights folded in."""

    phi: State
    psi: State

    def _sides(self):
        return zip(self.phi.weighted_densities(), self.psi.weighted_densities())

    def apply(self, x: AlgebraElement) -> AlgebraElement:
        blocks = [a @ b @ func_calc(c, "inv") for (a, c), b in zip(self._sides(), x.blocks)]
        return AlgebraElement(x.algebra, tuple(blocks))

    def unitary(self, t: float, x: AlgebraElement) -> AlgebraElement:
        """Delta^{it} x."""
        blocks = [func_calc(a, "ipow", t) @ b @ func_calc(c, "ipow", -t) for (a, c), b in zip(self._sides(), x.blocks)]
        return AlgebraElement(x.algebra, tuple(blocks))

    def log_apply(self, x: AlgebraElement) -> AlgebraElement:
        blocks = [func_calc(a, "log") @ b - b @ func_calc(c, "log") for (a, c), b in zip(self._sides(), x.blocks)]
        return AlgebraElement(x.algebra, tuple(blocks))

    def matrix(self) -> np.ndarray:
        return block_diag([np.kron(a, func_calc(c, "inv").T) for a, c in self._sides()])

    def unitary_matrix(self, t: float) -> np.ndarray:
        return block_diag([np.kron(func_calc(a, "ipow", t), func_calc(c, "ipow", -t).T) for a, c in self._sides()])


def relative_modular(phi: State, psi: State) -> RelativeModular:
    if phi.algebra != psi.algebra:
        raise ValidationError("states live on different algebras")
    if not psi.is_faithful():
        raise SingularityError("relative modular operator needs a faithful second state")
    return RelativeModular(phi, psi)


def _log_expectation(a: np.ndarray, c: np.ndarray, eta: np.ndarray) -> float:
    """(eta, log Delta eta) for Delta: x -> a x c^{-1} on one block, restricted to
    the support of c; +inf when eta reaches the kernel of a."""
    sa, sc = herm_eig(a), herm_eig(c)
    # spectral weights of eta: |<u_k| eta |v_l>|^2
    w = np.abs(sa.eigenvectors.conj().T @ eta @ sc.eigenvectors) ** 2
    floor_c = positivity_floor(sc.eigenvalues)
    keep = sc.eigenvalues > floor_c
    w = w[:, keep]
    lc = np.log(sc.eigenvalues[keep])
    floor_a = positivity_floor(sa.eigenvalues)
    dead = sa.eigenvalues <= floor_a
    if np.any(w[dead] > 1e-14):
        return -np.inf
    la = np.log(np.where(dead, 1.0, sa.eigenvalues))
    return float(np.sum(w[~dead] * (la[~dead, None] - lc[None, :])))


def araki_entropy(phi: State, psi: State) -> float:
    """S(phi|psi) = -(eta, log Delta_{xi,eta} eta), xi and eta the cone
    representatives of phi and psi; +inf when supp(psi) is not under supp(phi)."""
    if phi.algebra != psi.algebra:
        raise ValidationError("states live on different algebras")
    eta = cone_representative(psi)
    total = 0.0
    for a, c, e in zip(phi.weighted_densities(), psi.weighted_densities(), eta.blocks):
        if np.trace(c).real <= 0:
            continue
        val = _log_expectation(a, c, e)
        if val == -np.inf:
            return np.inf
        total += val
    return -total


def connes_cocycle(phi: State, omega: State, t: float) -> AlgebraElement:
    """(Dphi : Domega)_t = rho_phi^{it} rho_omega^{-it} with weights folded in."""
    if not (phi.is_faithful() and omega.is_faithful()):
        raise SingularityError("Connes cocycle needs faithful states")
    blocks = [func_calc(a, "ipow", t) @ func_calc(c, "ipow", -t) for a, c in zip(phi.weighted_densities(), omega.weighted_densities())]
    return AlgebraElement(phi.algebra, tuple(blocks))


@dataclass(frozen=True)
class RepresentedPair:
    """A and its commutant A' on H ≅ ⊕_z C^{a_z} ⊗ C^{b_z}.

    ``frame`` has the joint-block basis vectors as columns (in H coordinates), so
    a vector v in block coordinates is ``frame @ v`` in H. A acts on the first
    tensor slot and A' on the second.
    """

    left_dims: tuple[int, ...]
    right_dims: tuple[int, ...]
    frame: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.left_dims) != len(self.right_dims):
            raise ValidationError("joint blocks need both a left and a right dimension")
        if self.frame is not None and self.frame.shape[1] != self.dim:
            raise ValidationError("frame does not match the joint block dimensions")

    @property
    def dim(self) -> int:
        return sum(a * b for a, b in zip(self.left_dims, self.right_dims))

    @property
    def left_algebra(self) -> MultiMatrixAlgebra:
        return MultiMatrixAlgebra(self.left_dims)

    @property
    def right_algebra(self) -> MultiMatrixAlgebra:
        return MultiMatrixAlgebra(self.right_dims)

    def lift(self, op: np.ndarray) -> np.ndarray:
        if self.frame is None:
            return op
        return self.frame @ op @ self.frame.conj().T

    def left_action(self, x: AlgebraElement) -> np.ndarray:
        return self.lift(block_diag([np.kron(b, np.eye(d)) for b, d in zip(x.blocks, self.right_dims)]))

    def right_action(self, y: AlgebraElement) -> np.ndarray:
        return self.lift(block_diag([np.kron(np.eye(d), b) for b, d in zip(y.blocks, self.left_dims)]))


@dataclass(frozen=True)
class KroneckerOperator:
    """Positive operator ⊕_z A_z ⊗ B_z^{-1} on a represented pair."""

    pair: RepresentedPair
    numerators: tuple[np.ndarray, ...]
    denominators: tuple[np.ndarray, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def _spectra(self):
        if "spec" not in self._cache:
            self._cache["spec"] = [(herm_eig(a), herm_eig(b)) for a, b in zip(self.numerators, self.denominators)]
        return self._cache["spec"]

    def _assemble(self, fa, fb) -> np.ndarray:
        blocks = []
        for sa, sb in self._spectra():
            blocks.append(np.kron(sa.apply(fa), sb.apply(fb)))
        return self.pair.lift(block_diag(blocks))

    def matrix(self) -> np.ndarray:
        return self._assemble(lambda x: x, lambda x: 1.0 / x)

    def unitary(self, t: float) -> np.ndarray:
        self._require_invertible()
        return self._assemble(lambda x: np.exp(1j * t * np.log(x)), lambda x: np.exp(-1j * t * np.log(x)))

    def log(self) -> np.ndarray:
        self._require_invertible()
        blocks = []
        for sa, sb in self._spectra():
            la, lb = sa.apply(np.log), sb.apply(np.log)
            blocks.append(np.kron(la, np.eye(len(lb))) - np.kron(np.eye(len(la)), lb))
        return self.pair.lift(block_diag(blocks))

    def log_spectrum_expectation(self, v: np.ndarray) -> float:
        """(v, log Delta v), computed from the factor spectra."""
        self._require_invertible()
        if self.pair.frame is not None:
            v = self.pair.frame.conj().T @ v
        total, pos = 0.0, 0
        for (sa, sb), a, b in zip(self._spectra(), self.pair.left_dims, self.pair.right_dims):
            block = v[pos:pos + a * b].reshape(a, b)
            pos += a * b
            w = np.abs(sa.eigenvectors.conj().T @ block @ sb.eigenvectors.conj()) ** 2
            total += float(np.sum(w * (np.log(sa.eigenvalues)[:, None] - np.log(sb.eigenvalues)[None, :])))
        return total

    def scaled(self, c: float) -> "KroneckerOperator":
        return KroneckerOperator(self.pair, tuple(c * a for a in self.numerators), self.denominators)

    def _require_invertible(self) -> None:
        for sa, sb in self._spectra():
            for s in (sa, sb):
                if s.eigenvalues[0] <= positivity_floor(s.eigenvalues):
                    raise SingularityError("spatial derivative is not invertible")


def spatial_derivative(
    pair: RepresentedPair,
    phi: State | Sequence[np.ndarray],
    psi_prime: State | Sequence[np.ndarray],
) -> KroneckerOperator:
    """d(phi)/d(psi'): on joint block z, (lambda_z rho_z) ⊗ (mu_z sigma_z)^{-1}.

    States may be given as ``State`` objects or directly as per-block positive
    matrices with weights folded in (unnormalized functionals are allowed).
    """
    num = phi.weighted_densities() if isinstance(phi, State) else tuple(np.asarray(b, dtype=complex) for b in phi)
    den = psi_prime.weighted_densities() if isinstance(psi_prime, State) else tuple(np.asarray(b, dtype=complex) for b in psi_prime)
    if len(num) != len(pair.left_dims) or len(den) != len(pair.right_dims):
        raise ValidationError("state block count does not match the represented pair")
    for a, d in zip(num, pair.left_dims):
        if a.shape != (d, d):
            raise ValidationError("state block shape does not match the represented algebra")
    for b, d in zip(den, pair.right_dims):
        if b.shape != (d, d):
            raise ValidationError("state block shape does not match the commutant")
        lam = herm_eig(b).eigenvalues
        if lam[0] <= positivity_floor(lam):
            raise SingularityError("commutant state is not faithful")
    return KroneckerOperator(pair, num, den)


def standard_pair(algebra: MultiMatrixAlgebra) -> RepresentedPair:
    """(ℓ(M), r(M)) on L²(M); r(m) acts as m^T on the second slot."""
    return RepresentedPair(algebra.block_dims, algebra.block_dims, None)


def transposed_blocks(state: State) -> tuple[np.ndarray, ...]:
    """Weighted densities of psi·r^{-1} as a state on r(M) ≅ ⊕ M_n acting by m^T."""
    return tuple(b.T for b in state.weighted_densities())
