"""Modular operator, physical Hamiltonian, entropy and free energy of a channel,
together with the state infimum of the free energy and Landauer verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import MultiMatrixAlgebra, State
from .bimodule import Bimodule, gns_bimodule
from .channel import Channel, output_state
from .index import (CommutantInclusion, InclusionData, combined_minimal_expectation,
                    commutant_inclusion, matrix_dimension)
from .modular import KroneckerOperator, RepresentedPair, spatial_derivative, transposed_blocks
from .numerics import ValidationError, herm_eig, pf_eigen


@dataclass(frozen=True)
class ThermoConfig:
    beta: float = 1.0
    boltzmann: float = 1.0
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if not (self.beta > 0 and self.boltzmann > 0 and np.isfinite(self.beta) and np.isfinite(self.boltzmann)):
            raise ValidationError("beta and the Boltzmann constant must be positive and finite")

    @property
    def temperature(self) -> float:
        return 1.0 / (self.boltzmann * self.beta)

    @property
    def landauer_unit(self) -> float:
        """kT log 2."""
        return self.boltzmann * self.temperature * np.log(2.0)


# ---------------------------------------------------------------------------
# modular operators of bimodules


def bimodule_modular(h: Bimodule, phi: State, psi: State) -> KroneckerOperator:
    """Δ_H(φ|ψ) = d(φ ∘ l^{-1} ∘ ε) / d(ψ ∘ r^{-1}), with ε the minimal expectation
    of l(N) ⊂ r(M)'. Pair: A = r(M)', A' = r(M)."""
    if phi.algebra != h.left or psi.algebra != h.right:
        raise ValidationError("states must live on the left and right algebras of the bimodule")
    ci = commutant_inclusion(h)
    num = combined_minimal_expectation(ci.inclusion).as_channel().dual(phi.density_element()).blocks
    return spatial_derivative(ci.pair(), num, transposed_blocks(psi))


def _left_commutant_pair(h: Bimodule) -> RepresentedPair:
    """(l(N), l(N)') on H; block i of l(N)' is ⊕_j C^{q_j} ⊗ C^{m_ij}, ordered (j, c, k)."""
    cols = []
    for i, n in enumerate(h.left.block_dims):
        pieces = [b for b in h.blocks if b.i == i]
        for a in range(n):
            for b in pieces:
                for c in range(b.q):
                    for k in range(b.m):
                        e = np.zeros(h.dim, dtype=complex)
                        e[b.index(a, k, c)] = 1.0
                        cols.append(h.from_normal(e))
    right_dims = tuple(int(sum(h.multiplicity[i, j] * q for j, q in enumerate(h.right.block_dims)))
                       for i in range(h.left.num_blocks))
    return RepresentedPair(h.left.block_dims, right_dims, np.array(cols).T)


def right_modular(h: Bimodule, phi: State, psi: State) -> KroneckerOperator:
    """Δ'_H(φ|ψ) = d(φ ∘ l^{-1}) / d(ψ ∘ r^{-1} ∘ ε'), with ε' the minimal expectation
    of r(M) ⊂ l(N)'. Pair: A = l(N), A' = l(N)'."""
    if phi.algebra != h.left or psi.algebra != h.right:
        raise ValidationError("states must live on the left and right algebras of the bimodule")
    inc = InclusionData(h.right, h.multiplicity.T)
    rm = MultiMatrixAlgebra(h.right.block_dims)
    den = combined_minimal_expectation(inc).as_channel().dual(rm.element(transposed_blocks(psi))).blocks
    return spatial_derivative(_left_commutant_pair(h), phi.weighted_densities(), den)


def expectation_weights(h: Bimodule) -> np.ndarray:
    """w_ij of the minimal expectation of l(N) ⊂ r(M)'."""
    return combined_minimal_expectation(commutant_inclusion(h).inclusion).weights


def physical_generator(h: Bimodule, phi: State, psi: State) -> np.ndarray:
    """K_H = ⊕_ij (log Δ_{H_ij}(φ_i|ψ_j) + log d_ij), with H_ij the factorial pieces."""
    out = np.zeros((h.dim, h.dim), dtype=complex)
    rho, sigma = phi.weighted_densities(), psi.weighted_densities()
    for b in h.blocks:
        la = herm_eig(rho[b.i]).apply(np.log)
        lb = herm_eig(sigma[b.j].T).apply(np.log)
        block = np.kron(np.kron(la, np.eye(b.m)), np.eye(b.q)) - np.kron(np.eye(b.n * b.m), lb)
        # the factorial piece carries Δ_ij = ρ ⊗ 1 ⊗ σ^{-T} / m_ij, so the d_ij factors cancel
        out[b.slice, b.slice] = block
    return h.lift(out)


def physical_unitary(h: Bimodule, phi: State, psi: State, t: float) -> np.ndarray:
    """U_t^H(φ|ψ) = exp(i t K_H): on H_ij, ρ_i^{it} ⊗ 1 ⊗ (σ_j^T)^{-it}."""
    out = np.zeros((h.dim, h.dim), dtype=complex)
    rho, sigma = phi.weighted_densities(), psi.weighted_densities()
    for b in h.blocks:
        ua = herm_eig(rho[b.i]).apply(lambda x: np.exp(1j * t * np.log(x)))
        ub = herm_eig(sigma[b.j].T).apply(lambda x: np.exp(-1j * t * np.log(x)))
        out[b.slice, b.slice] = np.kron(np.kron(ua, np.eye(b.m)), ub)
    return h.lift(out)


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True, eq=False)
class ChannelData:
    """Everything derived from (α, φ_in): output state, GNS bimodule, the
    inclusion l(N) ⊂ r(M)' and the modular operator."""

    alpha: Channel
    phi_in: State
    phi_out: State
    bimodule: Bimodule
    commutant: CommutantInclusion
    modular: KroneckerOperator
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def xi(self) -> np.ndarray:
        return self.bimodule.xi

    @property
    def dimension(self) -> np.ndarray:
        return matrix_dimension(self.bimodule).entries

    def sector_weights(self) -> np.ndarray:
        """||ξ_ij||² = φ_in(α(p_i) q_j)."""
        h = self.bimodule
        out = np.zeros(h.multiplicity.shape)
        v = h.to_normal(self.xi)
        for b in h.blocks:
            out[b.i, b.j] = float(np.vdot(v[b.slice], v[b.slice]).real)
        return out


def analyze_channel(alpha: Channel, phi_in: State) -> ChannelData:
    if not phi_in.is_faithful():
        raise ValidationError("input state must be faithful")
    phi_out = output_state(alpha, phi_in)
    if not phi_out.is_faithful():
        raise ValidationError("channel is not faithful: output state has a kernel")
    h = gns_bimodule(alpha, phi_in)
    ci = commutant_inclusion(h)
    delta = bimodule_modular(h, phi_out, phi_in)
    return ChannelData(alpha, phi_in, phi_out, h, ci, delta)


def channel_modular(alpha: Channel, phi_in: State) -> KroneckerOperator:
    """Δ_{α,φin} = Δ_{H_α}(φ_out|φ_in)."""
    return analyze_channel(alpha, phi_in).modular


def _as_data(alpha, phi_in) -> ChannelData:
    return alpha if isinstance(alpha, ChannelData) else analyze_channel(alpha, phi_in)


def channel_entropy(alpha: Channel | ChannelData, phi_in: State | None = None) -> float:
    """S = -(ξ, log Δ ξ), from the factor spectra of Δ."""
    data = _as_data(alpha, phi_in)
    return -data.modular.log_spectrum_expectation(data.xi)


def _relative_entropy(r: np.ndarray, s: np.ndarray) -> float:
    """tr r (log r - log s) for PSD r and positive definite s."""
    sr, ss = herm_eig(r), herm_eig(s)
    lam = np.clip(sr.eigenvalues, 0.0, None)
    pos = lam > 0
    ent = float(np.sum(lam[pos] * np.log(lam[pos])))
    cross = np.abs(sr.eigenvectors.conj().T @ ss.eigenvectors) ** 2
    return ent - float(lam @ cross @ np.log(ss.eigenvalues))


def entropy_trace_formula(data: ChannelData) -> float:
    """Independent route: relative entropy, on r(M)', between the vector state
    of ξ and φ_out ∘ Φ, from density matrices."""
    ci, h = data.commutant, data.bimodule
    dens = []
    v = h.to_normal(data.xi)
    for j, q in enumerate(h.right.block_dims):
        pos = ci._positions(j)
        cols = np.array([[v[p + c] for p in pos] for c in range(q)]).T
        dens.append(cols @ cols.conj().T)
    target = data.modular.numerators
    return sum(_relative_entropy(r, s) for r, s in zip(dens, target))


def physical_hamiltonian(data: ChannelData, cfg: ThermoConfig) -> np.ndarray:
    """H = -(log Δ + log D) / β."""
    log_d = matrix_dimension(data.bimodule).log_operator(data.bimodule)
    return -(data.modular.log() + log_d) / cfg.beta


def mean_energy(data: ChannelData, cfg: ThermoConfig) -> float:
    ham = physical_hamiltonian(data, cfg)
    return float(np.vdot(data.xi, ham @ data.xi).real)


def log_dimension_expectation(data: ChannelData) -> float:
    """(ξ, log D ξ) = sum_ij ||ξ_ij||² log m_ij."""
    w = data.sector_weights()
    m = data.bimodule.multiplicity
    return float(np.sum(np.where(m > 0, w * np.log(np.where(m > 0, m, 1)), 0.0)))


@dataclass(frozen=True)
class FreeEnergy:
    value: float
    from_energy: float
    from_dimension: float

    @property
    def discrepancy(self) -> float:
        return abs(self.from_energy - self.from_dimension)


def free_energy(data: ChannelData, cfg: ThermoConfig) -> FreeEnergy:
    """F = E - S/β and F = -(ξ, log D ξ)/β."""
    e = mean_energy(data, cfg)
    s = channel_entropy(data)
    route_a = e - s / cfg.beta
    route_b = -log_dimension_expectation(data) / cfg.beta
    return FreeEnergy(route_b, route_a, route_b)


def partition_value(data: ChannelData, cfg: ThermoConfig) -> float:
    """(ξ, e^{-βH} ξ) = (ξ, D Δ ξ)."""
    d_op = matrix_dimension(data.bimodule).operator(data.bimodule)
    return float(np.vdot(data.xi, d_op @ data.modular.matrix() @ data.xi).real)


@dataclass(frozen=True)
class Infimum:
    value: float
    attained: bool
    generator: np.ndarray


def dimension_observable(alpha: Channel, multiplicity: np.ndarray):
    """G = sum_ij log(m_ij) α(p_i) q_j in M, so that (ξ, log D ξ) = φ_in(G)."""
    from .algebra import central_atoms

    atoms = central_atoms(alpha.source)
    blocks = []
    for j, q in enumerate(alpha.target.block_dims):
        g = np.zeros((q, q), dtype=complex)
        for i, p in enumerate(atoms):
            if multiplicity[i, j] > 0:
                g += np.log(multiplicity[i, j]) * alpha(p).blocks[j]
        blocks.append(g)
    return alpha.target.element(blocks)


def free_energy_infimum(alpha: Channel, cfg: ThermoConfig, multiplicity: np.ndarray | None = None) -> Infimum:
    """F_α = inf over faithful φ_in of -φ_in(G)/β = -λ_max(G)/β; attained by a
    faithful state exactly when G is a scalar."""
    if multiplicity is None:
        multiplicity = gns_bimodule(alpha, alpha.target.tracial_state()).multiplicity
    g = dimension_observable(alpha, multiplicity)
    eigs = np.concatenate([herm_eig(b).eigenvalues for b in g.blocks])
    top, bottom = float(eigs.max()), float(eigs.min())
    return Infimum(-top / cfg.beta, top - bottom <= 1e-10 * max(1.0, abs(top)), g.to_matrix())


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ThermoReport:
    channel_id: str
    multiplicity: np.ndarray
    scalar_dimension: float
    index: float
    entropy: float
    mean_energy: float
    free_energy: float
    free_energy_check: float
    free_energy_infimum: float
    infimum_attained: bool
    landauer_bound: float
    reversible: bool
    bound_satisfied: bool
    factorial: bool

    def violations(self, tol: float = 1e-8) -> list[str]:
        out = []
        if abs(self.free_energy - self.free_energy_check) > tol:
            out.append(f"free energy routes disagree by {abs(self.free_energy - self.free_energy_check):.3e}")
        if self.entropy < -tol:
            out.append(f"negative entropy {self.entropy:.3e}")
        if self.free_energy > tol:
            out.append(f"positive free energy {self.free_energy:.3e}")
        if not self.bound_satisfied:
            out.append("Landauer bound violated")
        return out


def landauer_verdict(alpha: Channel, phi_in: State, cfg: ThermoConfig | None = None, channel_id: str = "channel") -> ThermoReport:
    cfg = cfg or ThermoConfig()
    data = analyze_channel(alpha, phi_in)
    m = data.bimodule.multiplicity
    d = pf_eigen(m.astype(float)).norm
    s = channel_entropy(data)
    e = mean_energy(data, cfg)
    f = free_energy(data, cfg)
    inf = free_energy_infimum(alpha, cfg, m)
    reversible = abs(inf.value) <= 1e-6 * cfg.temperature
    bound = cfg.landauer_unit
    return ThermoReport(
        channel_id=channel_id,
        multiplicity=m,
        scalar_dimension=d,
        index=d * d,
        entropy=s,
        mean_energy=e,
        free_energy=f.value,
        free_energy_check=f.from_energy,
        free_energy_infimum=inf.value,
        infimum_attained=inf.attained,
        landauer_bound=bound,
        reversible=reversible,
        bound_satisfied=reversible or -inf.value >= bound - 1e-9,
        factorial=data.bimodule.is_factorial(),
    )
