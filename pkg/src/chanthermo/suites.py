"""Randomized property suites. Each suite draws one random instance from a
generator and returns named residuals; a trial passes when every residual is
below the tolerance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import MultiMatrixAlgebra, State
from .bimodule import (Bimodule, conjugate, cyclic_equivalence, direct_sum, gns_bimodule,
                       homomorphism_bimodule, identity_bimodule, intertwiner_basis, relative_tensor, sub_bimodule)
from .channel import Channel, bilinear_form, homomorphism_channel, output_state, random_faithful_channel, transpose_channel
from .index import bimodule_index, scalar_dimension
from .modular import connes_cocycle, modular_automorphism, relative_modular
from .numerics import random_unitary
from .thermo import (ThermoConfig, analyze_channel, bimodule_modular, channel_entropy, entropy_trace_formula,
                     free_energy, free_energy_infimum, physical_generator, physical_unitary, right_modular)


# ---------------------------------------------------------------------------
# random instances


def random_algebra(rng: np.random.Generator, max_dim: int, max_blocks: int = 2) -> MultiMatrixAlgebra:
    k = int(rng.integers(1, max_blocks + 1))
    return MultiMatrixAlgebra(tuple(int(n) for n in rng.integers(1, max_dim + 1, size=k)))


def random_factorial_channel(rng: np.random.Generator, max_dim: int) -> Channel:
    n, q = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
    return random_channel_of_rank(MultiMatrixAlgebra((n,)), MultiMatrixAlgebra((q,)), rng)


def random_channel_of_rank(src: MultiMatrixAlgebra, tgt: MultiMatrixAlgebra, rng: np.random.Generator,
                           rank: int | None = None) -> Channel:
    rank = int(rng.integers(1, 4)) if rank is None else rank
    return random_faithful_channel(src, tgt, rank, rng)


def random_any_channel(rng: np.random.Generator, max_dim: int) -> Channel:
    return random_channel_of_rank(random_algebra(rng, max_dim), random_algebra(rng, max_dim), rng)


def random_bimodule(rng: np.random.Generator, left: MultiMatrixAlgebra, right: MultiMatrixAlgebra,
                    mult: np.ndarray) -> Bimodule:
    """Normal-form bimodule rotated by a Haar-random frame."""
    nf = Bimodule(left, right, mult)
    return Bimodule(left, right, mult, random_unitary(nf.dim, rng))


def random_factorial_bimodule(rng: np.random.Generator, max_dim: int, mult: int | None = None) -> Bimodule:
    n, q = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
    m = int(rng.integers(1, 4)) if mult is None else mult
    return random_bimodule(rng, MultiMatrixAlgebra((n,)), MultiMatrixAlgebra((q,)), np.array([[m]]))


def random_homomorphism(rng: np.random.Generator, src: MultiMatrixAlgebra, max_mult: int = 2) -> Channel:
    """x -> ⊕_j ⊕_i x_i ⊗ 1_{k_ij} with a random connected multiplicity pattern."""
    targets = int(rng.integers(1, 3))
    lam = rng.integers(0, max_mult + 1, size=(src.num_blocks, targets))
    lam[:, 0] = np.maximum(lam[:, 0], 1)
    lam[0, :] = np.maximum(lam[0, :], 1)
    dims = tuple(int(x) for x in np.asarray(src.block_dims) @ lam)
    emb = [[(i, int(lam[i, j])) for i in range(src.num_blocks) if lam[i, j]] for j in range(targets)]
    return homomorphism_channel(src, MultiMatrixAlgebra(dims), emb)


def random_states(rng: np.random.Generator, alg: MultiMatrixAlgebra, count: int) -> list[State]:
    return [alg.random_state(rng) for _ in range(count)]


def _norm(x: np.ndarray) -> float:
    return float(np.abs(x).max()) if np.size(x) else 0.0


def _random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# ---------------------------------------------------------------------------
# suites


def chain_rule(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Relative modular chain rule through fusion over ω, and Connes cocycle identities."""
    alg = random_algebra(rng, max_dim)
    phi, omega, psi = random_states(rng, alg, 3)
    h = identity_bimodule(alg)
    fusion = relative_tensor(h, h, omega)
    out = {}
    for t in (0.3, 1.1):
        x, eta = _random_vector(rng, h.dim), _random_vector(rng, h.dim)
        u1 = relative_modular(phi, omega).unitary_matrix(t)
        u2 = relative_modular(omega, psi).unitary_matrix(t)
        u = relative_modular(phi, psi).unitary_matrix(t)
        out[f"chain t={t}"] = _norm(fusion.fuse(u1 @ x, u2 @ eta) - u @ fusion.fuse(x, eta))
        c = connes_cocycle(phi, omega, t) @ connes_cocycle(omega, psi, t)
        out[f"cocycle chain t={t}"] = c.distance(connes_cocycle(phi, psi, t))
        s = 0.7
        lhs = connes_cocycle(phi, psi, s + t)
        rhs = connes_cocycle(phi, psi, s) @ modular_automorphism(psi, s, connes_cocycle(phi, psi, t))
        out[f"cocycle identity t={t}"] = lhs.distance(rhs)
        # the cocycle intertwines the modular flows
        y = alg.random_element(rng)
        ut = connes_cocycle(phi, psi, t)
        out[f"cocycle flow t={t}"] = modular_automorphism(phi, t, y).distance(ut @ modular_automorphism(psi, t, y) @ ut.adjoint())
    return out


def kosaki(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Δ'_H = Ind(H) Δ_H on factorial bimodules."""
    h = random_factorial_bimodule(rng, max_dim)
    phi, psi = h.left.random_state(rng), h.right.random_state(rng)
    lhs = right_modular(h, phi, psi).matrix()
    rhs = bimodule_index(h) * bimodule_modular(h, phi, psi).matrix()
    return {"kosaki": _norm(lhs - rhs) / max(1.0, _norm(rhs))}


def delta_tensor_law(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Δ^{it}_{H⊗K}(φ|ψ) fuse(x, η) = fuse(Δ^{it}_H(φ|ω) x, Δ^{it}_K(ω|ψ) η)
    for homomorphism-presented factorial H, K."""
    n = int(rng.integers(1, max_dim + 1))
    k1, k2 = (int(x) for x in rng.integers(1, 3, size=2))
    a, mid, top = MultiMatrixAlgebra((n,)), MultiMatrixAlgebra((n * k1,)), MultiMatrixAlgebra((n * k1 * k2,))
    h = homomorphism_bimodule(homomorphism_channel(a, mid, [[(0, k1)]]))
    k = homomorphism_bimodule(homomorphism_channel(mid, top, [[(0, k2)]]))
    phi, omega, psi = a.random_state(rng), mid.random_state(rng), top.random_state(rng)
    fusion = relative_tensor(h, k, omega)
    t = float(rng.uniform(-2, 2))
    x, eta = _random_vector(rng, h.dim), _random_vector(rng, k.dim)
    lhs = bimodule_modular(fusion.bimodule, phi, psi).unitary(t) @ fusion.fuse(x, eta)
    rhs = fusion.fuse(bimodule_modular(h, phi, omega).unitary(t) @ x, bimodule_modular(k, omega, psi).unitary(t) @ eta)
    return {"tensor law": _norm(lhs - rhs) / max(1.0, _norm(rhs))}


def delta_conjugate_law(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Δ^{it}_{H̄}(ψ|φ) = Ind(H)^{-it} conj(Δ^{it}_H(φ|ψ)) on factorial H."""
    h = random_factorial_bimodule(rng, max_dim)
    hb = conjugate(h)
    phi, psi = h.left.random_state(rng), h.right.random_state(rng)
    t = float(rng.uniform(-2, 2))
    lhs = bimodule_modular(hb, psi, phi).unitary(t)
    rhs = bimodule_index(h) ** (-1j * t) * bimodule_modular(h, phi, psi).unitary(t).conj()
    return {"conjugate law": _norm(lhs - rhs)}


def delta_intertwiner_law(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """T Δ^{it}_H = (d_{H'}/d_H)^{it} Δ^{it}_{H'} T, and the restriction rule
    Δ_H|_{eH} = (d_{eH}/d_H) Δ_{eH}."""
    h = random_factorial_bimodule(rng, max_dim)
    m2 = int(rng.integers(1, 4))
    h2 = random_bimodule(rng, h.left, h.right, np.array([[m2]]))
    phi, psi = h.left.random_state(rng), h.right.random_state(rng)
    t = float(rng.uniform(-2, 2))
    basis = intertwiner_basis(h, h2)
    coeff = _random_vector(rng, len(basis))
    tmat = sum(c * b for c, b in zip(coeff, basis))
    d1, d2 = scalar_dimension(h), scalar_dimension(h2)
    lhs = tmat @ bimodule_modular(h, phi, psi).unitary(t)
    rhs = (d2 / d1) ** (1j * t) * bimodule_modular(h2, phi, psi).unitary(t) @ tmat
    out = {"intertwiner law": _norm(lhs - rhs), "intertwiner count": float(len(basis) != h.multiplicity[0, 0] * m2)}
    # restriction to a sub-bimodule cut out by a projection on the multiplicity space
    m = int(h.multiplicity[0, 0])
    if m > 1:
        r = int(rng.integers(1, m))
        u = random_unitary(m, rng)
        proj = u[:, :r] @ u[:, :r].conj().T
        e = h.multiplicity_operator({(0, 0): proj})
        sub, v = sub_bimodule(h, e)
        full = v.conj().T @ bimodule_modular(h, phi, psi).matrix() @ v
        part = (scalar_dimension(sub) / scalar_dimension(h)) * bimodule_modular(sub, phi, psi).matrix()
        out["restriction rule"] = _norm(full - part) / max(1.0, _norm(part))
    return out


def u_naturality(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Physical unitary: phase-free naturality, direct-sum and tensor additivity,
    conjugation symmetry, and the uniqueness symmetry of K_H - log Δ_H."""
    left, right = random_algebra(rng, max_dim), random_algebra(rng, max_dim)
    m1 = rng.integers(0, 3, size=(left.num_blocks, right.num_blocks))
    m1[0, :] = np.maximum(m1[0, :], 1)
    m1[:, 0] = np.maximum(m1[:, 0], 1)
    m2 = m1 + rng.integers(0, 2, size=m1.shape)
    h1, h2 = random_bimodule(rng, left, right, m1), random_bimodule(rng, left, right, m2)
    phi, psi = left.random_state(rng), right.random_state(rng)
    t = float(rng.uniform(-2, 2))
    u1, u2 = physical_unitary(h1, phi, psi, t), physical_unitary(h2, phi, psi, t)
    basis = intertwiner_basis(h1, h2)
    tmat = sum(c * b for c, b in zip(_random_vector(rng, len(basis)), basis))
    out = {"naturality": _norm(tmat @ u1 - u2 @ tmat)}
    ds = direct_sum(h1, h2)
    us = physical_unitary(ds.bimodule, phi, psi, t)
    (i1, i2), (p1, p2) = ds.injections, ds.projections
    out["direct sum"] = _norm(us - (i1 @ u1 @ p1 + i2 @ u2 @ p2))
    hb = conjugate(h1)
    out["conjugation"] = _norm(physical_unitary(hb, psi, phi, t) - u1.conj())
    # tensor additivity on homomorphism-presented pairs
    base = random_algebra(rng, 2)
    th = random_homomorphism(rng, base)
    th2 = random_homomorphism(rng, th.target, max_mult=1)
    a, b = homomorphism_bimodule(th), homomorphism_bimodule(th2)
    bphi = base.random_state(rng)
    omega, chi = th.target.random_state(rng), th2.target.random_state(rng)
    fusion = relative_tensor(a, b, omega)
    x, eta = _random_vector(rng, a.dim), _random_vector(rng, b.dim)
    lhs = physical_unitary(fusion.bimodule, bphi, chi, t) @ fusion.fuse(x, eta)
    rhs = fusion.fuse(physical_unitary(a, bphi, omega, t) @ x, physical_unitary(b, omega, chi, t) @ eta)
    out["tensor additivity"] = _norm(lhs - rhs) / max(1.0, _norm(rhs))
    # uniqueness symmetry on a factorial bimodule
    f = random_factorial_bimodule(rng, max_dim)
    fb = conjugate(f)
    fphi, fpsi = f.left.random_state(rng), f.right.random_state(rng)
    gap = physical_generator(f, fphi, fpsi) - bimodule_modular(f, fphi, fpsi).log()
    gap_b = physical_generator(fb, fpsi, fphi) - bimodule_modular(fb, fpsi, fphi).log()
    out["uniqueness symmetry"] = _norm(gap.conj() - gap_b)
    return out


def transpose_symmetry(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Transpose channel: pairing identity, φ_in = φ_out ∘ α', H_{α'} ≅ conj(H_α)
    by an explicit unitary, and F_{α,φin} = F_{α',φout}."""
    alpha = random_any_channel(rng, max_dim)
    phi_in = alpha.target.random_state(rng)
    phi_out = output_state(alpha, phi_in)
    beta = transpose_channel(alpha, phi_in)
    n, m = alpha.source.random_element(rng), alpha.target.random_element(rng)
    out = {"pairing": abs(bilinear_form(phi_in, alpha(n), m) - bilinear_form(phi_out, beta(m), n))}
    back = output_state(beta, phi_out)
    out["input recovered"] = max(float(np.abs(back.weights - phi_in.weights).max()),
                                 max(_norm(a - b) for a, b in zip(back.densities, phi_in.densities)))
    h, hp = gns_bimodule(alpha, phi_in), gns_bimodule(beta, phi_out)
    out["transposed multiplicities"] = float(np.any(hp.multiplicity != h.multiplicity.T))
    hb = conjugate(h)
    u = cyclic_equivalence(hp, hb)
    y = alpha.target.random_element(rng)
    out["equivalence intertwines"] = _norm(u @ hp.left_action(y) - hb.left_action(y) @ u)
    cfg = ThermoConfig()
    f1 = free_energy(analyze_channel(alpha, phi_in), cfg).value
    f2 = free_energy(analyze_channel(beta, phi_out), cfg).value
    out["free energy"] = abs(f1 - f2)
    return out


def landauer_sweep(rng: np.random.Generator, max_dim: int) -> dict[str, float]:
    """Integer Landauer bound, entropy positivity and the two free-energy routes."""
    alpha = random_any_channel(rng, max_dim)
    phi_in = alpha.target.random_state(rng)
    cfg = ThermoConfig()
    data = analyze_channel(alpha, phi_in)
    inf = free_energy_infimum(alpha, cfg, data.bimodule.multiplicity)
    f = free_energy(data, cfg)
    s = channel_entropy(data)
    out = {
        "free energy routes": f.discrepancy,
        "entropy sign": max(0.0, -s),
        "entropy trace formula": abs(s - entropy_trace_formula(data)),
        "free energy sign": max(0.0, f.value),
    }
    if abs(inf.value) > 1e-6:
        out["landauer bound"] = max(0.0, cfg.landauer_unit - (-inf.value) - 1e-9)
    if data.bimodule.is_factorial():
        x = -cfg.beta * f.value
        out["integer dimension"] = abs(np.exp(x) - np.round(np.exp(x)))
    return out


@dataclass(frozen=True)
class Suite:
    name: str
    run: Callable[[np.random.Generator, int], dict[str, float]]


SUITES: tuple[Suite, ...] = (
    Suite("chain_rule", chain_rule),
    Suite("kosaki", kosaki),
    Suite("delta_tensor_law", delta_tensor_law),
    Suite("delta_conjugate_law", delta_conjugate_law),
    Suite("delta_intertwiner_law", delta_intertwiner_law),
    Suite("u_naturality", u_naturality),
    Suite("transpose_symmetry", transpose_symmetry),
    Suite("landauer_sweep", landauer_sweep),
)


def trial_rng(seed: int, suite_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, suite_index, trial])
