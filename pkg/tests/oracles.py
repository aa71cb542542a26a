"""Independent reference computations used only by the tests. They avoid the
package's spectral kernels and bimodule machinery where possible."""

import itertools

import numpy as np
import scipy.linalg


def choi_apply(choi_blocks, src_dims, tgt_dims, x_blocks):
    """alpha(x) straight from the Choi definition, with explicit loops."""
    out = []
    for j, q in enumerate(tgt_dims):
        acc = np.zeros((q, q), dtype=complex)
        for i, n in enumerate(src_dims):
            c = choi_blocks[i][j]
            for a, b in itertools.product(range(n), range(n)):
                acc += x_blocks[i][a, b] * c[a * q:(a + 1) * q, b * q:(b + 1) * q]
        out.append(acc)
    return out


def unit(n, a, b):
    e = np.zeros((n, n), dtype=complex)
    e[a, b] = 1
    return e


def gram_rank(alpha, phi, rel=1e-10):
    """Rank of the pairing Gram matrix on the basis e_ab ⊗ e_cd^o of N ⊗ M^o:
    G[x, y] = phi~(x* y), phi~(n ⊗ m^o) = tr(rho^{1/2} alpha(n) rho^{1/2} m)."""
    src, tgt = alpha.source.block_dims, alpha.target.block_dims
    roots = [scipy.linalg.sqrtm(w * r) for w, r in zip(phi.weights, phi.densities)]
    basis_n = [(i, a, b) for i, n in enumerate(src) for a in range(n) for b in range(n)]
    basis_m = [(j, c, d) for j, q in enumerate(tgt) for c in range(q) for d in range(q)]

    def pair(n_blocks, m_blocks):
        img = choi_apply(alpha.choi, src, tgt, n_blocks)
        return sum(np.trace(r @ a @ r @ m) for r, a, m in zip(roots, img, m_blocks))

    def nblocks(i, a, b):
        return [unit(n, a, b) if k == i else np.zeros((n, n)) for k, n in enumerate(src)]

    def mblocks(j, c, d):
        return [unit(q, c, d) if k == j else np.zeros((q, q)) for k, q in enumerate(tgt)]

    basis = list(itertools.product(basis_n, basis_m))
    g = np.zeros((len(basis), len(basis)), dtype=complex)
    for r, ((i, a, b), (j, c, d)) in enumerate(basis):
        for s, ((i2, a2, b2), (j2, c2, d2)) in enumerate(basis):
            # (e_ab ⊗ e_cd^o)* (e_a2b2 ⊗ e_c2d2^o) = e_ba e_a2b2 ⊗ (e_c2d2 e_dc)^o
            if i != i2 or j != j2 or a != a2 or d2 != d:
                continue
            g[r, s] = pair(nblocks(i, b, b2), mblocks(j, c2, c))
    lam = np.linalg.eigvalsh((g + g.conj().T) / 2)
    return int(np.sum(lam > rel * lam.max()))


def pf_norm(d):
    """Operator norm via SVD."""
    return float(np.linalg.svd(np.asarray(d, dtype=float), compute_uv=False)[0])


def relative_entropy(r, s):
    """tr r (log r - log s) with scipy's matrix logarithm; r may be singular."""
    w, v = np.linalg.eigh(r)
    w = np.clip(w, 0, None)
    ent = float(np.sum(w[w > 1e-15] * np.log(w[w > 1e-15])))
    return ent - float(np.trace(r @ scipy.linalg.logm(s)).real)


def entropy_from_density_matrices(data):
    """-(xi, log Delta xi) via the vector state of xi on r(M)' and phi_out ∘ E,
    each assembled as a dense matrix, then scipy logm."""
    h, ci = data.bimodule, data.commutant
    v = h.to_normal(data.xi)
    total = 0.0
    for j, q in enumerate(h.right.block_dims):
        pos = ci._positions(j)
        cols = np.array([[v[p + c] for p in pos] for c in range(q)]).T
        total += relative_entropy(cols @ cols.conj().T, data.modular.numerators[j])
    return total


def log_expectation_dense(op, xi):
    """(xi, log(op) xi) with scipy's logm on the dense operator."""
    return float(np.vdot(xi, scipy.linalg.logm(op) @ xi).real)


def index_curve(w):
    return max(1 / w, 1 / (1 - w))
