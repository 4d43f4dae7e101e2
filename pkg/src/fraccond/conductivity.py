"""The anisotropic nonlocal conductivity operator and its bilinear form.

The bilinear form pairs the two-point gradients of two nodal fields through
the anisotropy kernel:

    B(u, v) = sum_{i,j} w_i w_j [A(x_i, y_j) . grad_s u(i,j)] . grad_s v(i,j).

Assembly collapses every pair (i, j) to the scalar
g(i,j) = zeta(i,j)^T A(i,j) zeta(i,j), after which

    B(u, v) = sum_{i,j} W_ij (u_j - u_i)(v_j - v_i),   W = (h^dim)^2 g,

so the stiffness matrix diag(rowsum W + colsum W) - W - W^T is symmetric by
construction, and the matrix-antisymmetric and swap-antisymmetric parts of A
cancel structurally (the natural gauge): only A_s influences the operator.

Row blocks of g are independent, so assembly is parallelized over a thread
pool with a fixed per-row summation order; results are bitwise identical
for every worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from fraccond.anisotropy import AnisotropyKernel, PhiSequence, symmetrize
from fraccond.pairs import ZetaKernel, frac_gradient, frac_divergence, pair_inner

__all__ = [
    "StiffnessOperator",
    "assemble_bilinear",
    "apply_operator",
    "gauge_invariance_residual",
    "self_adjointness_residual",
    "energy_bracket",
]


@dataclass(frozen=True)
class StiffnessOperator:
    """Dense symmetric realization of the conductivity bilinear form."""

    grid: object
    s: float
    matrix: np.ndarray
    label: str = "kernel"
    symmetry_defect: float = field(init=False)

    def __post_init__(self):
        m = self.matrix
        defect = float(np.abs(m - m.T).max() / max(np.abs(m).max(), 1e-300))
        object.__setattr__(self, "symmetry_defect", defect)

    def bilinear(self, u, v):
        u = np.asarray(u, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        return float(u @ (self.matrix @ v))

    def energy(self, u):
        return self.bilinear(u, u)


def _pair_scalar_rows(zeta, A, rows):
    """g(i, j) = zeta^T A zeta for a block of row indices i."""
    Z = zeta.table[zeta.displacement_index(rows[:, None], np.arange(zeta.grid.n_nodes)[None, :])]
    if isinstance(A, PhiSequence):
        F = A.fields
        out = np.zeros(Z.shape[:2])
        for k in range(F.shape[0]):
            out += np.einsum("iab,jab,ija,ijb->ij", F[k, rows], F[k], Z, Z, optimize=True)
        return out
    vals = A.values if isinstance(A, AnisotropyKernel) else np.asarray(A, dtype=float)
    return np.einsum("ijab,ija,ijb->ij", vals[rows], Z, Z, optimize=True)


def assemble_bilinear(grid, A, s, threads=1, zeta=None, label=None):
    """Assemble the stiffness matrix of B(u, v) for a kernel or factorization.

    A may be an AnisotropyKernel, a raw (M, M, d, d) array, or a PhiSequence
    (contracted term by term without materializing the dense kernel).
    """
    if zeta is None:
        zeta = ZetaKernel(grid, s)
    M = grid.n_nodes
    g = np.empty((M, M))
    blocks = [np.arange(a, min(a + 256, M)) for a in range(0, M, 256)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rows, block in zip(blocks, pool.map(lambda r: _pair_scalar_rows(zeta, A, r), blocks)):
                g[rows] = block
    else:
        for rows in blocks:
            g[rows] = _pair_scalar_rows(zeta, A, rows)

    W = grid.node_weight**2 * g
    diag = W.sum(axis=1) + W.sum(axis=0)
    stiff = -W - W.T
    stiff[np.diag_indices_from(stiff)] += diag
    if label is None:
        label = A.name if hasattr(A, "name") else type(A).__name__
    return StiffnessOperator(grid=grid, s=float(s), matrix=stiff, label=label)


def _dense_values(A):
    if isinstance(A, PhiSequence):
        f = A.fields
        return np.einsum("kiab,kjab->ijab", f, f)
    return A.values if isinstance(A, AnisotropyKernel) else np.asarray(A, dtype=float)


def apply_operator(grid, A, s, u, zeta=None):
    """The conductivity operator: frac_divergence(A . frac_gradient(u)).

    The result is a dual-weighted nodal field; pairing it against v with the
    quadrature inner product reproduces the bilinear form exactly.
    """
    if zeta is None:
        zeta = ZetaKernel(grid, s)
    V = np.einsum("ijab,ijb->ija", _dense_values(A), frac_gradient(grid, zeta, u), optimize=True)
    return frac_divergence(grid, zeta, V)


def gauge_invariance_residual(grid, A, s, trials=20, rng=None, threads=1):
    """max over random (u, v) of |B_A(u,v) - B_{A_s}(u,v)| / scale.

    scale is the Cauchy-Schwarz magnitude sqrt(B_{A_s}(u,u) B_{A_s}(v,v)).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    zeta = ZetaKernel(grid, s)
    vals = _dense_values(A)
    parts = symmetrize(vals)
    full = assemble_bilinear(grid, vals, s, threads=threads, zeta=zeta)
    sym = assemble_bilinear(grid, parts["A_s"], s, threads=threads, zeta=zeta)
    worst = 0.0
    for _ in range(trials):
        u = rng.normal(size=grid.n_nodes)
        v = rng.normal(size=grid.n_nodes)
        scale = np.sqrt(abs(sym.energy(u)) * abs(sym.energy(v))) + 1e-300
        worst = max(worst, abs(full.bilinear(u, v) - sym.bilinear(u, v)) / scale)
    return worst


def self_adjointness_residual(grid, A, s, trials=20, rng=None):
    """max over random (u, v) of |<Cu, v> - <u, Cv>| / scale via the operator path."""
    if rng is None:
        rng = np.random.default_rng(0)
    zeta = ZetaKernel(grid, s)
    vals = _dense_values(A)
    worst = 0.0
    for _ in range(trials):
        u = rng.normal(size=grid.n_nodes)
        v = rng.normal(size=grid.n_nodes)
        Cu = apply_operator(grid, vals, s, u, zeta=zeta)
        Cv = apply_operator(grid, vals, s, v, zeta=zeta)
        a = grid.inner(Cu, v)
        b = grid.inner(u, Cv)
        worst = max(worst, abs(a - b) / (max(abs(a), abs(b)) + 1e-300))
    return worst


def energy_bracket(grid, A, s, u, nu, zeta=None):
    """Energy B(u,u) against its ellipticity bracket for an interior field.

    Returns dict with energy, lower = nu * |grad_s u|^2, upper = (operator
    norm bound of A) * |grad_s u|^2, and the bracket verdict.
    """
    if zeta is None:
        zeta = ZetaKernel(grid, s)
    vals = _dense_values(A)
    G = frac_gradient(grid, zeta, u)
    gnorm2 = pair_inner(grid, G, G)
    energy = assemble_bilinear(grid, vals, s, zeta=zeta).energy(u)
    d = vals.shape[-1]
    opnorm = float(np.abs(vals).max()) * d
    return {
        "energy": energy,
        "lower": nu * gnorm2,
        "upper": opnorm * gnorm2,
        "passed": bool(nu * gnorm2 - 1e-9 * abs(energy) <= energy <= opnorm * gnorm2 + 1e-9 * abs(energy)),
    }
