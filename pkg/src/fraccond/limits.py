"""Local limit of the conductivity calculus.

As the order tends to 1 the two-point operator collapses onto a classical
divergence-form operator whose matrix coefficient is read off the kernel
diagonal:

    A'(x) = [Id tr A(x, x) + 2 A(x, x)] / (dim + 2).

This module builds A', applies -div(A' grad u) spectrally, and runs the
order sweep comparing the two operators in weak pairings against a fixed
trigonometric test basis.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from fraccond.anisotropy import kernel_from_phi
from fraccond.reduction import operator_via_reduction
from fraccond.spectral import derivative

__all__ = [
    "LimitMatrix",
    "limit_matrix",
    "classical_operator",
    "test_basis",
    "s_sweep",
]


@dataclass(frozen=True)
class LimitMatrix:
    """Matrix coefficient induced on the kernel diagonal.

    values[i] is the dim x dim matrix at node i; it inherits symmetry and
    the ellipticity constant of the kernel (xi' A' xi >= nu |xi|^2 whenever
    the diagonal satisfies the same bound), which is re-checked here.
    """

    grid: object
    values: np.ndarray
    nu: float = None
    min_eig: float = field(init=False)
    nu_ok: bool = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        d = self.grid.dim
        if v.shape != (self.grid.n_nodes, d, d):
            raise ValueError(
                f"limit matrix must have shape (M, {d}, {d}), got {v.shape}"
            )
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "min_eig", float(np.linalg.eigvalsh(v).min()))
        if self.nu is None:
            ok = self.min_eig > 0
        else:
            ok = self.min_eig >= self.nu - 1e-12 * max(1.0, abs(self.nu))
        object.__setattr__(self, "nu_ok", bool(ok))


def limit_matrix(grid, A, nu=None):
    """[Id tr A(x,x) + 2 A(x,x)] / (dim + 2) over the grid nodes.

    Isotropic kernels sigma(x,y) Id come back unchanged on the diagonal,
    A' = sigma(x,x) Id; a claimed ellipticity constant (nu argument, or the
    kernel's own) is carried over and re-verified on the eigenvalues.
    """
    diag = np.asarray(A.values, dtype=float)[
        np.arange(grid.n_nodes), np.arange(grid.n_nodes)
    ]
    tr = np.trace(diag, axis1=-2, axis2=-1)
    vals = (np.eye(grid.dim) * tr[:, None, None] + 2.0 * diag) / (grid.dim + 2.0)
    if nu is None and getattr(A, "nu", None) is not None:
        nu = float(A.nu)
    return LimitMatrix(grid, vals, nu)


def classical_operator(grid, Ap, u, expanded=False):
    """-div(A' grad u) with spectral derivatives.

    With ``expanded`` the product rule is carried out first,
    -sum_ab [(d_a A'_ab)(d_b u) + A'_ab d_a d_b u]; the two evaluations
    agree in the continuum and differ discretely by pure quadrature
    (aliasing of the nodal products), which is what the sweep floor
    measures.
    """
    u = np.asarray(u, dtype=float).ravel()
    vals = Ap.values
    grads = np.stack([derivative(grid, u, a) for a in range(grid.dim)], axis=1)
    out = np.zeros(grid.n_nodes)
    if expanded:
        for a in range(grid.dim):
            for b in range(grid.dim):
                out -= derivative(grid, vals[:, a, b], a) * grads[:, b]
                out -= vals[:, a, b] * derivative(grid, grads[:, b], a)
        return out
    for a in range(grid.dim):
        flux = np.einsum("ib,ib->i", vals[:, a, :], grads)
        out -= derivative(grid, flux, a)
    return out


def test_basis(grid, max_wave=None):
    """Unit-norm low-frequency trigonometric test fields (constant excluded).

    Per axis the family is {1, cos(pi k x / L), sin(pi k x / L)} for
    k = 1..max_wave; the basis is every product of one member per axis
    except the all-ones product, in a fixed deterministic order.
    """
    if max_wave is None:
        max_wave = 4 if grid.dim == 1 else 2
    base = np.pi / grid.L
    families = []
    for a in range(grid.dim):
        x = grid.coords[:, a]
        fam = [np.ones(grid.n_nodes)]
        for k in range(1, max_wave + 1):
            fam.append(np.cos(base * k * x))
            fam.append(np.sin(base * k * x))
        families.append(fam)
    out = []
    for idx in product(*(range(len(f)) for f in families)):
        if all(i == 0 for i in idx):
            continue
        t = np.ones(grid.n_nodes)
        for a, i in enumerate(idx):
            t = t * families[a][i]
        out.append(t / grid.norm(t))
    return np.stack(out, axis=0)


def s_sweep(grid, phi, u, s_list, threads=1):
    """Weak-pairing error table of the two-point operator against its limit.

    For each order s the operator applied through the reduction is paired
    with the fixed test basis; e(s) is the l2 distance of that pairing
    vector from the pairings of -div(A' grad u), normalized by the latter.
    The floor re-pairs the local operator against its own product-rule
    expansion (a pure quadrature perturbation), and the table is judged by
    strict decrease of e(s) until within twice the floor.
    """
    u = np.asarray(u, dtype=float).ravel()
    s_list = [float(s) for s in s_list]
    Ap = limit_matrix(grid, kernel_from_phi(phi))
    basis = test_basis(grid)

    def pair_with_basis(g):
        return np.array([grid.inner(g, t) for t in basis])

    ref = pair_with_basis(classical_operator(grid, Ap, u))
    ref_norm = float(np.linalg.norm(ref)) or 1.0
    perturbed = pair_with_basis(classical_operator(grid, Ap, u, expanded=True))
    floor = float(np.linalg.norm(ref - perturbed)) / ref_norm

    def entry(s):
        vals = pair_with_basis(operator_via_reduction(grid, phi, s, u))
        return float(np.linalg.norm(vals - ref)) / ref_norm

    if threads <= 1:
        errors = [entry(s) for s in s_list]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(entry, s_list))

    monotone = True
    for prev, cur in zip(errors, errors[1:]):
        if prev <= 2.0 * floor:
            break
        if not cur < prev:
            monotone = False
    return {
        "s_list": s_list,
        "errors": errors,
        "floor": floor,
        "monotone_above_floor": bool(monotone),
        "converged": bool(errors and errors[-1] <= 2.0 * floor),
        "reference_norm": ref_norm,
        "n_tests": int(len(basis)),
        "min_eig": Ap.min_eig,
        "nu_ok": Ap.nu_ok,
    }
