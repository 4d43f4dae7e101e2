"""Anisotropy kernels, their symmetrization algebra, and factorizations.

A kernel assigns a dim x dim matrix A(x_i, y_j) to every ordered node pair
(diagonal included).  The operator only sees the doubly symmetric part A_s
(symmetric as a matrix and under swapping x and y), which for admissible
kernels factorizes through a finite sequence of matrix fields:

    A_s(x, y) = sum_k Phi_k(x) (.) Phi_k(y)       ((.) = entrywise product)

where even-position fields are exterior-type (constant on the exterior) and
odd-position fields are interior-type (supported in the interior region).
The interior part of the factorization is produced entry by entry with a
weighted eigendecomposition (Mercer construction).
"""

from dataclasses import dataclass, field

import numpy as np

from fraccond.grid import assert_supported_in

__all__ = [
    "AnisotropyKernel",
    "PhiSequence",
    "MercerError",
    "symmetrize",
    "check_positivity",
    "assemble_exterior",
    "mercer_decompose",
    "kernel_from_phi",
    "apply_gauge",
]


class MercerError(ValueError):
    """Kernel is not factorizable under the requested mode."""


@dataclass(frozen=True)
class AnisotropyKernel:
    """Dense two-point matrix coefficient with claimed coercivity metadata.

    values has shape (M, M, dim, dim); values[i, j] = A(x_i, y_j).
    """

    values: np.ndarray
    nu: float = None
    linf: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 4 or v.shape[0] != v.shape[1] or v.shape[2] != v.shape[3]:
            raise ValueError(f"kernel values must have shape (M, M, d, d), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel contains non-finite entries")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "linf", float(np.abs(v).max()))

    @property
    def dim(self):
        return self.values.shape[2]


def _kernel_values(A):
    return A.values if isinstance(A, AnisotropyKernel) else np.asarray(A, dtype=float)


def symmetrize(A):
    """Split a kernel into its doubly symmetric part and the remainder.

    Returns a dict with
      A_ms : matrix-wise symmetrization (A + A^T)/2 per pair
      A_vs : variable-wise symmetrization (A(x,y) + A(y,x))/2
      A_s  : matrix-wise symmetrization of A_vs (both symmetries)
      A_a  : A - A_s, the part invisible to the bilinear form
    """
    v = _kernel_values(A)
    ms = 0.5 * (v + np.swapaxes(v, 2, 3))
    vs = 0.5 * (v + np.swapaxes(v, 0, 1))
    s = 0.5 * (vs + np.swapaxes(vs, 2, 3))
    return {"A_ms": ms, "A_vs": vs, "A_s": s, "A_a": v - s}


def _min_eigenvalue_field(values):
    """Smallest eigenvalue of each (symmetric) matrix in a (..., d, d) array."""
    d = values.shape[-1]
    if d == 1:
        return values[..., 0, 0]
    if d == 2:
        a = values[..., 0, 0]
        b = 0.5 * (values[..., 0, 1] + values[..., 1, 0])
        c = values[..., 1, 1]
        half_gap = np.sqrt(0.25 * (a - c) ** 2 + b * b)
        return 0.5 * (a + c) - half_gap
    return np.linalg.eigvalsh(values)[..., 0]


def check_positivity(A_s, nu, rtol=1e-12):
    """Uniform ellipticity report for a doubly symmetric kernel.

    min_rayleigh is the smallest eigenvalue over all stored pairs; the check
    passes when it is at least the claimed nu, up to a roundoff allowance of
    rtol * max(1, |nu|) for the floating-point eigenvalue evaluation.
    """
    lam = _min_eigenvalue_field(_kernel_values(A_s))
    m = float(lam.min())
    slack = rtol * max(1.0, abs(nu))
    return {"min_rayleigh": m, "nu": float(nu), "passed": bool(m >= nu - slack)}


# -- sequences of matrix fields ----------------------------------------------


@dataclass(frozen=True)
class PhiSequence:
    """Finite factorization sequence: fields (K, M, dim, dim) plus kinds.

    kinds[k] is 'beta' (constant on the exterior) or 'phi' (zero on the
    exterior).  The squared pointwise norm sum_k Phi_k(x):Phi_k(x) must be
    strictly positive at every node, since the reduction divides by it.
    """

    grid: object
    fields: np.ndarray
    kinds: tuple

    def __post_init__(self):
        f = np.asarray(self.fields, dtype=float)
        d = self.grid.dim
        if f.ndim != 4 or f.shape[1] != self.grid.n_nodes or f.shape[2:] != (d, d):
            raise ValueError(f"fields must have shape (K, M, {d}, {d}), got {f.shape}")
        if len(self.kinds) != f.shape[0]:
            raise ValueError("one kind tag per field required")
        if any(k not in ("beta", "phi") for k in self.kinds):
            raise ValueError(f"unknown kind in {self.kinds}")
        asym = np.abs(f - np.swapaxes(f, 2, 3)).max() if f.size else 0.0
        if asym > 1e-12:
            raise ValueError(f"fields must be matrix-wise symmetric (deviation {asym:.2e})")
        ext = self.grid.exterior_idx
        for k, kind in enumerate(self.kinds):
            if kind == "beta":
                dev = np.abs(f[k, ext] - f[k, ext[0]]).max() if ext.size else 0.0
                if dev > 0.0:
                    raise ValueError(f"field {k} tagged 'beta' varies on the exterior ({dev:.2e})")
            else:
                assert_supported_in(self.grid, f[k], self.grid.omega_mask, name=f"field {k}")
        sq = np.einsum("kxab,kxab->x", f, f)
        if f.shape[0] == 0 or sq.min() <= 0.0:
            raise ValueError("sum_k |Phi_k(x)|^2 must be strictly positive at every node")
        object.__setattr__(self, "fields", f)
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @classmethod
    def from_parts(cls, grid, betas, phis):
        """Interleave exterior fields (even slots) and interior fields (odd)."""
        betas = [np.asarray(b, dtype=float) for b in betas]
        phis = [np.asarray(p, dtype=float) for p in phis]
        fields, kinds = [], []
        for i in range(max(len(betas), len(phis))):
            if i < len(betas):
                fields.append(betas[i])
                kinds.append("beta")
            if i < len(phis):
                fields.append(phis[i])
                kinds.append("phi")
        return cls(grid=grid, fields=np.stack(fields), kinds=tuple(kinds))

    @property
    def count(self):
        return self.fields.shape[0]

    def phi_sq(self):
        """|Phi|^2(x) = sum over fields and matrix entries of squares."""
        return np.einsum("kxab,kxab->x", self.fields, self.fields)

    def contract(self, w):
        """w (:) Phi: contract a (K, M, d, d) sequence field to a scalar field."""
        return np.einsum("kxab,kxab->x", np.asarray(w, dtype=float), self.fields)

    def times_scalar(self, u):
        """Phi u: scalar nodal field lifted to the sequence image (K, M, d, d)."""
        return self.fields * np.asarray(u, dtype=float).reshape(1, -1, 1, 1)


def assemble_exterior(grid, betas):
    """Separable exterior kernel sum_k beta_k(x) (.) beta_k(y)."""
    betas = np.asarray(betas, dtype=float)
    ext = grid.exterior_idx
    for k in range(betas.shape[0]):
        if np.abs(betas[k, ext] - betas[k, ext[0]]).max() > 0.0:
            raise ValueError(f"beta field {k} is not constant on the exterior")
    return AnisotropyKernel(np.einsum("kiab,kjab->ijab", betas, betas))


def kernel_from_phi(phi):
    """Kernel induced by a factorization: sum_k Phi_k(x) (.) Phi_k(y)."""
    f = phi.fields
    return AnisotropyKernel(np.einsum("kiab,kjab->ijab", f, f))


def apply_gauge(phi, rho):
    """Scale a factorization by (1 + rho) pointwise.

    rho must vanish on the exterior and satisfy 1 + rho > 0; the induced
    kernel picks up the factor (1 + rho(x))(1 + rho(y)).
    """
    rho = np.asarray(rho, dtype=float).ravel()
    assert_supported_in(phi.grid, rho, phi.grid.omega_mask, name="gauge function")
    if (1.0 + rho).min() <= 0.0:
        raise ValueError("gauge requires 1 + rho > 0 everywhere")
    scaled = phi.fields * (1.0 + rho).reshape(1, -1, 1, 1)
    return PhiSequence(grid=phi.grid, fields=scaled, kinds=phi.kinds)


# -- Mercer decomposition -----------------------------------------------------


def _canonical_sign(v):
    """Flip an eigenvector so its largest-magnitude entry is positive."""
    i = np.argmax(np.abs(v))
    return -v if v[i] < 0 else v


def mercer_decompose(grid, A_s, a_tilde, tol=1e-10, strict=True):
    """Factorize the interior kernel psi = A_s - a_tilde entry by entry.

    For each matrix entry (i, j), i <= j, the weighted kernel matrix on
    interior nodes is eigendecomposed; eigenpairs with |lambda| > tol * max
    are retained and emitted as nodal fields sqrt(lambda) * eigenvector
    (zero-extended), mirrored into entries (i, j) and (j, i).

    strict=True raises MercerError on a retained negative eigenvalue; with
    strict=False the signed pairs are kept in the report (diagnostics only)
    and excluded from the returned fields.

    Returns (fields, report): fields is a (K, M, dim, dim) array of
    interior-type matrix fields, report a dict with per-entry spectra,
    reconstruction residuals, and the trace identity check.
    """
    psi = _kernel_values(A_s) - _kernel_values(a_tilde)
    M, _, d, _ = psi.shape
    w = grid.node_weight
    idx = grid.omega_idx
    outside = ~(grid.omega_mask[:, None] & grid.omega_mask[None, :])
    off_support = float(np.abs(psi[outside]).max()) if outside.any() else 0.0
    if off_support > tol:
        raise MercerError(
            f"interior kernel does not vanish off the interior product region "
            f"(max {off_support:.3e} > tol {tol:.1e})"
        )

    fields = []
    entries = {}
    negatives = []
    interior = psi[np.ix_(idx, idx)]
    for i in range(d):
        for j in range(i, d):
            Kmat = interior[:, :, i, j]
            swap_dev = float(np.abs(Kmat - Kmat.T).max())
            if swap_dev > tol * max(1.0, float(np.abs(Kmat).max())):
                raise MercerError(f"entry ({i},{j}) kernel not swap-symmetric ({swap_dev:.3e})")
            C = w * 0.5 * (Kmat + Kmat.T)
            lam, vec = np.linalg.eigh(C)
            lam_max = float(np.abs(lam).max()) if lam.size else 0.0
            keep = np.abs(lam) > tol * lam_max if lam_max > 0 else np.zeros_like(lam, bool)
            kept_lam = lam[keep]
            kept_vec = vec[:, keep]

            neg = kept_lam < 0.0
            if neg.any():
                worst = float(kept_lam.min())
                negatives.append({"entry": (i, j), "lambda_min": worst})
                if strict:
                    raise MercerError(
                        f"entry ({i},{j}) has negative eigenvalue {worst:.3e}; "
                        "kernel is not positive semidefinite (strict mode)"
                    )

            # signed reconstruction on interior nodes
            phi_hat = kept_vec / np.sqrt(w)
            recon = (phi_hat * kept_lam) @ phi_hat.T
            denom = float(np.linalg.norm(Kmat))
            resid = float(np.linalg.norm(recon - Kmat)) / denom if denom > 0 else 0.0

            order = np.argsort(kept_lam)[::-1]
            entry_fields = []
            for m in order:
                if kept_lam[m] < 0.0:
                    continue  # permissive mode: excluded from fields
                nodal = np.zeros(M)
                nodal[idx] = np.sqrt(kept_lam[m]) * _canonical_sign(phi_hat[:, m])
                mat = np.zeros((M, d, d))
                mat[:, i, j] = nodal
                mat[:, j, i] = nodal
                entry_fields.append(mat)
            fields.extend(entry_fields)
            entries[(i, j)] = {
                "eigenvalues": [float(x) for x in np.sort(kept_lam)[::-1]],
                "retained": int(kept_lam.size),
                "emitted": len(entry_fields),
                "trace_sum": float(lam.sum()),
                "trace_quadrature": float(w * np.trace(Kmat)),
                "reconstruction_residual": resid,
            }

    report = {
        "entries": entries,
        "negatives": negatives,
        "psd": not negatives,
        "off_support_max": off_support,
        "tol": tol,
    }
    shape = (len(fields), M, d, d)
    out = np.stack(fields) if fields else np.zeros(shape)
    return out, report
