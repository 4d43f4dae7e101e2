"""Two-point fractional calculus on the periodic grid.

A pair field assigns a value to every ordered node pair (x_i, y_j); it is
stored dense with the x index first.  The central object is the kernel

    zeta(x, y) = sqrt(C(n,s)/2) * K(x-y)**(1/2) * e(x-y),

where e(z) is the unit vector of the nearest periodic image of z and
K(z) = sum_m |z + 2Lm|**(-(n+2s)) is the periodized Riesz kernel.  On the
displacement lattice the nearest image is computed in integer arithmetic,
and a component that lands exactly on the antipodal tie (|z_c| = L) is
zeroed before normalizing, so zeta(y, x) = -zeta(x, y) holds bitwise.

The periodized kernel makes the composition of the two-point gradient and
divergence consistent with the spectral fractional Laplacian of the box.
Construct the kernel with ``periodic=False`` to get the plain free-space
power law |z|**(-(n+2s)) at the nearest image instead (useful for checking
single entries against the closed formula by hand; the composition then
carries an O(1) periodization defect and is not used elsewhere).
"""

import numpy as np
from scipy.special import gamma, zeta as hurwitz_zeta

__all__ = [
    "cns_constant",
    "ZetaKernel",
    "frac_gradient",
    "frac_divergence",
    "pair_inner",
    "pair_norm",
    "composition_apply",
    "kernel_split_residual",
]


def cns_constant(n, s):
    """Normalizing constant 4**s * Gamma(n/2 + s) / (pi**(n/2) * |Gamma(-s)|)."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"order s must lie in (0, 1), got {s}")
    return float(4.0**s * gamma(0.5 * n + s) / (np.pi ** (0.5 * n) * abs(gamma(-s))))


def _lattice_components(grid):
    """Integer displacement lattice -> (magnitude components, signed components).

    magnitude components: |z_c| of the nearest image, in [0, L]
    signed components: z_c of the nearest image with antipodal ties zeroed
    """
    N, h = grid.N, grid.h
    idx = np.indices(grid.shape).reshape(grid.dim, -1)  # (dim, lat)
    mag = np.minimum(idx, N - idx) * h
    signed = np.where(idx > N // 2, idx - N, idx).astype(float) * h
    signed[idx == N // 2] = 0.0
    return mag, signed


def _periodized_kernel_1d(mag, L, s):
    """Exact image sum via Hurwitz zeta: K(z) = sum_m |z + 2Lm|**(-(1+2s))."""
    q = 1.0 + 2.0 * s
    tau = mag[0] / (2.0 * L)  # in [0, 1/2]
    K = np.zeros_like(tau)
    pos = tau > 0.0
    K[pos] = (2.0 * L) ** (-q) * (
        hurwitz_zeta(q, tau[pos]) + hurwitz_zeta(q, 1.0 - tau[pos])
    )
    return K


def _periodized_kernel_2d(mag, L, s, images):
    """Truncated image sum over [-images, images]^2 plus a radial tail."""
    q = 2.0 + 2.0 * s
    z1, z2 = mag
    shifts = np.arange(-images, images + 1) * (2.0 * L)
    K = np.zeros_like(z1)
    with np.errstate(divide="ignore"):
        for m1 in shifts:
            r2 = (z1 + m1) ** 2
            r2 = r2[:, None] + (z2[:, None] + shifts[None, :]) ** 2
            K += np.where(r2 > 0.0, r2, np.inf) ** (-0.5 * q) @ np.ones(shifts.size)
    # images beyond the window, integral approximation at density 1/(2L)^2
    R = 2.0 * L * (images + 0.5)
    K += 2.0 * np.pi * R ** (-2.0 * s) / (2.0 * s * (2.0 * L) ** 2)
    K[0] = 0.0  # diagonal is deleted
    return K


def _raw_kernel(mag, s):
    n = mag.shape[0]
    r2 = np.sum(mag * mag, axis=0)
    with np.errstate(divide="ignore"):
        K = np.where(r2 > 0.0, r2, np.inf) ** (-0.5 * (n + 2.0 * s))
    K[0] = 0.0
    return K


class ZetaKernel:
    """Tabulated two-point kernel on the displacement lattice.

    Parameters
    ----------
    grid : Grid
    s : fractional order in (0, 1)
    periodic : use the periodized Riesz kernel (default) or the raw
        free-space power law at the nearest image
    images : half-width of the 2d image window (ignored in 1d, where the
        image sum is evaluated exactly through Hurwitz zeta functions)
    """

    def __init__(self, grid, s, periodic=True, images=64):
        if not 0.0 < s < 1.0:
            raise ValueError(f"order s must lie in (0, 1), got {s}")
        self.grid = grid
        self.s = float(s)
        self.periodic = bool(periodic)
        self.constant = cns_constant(grid.dim, s)

        mag, signed = _lattice_components(grid)
        if not periodic:
            K = _raw_kernel(mag, self.s)
        elif grid.dim == 1:
            K = _periodized_kernel_1d(mag, grid.L, self.s)
        else:
            K = _periodized_kernel_2d(mag, grid.L, self.s, images)

        norms = np.sqrt(np.sum(signed * signed, axis=0))
        direction = np.zeros((K.size, grid.dim))
        nz = norms > 0.0
        direction[nz] = (signed[:, nz] / norms[nz]).T

        self.kernel_values = K  # periodized (or raw) K on the lattice
        self.magnitude = np.sqrt(0.5 * self.constant * K)
        self.direction = direction
        self.table = self.magnitude[:, None] * direction  # (lat, dim)
        self._dense = None
        self._dmap = None

    # -- pair lookups ------------------------------------------------------

    def displacement_index(self, i, j):
        """Flat lattice index of x_i - x_j for flat node indices i, j."""
        N = self.grid.N
        i = np.asarray(i)
        j = np.asarray(j)
        if self.grid.dim == 1:
            return (i - j) % N
        d1 = (i // N - j // N) % N
        d2 = (i % N - j % N) % N
        return d1 * N + d2

    def pair(self, i, j):
        """zeta(x_i, x_j); i, j flat node indices (broadcastable arrays)."""
        return self.table[self.displacement_index(i, j)]

    def displacement_map(self):
        """(M, M) lattice index of x_i - x_j for all ordered pairs."""
        if self._dmap is None:
            M = self.grid.n_nodes
            idx = np.arange(M)
            self._dmap = self.displacement_index(idx[:, None], idx[None, :])
        return self._dmap

    def dense(self):
        """Full (M, M, dim) table of zeta(x_i, x_j)."""
        if self._dense is None:
            self._dense = self.table[self.displacement_map()]
        return self._dense

    def squared_lattice(self):
        """|zeta|**2 on the displacement lattice.

        Equals C/2 * K except at displacements whose direction was zeroed by
        the antipodal tie rule, where zeta itself (hence the square) is zero.
        Summing with this table reproduces the dense pair operators exactly.
        """
        return np.sum(self.table * self.table, axis=1)


# -- operators --------------------------------------------------------------


def frac_gradient(grid, kern, u):
    """Two-point gradient (u(y) - u(x)) zeta(x, y), shape (M, M, dim)."""
    u = np.asarray(u, dtype=float).ravel()
    du = u[None, :] - u[:, None]
    return du[:, :, None] * kern.dense()


def frac_divergence(grid, kern, V):
    """Adjoint of the two-point gradient under product quadrature weights.

    Satisfies <V, frac_gradient(u)>_pair = <frac_divergence(V), u>_node for
    every nodal u, as an exact rearrangement of the same finite sum.
    """
    Z = kern.dense()
    fwd = np.einsum("ika,ika->k", V, Z)
    bwd = np.einsum("kia,kia->k", V, Z)
    return grid.node_weight * (fwd - bwd)


def pair_inner(grid, U, V):
    """Product-quadrature inner product of two pair fields."""
    return grid.node_weight**2 * float(np.dot(np.ravel(U), np.ravel(V)))


def pair_norm(grid, U):
    return float(np.sqrt(max(pair_inner(grid, U, U), 0.0)))


def composition_apply(grid, kern, u):
    """frac_divergence(frac_gradient(u)) via circular convolution.

    The composition collapses to 2 * sum_y w_y (u(x) - u(y)) |zeta(x,y)|**2,
    a convolution on the displacement lattice, so it is evaluated with FFTs
    in O(M log M) instead of forming the dense pair field.
    """
    u = np.asarray(u, dtype=float).ravel()
    k2 = kern.squared_lattice().reshape(grid.shape)
    U = np.fft.fftn(u.reshape(grid.shape))
    conv = np.fft.ifftn(np.fft.fftn(k2) * U).real.ravel()
    return 2.0 * grid.node_weight * (u * k2.sum() - conv)


# -- kernel splitting --------------------------------------------------------


def kernel_split_residual(x, y, s, eta=1e-4):
    """Residual of the rank-one kernel splitting at a single point pair.

    Checks z (x) z / |z|**(n+2s+2) against
        alpha * Id * |z|**(-(n+2s)) - beta * Hess_xy |x-y|**(-(n+2s-2))
    with alpha = 1/(n+2s), beta = 1/((n+2s)(n+2s-2)); the mixed Hessian is
    evaluated by central differences with step eta (error O(eta**2)).

    Returns a dict with keys 'applicable', 'residual', 'eta'.  The exponent
    n+2s-2 = 0 case (n=1, s=1/2) degenerates and is reported inapplicable.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be points of the same dimension")
    n = x.size
    z = x - y
    r = float(np.linalg.norm(z))
    if r == 0.0:
        raise ValueError("kernel splitting is undefined on the diagonal x = y")
    p = n + 2.0 * s - 2.0
    if abs(p) < 1e-12:
        return {"applicable": False, "residual": float("nan"), "eta": eta}

    def g(a, b):
        return float(np.linalg.norm(a - b) ** (-p))

    H = np.empty((n, n))
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = eta
        for b in range(n):
            eb = np.zeros(n)
            eb[b] = eta
            H[a, b] = (
                g(x + ea, y + eb) - g(x + ea, y - eb) - g(x - ea, y + eb) + g(x - ea, y - eb)
            ) / (4.0 * eta**2)

    alpha = 1.0 / (n + 2.0 * s)
    beta = alpha / p
    lhs = np.outer(z, z) * r ** (-(n + 2.0 * s + 2.0))
    rhs = alpha * np.eye(n) * r ** (-(n + 2.0 * s)) - beta * H
    return {"applicable": True, "residual": float(np.max(np.abs(lhs - rhs))), "eta": eta}
