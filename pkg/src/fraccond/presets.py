"""Closed-form kernel presets and smooth bump fields.

Every preset returns a PresetBundle: the factorization (when one exists),
the claimed ellipticity constant, and whether the exterior part is isotropic
(scalar multiples of the identity), which the Runge diagnostic requires.
The 'indefinite' preset deliberately violates ellipticity and therefore
carries a kernel but no factorization.
"""

from dataclasses import dataclass

import numpy as np

from fraccond.anisotropy import AnisotropyKernel, PhiSequence, kernel_from_phi

__all__ = [
    "bump_profile",
    "bump_field",
    "gaussian_field",
    "gauge_bump",
    "PresetBundle",
    "build_preset",
    "PRESET_NAMES",
]


def bump_profile(t):
    """Standard smooth bump exp(1 - 1/(1 - t^2)) for |t| < 1, else 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
    return out


def bump_field(grid, center=None, radius=None, amplitude=1.0):
    """Nodal tensor-product bump supported strictly inside the given box.

    Defaults to a bump centered in the interior region spanning 90% of its
    half-width, so the support stays inside Omega with node-free margins.
    """
    lo = np.asarray(grid.omega_lo)
    hi = np.asarray(grid.omega_hi)
    if center is None:
        center = 0.5 * (lo + hi)
    if radius is None:
        radius = 0.45 * (hi - lo)
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (grid.dim,))
    out = np.full(grid.n_nodes, amplitude)
    for c in range(grid.dim):
        out = out * bump_profile((grid.coords[:, c] - center[c]) / radius[c])
    return out


def gaussian_field(grid, center=None, decay_radius=None, amplitude=1.0):
    """Tensor-product Gaussian decayed below 1e-12 at the given radius.

    Realizes compact support as 'decayed below 1e-12 at the region edge':
    sigma is chosen so exp(-(r/sigma)^2) = 1e-12 at r = decay_radius, and
    the remaining tail beyond that radius is truncated to exactly zero.
    Defaults to the interior region (decayed at its boundary).
    """
    lo = np.asarray(grid.omega_lo)
    hi = np.asarray(grid.omega_hi)
    if center is None:
        center = 0.5 * (lo + hi)
    if decay_radius is None:
        decay_radius = 0.5 * (hi - lo)
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    decay_radius = np.broadcast_to(np.asarray(decay_radius, dtype=float), (grid.dim,))
    sigma = decay_radius / np.sqrt(np.log(1e12))
    out = np.full(grid.n_nodes, float(amplitude))
    for c in range(grid.dim):
        r = np.abs(grid.coords[:, c] - center[c])
        out = out * np.exp(-((r / sigma[c]) ** 2))
        out[r >= decay_radius[c]] = 0.0
    return out


def gauge_bump(grid, amplitude):
    """Gauge function amplitude * (interior bump); zero on the exterior."""
    return bump_field(grid, amplitude=amplitude)


@dataclass(frozen=True)
class PresetBundle:
    name: str
    phi: PhiSequence
    kernel: AnisotropyKernel
    nu: float
    exterior_isotropic: bool

    @property
    def has_factorization(self):
        return self.phi is not None


def _identity_field(grid):
    f = np.zeros((grid.n_nodes, grid.dim, grid.dim))
    for c in range(grid.dim):
        f[:, c, c] = 1.0
    return f


def _diag_field(grid, scalar, axis):
    f = np.zeros((grid.n_nodes, grid.dim, grid.dim))
    f[:, axis, axis] = scalar
    return f


def preset_identity(grid, params, rng):
    phi = PhiSequence.from_parts(grid, [_identity_field(grid)], [])
    return PresetBundle("identity", phi, kernel_from_phi(phi), 1.0, True)


def preset_isotropic_separable(grid, params, rng):
    """gamma(x)^(1/2) Id with gamma = 1 + amp * bump: the scalar conductivity.

    The 'profile' parameter selects the carrier: the compactly supported
    polynomial-free bump (default) or the decayed Gaussian.
    """
    amp = float(params.get("amplitude", 0.8))
    if amp <= -1.0:
        raise ValueError("isotropic-separable needs amplitude > -1 to keep gamma > 0")
    profile = params.get("profile", "bump")
    if profile == "bump":
        carrier = bump_field(grid)
    elif profile == "gaussian":
        carrier = gaussian_field(grid)
    else:
        raise ValueError(f"unknown profile {profile!r}; choose 'bump' or 'gaussian'")
    gamma = 1.0 + amp * carrier
    root = np.sqrt(gamma)
    beta = _identity_field(grid) * root[:, None, None]
    phi = PhiSequence.from_parts(grid, [beta], [])
    return PresetBundle("isotropic-separable", phi, kernel_from_phi(phi), float(gamma.min()), True)


def preset_diagonal_crystal(grid, params, rng):
    """Identity exterior plus fixed-axis diagonal interior bumps.

    The principal directions are position-independent (the coordinate axes);
    each axis carries its own interior conductivity bump, giving a genuinely
    anisotropic kernel in 2d and a non-separable scalar kernel in 1d.
    """
    amp = float(params.get("amplitude", 0.7))
    lo = np.asarray(grid.omega_lo)
    hi = np.asarray(grid.omega_hi)
    width = hi - lo
    phis = []
    for axis in range(grid.dim):
        off = (0.15 * width if axis == 0 else -0.15 * width)
        b = bump_field(grid, center=0.5 * (lo + hi) + off, radius=0.3 * width)
        phis.append(_diag_field(grid, np.sqrt(amp * (axis + 1)) * b, axis))
    if grid.dim == 1:
        # second bump keeps the 1d interior kernel non-separable (rank 2)
        b2 = bump_field(grid, center=0.5 * (lo + hi) - 0.2 * width, radius=0.25 * width)
        phis.append(_diag_field(grid, np.sqrt(0.5 * amp) * b2, 0))
    phi = PhiSequence.from_parts(grid, [_identity_field(grid)], phis)
    return PresetBundle("diagonal-crystal", phi, kernel_from_phi(phi), 1.0, True)


def preset_rank_r_random(grid, params, rng):
    """Shifted random rank-R interior kernel, positive semidefinite entrywise.

    Each interior term is g_k(x) * v_k v_k^T with a random interior bump g_k
    and a random positive direction v_k, so every matrix entry of the
    interior kernel is a nonnegative separable sum (a valid Mercer kernel).
    """
    R = int(params.get("rank", 4))
    shift = float(params.get("shift", 1.0))
    if R < 1 or shift <= 0:
        raise ValueError("rank-R-random needs rank >= 1 and shift > 0")
    lo = np.asarray(grid.omega_lo)
    hi = np.asarray(grid.omega_hi)
    width = hi - lo
    phis = []
    for _ in range(R):
        center = lo + width * rng.uniform(0.3, 0.7, size=grid.dim)
        radius = width * rng.uniform(0.15, 0.3, size=grid.dim)
        g = bump_field(grid, center=center, radius=radius, amplitude=rng.uniform(0.4, 1.0))
        v = rng.uniform(0.3, 1.0, size=grid.dim)
        phis.append(np.sqrt(g)[:, None, None] * np.outer(v, v)[None, :, :])
    beta = _identity_field(grid) * np.sqrt(shift)
    phi = PhiSequence.from_parts(grid, [beta], phis)
    return PresetBundle("rank-R-random", phi, kernel_from_phi(phi), shift, True)


def preset_indefinite(grid, params, rng):
    """Id * (1 - amp * g(x) g(y)): loses ellipticity once amp g^2 > 1.

    Carries no factorization; used to exercise the failure paths of the
    positivity checks and the solver.
    """
    amp = float(params.get("amplitude", 3.0))
    g = bump_field(grid)
    sep = 1.0 - amp * np.outer(g, g)
    eye = np.eye(grid.dim)
    values = sep[:, :, None, None] * eye[None, None, :, :]
    return PresetBundle("indefinite", None, AnisotropyKernel(values), float(sep.min()), True)


_BUILDERS = {
    "identity": preset_identity,
    "isotropic-separable": preset_isotropic_separable,
    "diagonal-crystal": preset_diagonal_crystal,
    "rank-R-random": preset_rank_r_random,
    "indefinite": preset_indefinite,
}

PRESET_NAMES = tuple(_BUILDERS)


def build_preset(grid, spec, rng=None):
    """Construct a preset from a config block {'type': name, ...params}."""
    if isinstance(spec, str):
        spec = {"type": spec}
    spec = dict(spec)
    name = spec.pop("type", None)
    if name not in _BUILDERS:
        raise ValueError(f"unknown kernel preset {name!r}; choose from {sorted(_BUILDERS)}")
    if rng is None:
        rng = np.random.default_rng(0)
    return _BUILDERS[name](grid, spec, rng)
