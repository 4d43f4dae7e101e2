"""Periodic box discretization with labeled interior/exterior regions.

The computational domain is the periodic box [-L, L)^dim sampled on a
uniform tensor grid with N nodes per axis (N a power of two, so spectral
transforms stay cheap and refinement doubles cleanly).  Three axis-aligned
open boxes are labeled on top of the node set:

* ``omega``    -- the interior region where sources and perturbations live,
* ``w1, w2``   -- two disjoint measurement windows inside the exterior.

Every node not in omega belongs to the exterior; window membership is a
sub-label of the exterior.  All fields are stored flat with shape (M, ...)
where M = N**dim, ordered like ``numpy.reshape`` of the (N,)*dim tensor.
"""

from dataclasses import dataclass, field
import numpy as np

__all__ = ["Grid", "build_grid", "assert_supported_in"]


def _as_point(value, dim, name):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape != (dim,):
        raise ValueError(f"{name} must have {dim} component(s), got shape {arr.shape}")
    return tuple(float(v) for v in arr)


def _boxes_overlap(lo_a, hi_a, lo_b, hi_b):
    """True when two closed axis-aligned boxes intersect."""
    return all(lo_a[d] <= hi_b[d] and lo_b[d] <= hi_a[d] for d in range(len(lo_a)))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid plus region labeling.

    Attributes
    ----------
    dim : spatial dimension (1 or 2)
    L : half-width of the periodic box [-L, L)^dim
    N : nodes per axis (power of two)
    h : grid spacing 2L/N
    coords : (M, dim) node coordinates
    weights : (M,) quadrature weights (uniform product rule, h**dim)
    omega_mask, exterior_mask, w1_mask, w2_mask : (M,) boolean labels
    """

    dim: int
    L: float
    N: int
    omega_lo: tuple
    omega_hi: tuple
    w1_lo: tuple
    w1_hi: tuple
    w2_lo: tuple
    w2_hi: tuple
    h: float = field(init=False, repr=False)
    coords: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    omega_mask: np.ndarray = field(init=False, repr=False)
    exterior_mask: np.ndarray = field(init=False, repr=False)
    w1_mask: np.ndarray = field(init=False, repr=False)
    w2_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"L must be positive and finite, got {self.L}")

        h = 2.0 * self.L / self.N
        axis = -self.L + h * np.arange(self.N)
        axes = (axis,) * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)

        self._check_boxes(h)

        omega = self._box_mask(coords, self.omega_lo, self.omega_hi)
        w1 = self._box_mask(coords, self.w1_lo, self.w1_hi)
        w2 = self._box_mask(coords, self.w2_lo, self.w2_hi)
        exterior = ~omega
        for name, mask in (("w1", w1), ("w2", w2)):
            if not mask.any():
                raise ValueError(f"window {name} contains no grid nodes")
            if (mask & omega).any():
                raise ValueError(f"window {name} intersects the interior region")
        if not omega.any():
            raise ValueError("interior region contains no grid nodes")

        weights = np.full(coords.shape[0], h**self.dim)
        for arr in (coords, weights, omega, exterior, w1, w2):
            arr.flags.writeable = False

        object.__setattr__(self, "h", h)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "omega_mask", omega)
        object.__setattr__(self, "exterior_mask", exterior)
        object.__setattr__(self, "w1_mask", w1)
        object.__setattr__(self, "w2_mask", w2)

    def _check_boxes(self, h):
        margin = 2.0 * h
        for d in range(self.dim):
            if not self.omega_lo[d] < self.omega_hi[d]:
                raise ValueError("interior box is empty")
            if self.omega_lo[d] < -self.L + margin or self.omega_hi[d] > self.L - margin:
                raise ValueError(
                    "interior box must keep a margin of at least 2h from the box boundary"
                )
            for name, lo, hi in (("w1", self.w1_lo, self.w1_hi), ("w2", self.w2_lo, self.w2_hi)):
                if not lo[d] < hi[d]:
                    raise ValueError(f"window {name} is empty")
                if lo[d] < -self.L or hi[d] > self.L:
                    raise ValueError(f"window {name} must lie inside the periodic box")
        if _boxes_overlap(self.w1_lo, self.w1_hi, self.w2_lo, self.w2_hi):
            raise ValueError("windows w1 and w2 must be disjoint")
        for name, lo, hi in (("w1", self.w1_lo, self.w1_hi), ("w2", self.w2_lo, self.w2_hi)):
            if _boxes_overlap(lo, hi, self.omega_lo, self.omega_hi):
                raise ValueError(f"window {name} must not intersect the interior box")

    @staticmethod
    def _box_mask(coords, lo, hi):
        mask = np.ones(coords.shape[0], dtype=bool)
        for d in range(coords.shape[1]):
            mask &= (coords[:, d] > lo[d]) & (coords[:, d] < hi[d])
        return mask

    # -- derived geometry -------------------------------------------------

    @property
    def n_nodes(self):
        return self.N**self.dim

    @property
    def shape(self):
        return (self.N,) * self.dim

    @property
    def node_weight(self):
        """Uniform quadrature weight h**dim of a single node."""
        return self.h**self.dim

    @property
    def omega_idx(self):
        return np.flatnonzero(self.omega_mask)

    @property
    def exterior_idx(self):
        return np.flatnonzero(self.exterior_mask)

    @property
    def w1_idx(self):
        return np.flatnonzero(self.w1_mask)

    @property
    def w2_idx(self):
        return np.flatnonzero(self.w2_mask)

    def frequencies(self):
        """Angular frequency axes; entries are integer multiples of pi/L."""
        xi = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)
        return (xi,) * self.dim

    def frequency_mesh(self):
        """Frequency components on the full (N,)*dim tensor grid."""
        return np.meshgrid(*self.frequencies(), indexing="ij")

    def reshape(self, u):
        return np.asarray(u).reshape(self.shape)

    def integrate(self, u):
        """Quadrature integral of a nodal field over the box."""
        return self.node_weight * float(np.sum(u))

    def inner(self, u, v):
        """Quadrature L2 inner product of nodal fields."""
        return self.node_weight * float(np.dot(np.ravel(u), np.ravel(v)))

    def norm(self, u):
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def key(self):
        """Hashable configuration tuple (used for caching in callers)."""
        return (
            self.dim,
            self.L,
            self.N,
            self.omega_lo,
            self.omega_hi,
            self.w1_lo,
            self.w1_hi,
            self.w2_lo,
            self.w2_hi,
        )

    def config_dict(self):
        def one_or_list(t):
            return t[0] if self.dim == 1 else list(t)

        return {
            "dim": self.dim,
            "L": self.L,
            "N": self.N,
            "omega_min": one_or_list(self.omega_lo),
            "omega_max": one_or_list(self.omega_hi),
            "w1_min": one_or_list(self.w1_lo),
            "w1_max": one_or_list(self.w1_hi),
            "w2_min": one_or_list(self.w2_lo),
            "w2_max": one_or_list(self.w2_hi),
        }

    def refined(self, factor=2):
        """Same geometry with N multiplied by `factor` (a power of two)."""
        return build_grid(
            dim=self.dim,
            L=self.L,
            N=self.N * factor,
            omega_min=self.omega_lo,
            omega_max=self.omega_hi,
            w1_min=self.w1_lo,
            w1_max=self.w1_hi,
            w2_min=self.w2_lo,
            w2_max=self.w2_hi,
        )


def build_grid(dim, L, N, omega_min, omega_max, w1_min, w1_max, w2_min, w2_max):
    """Validate a grid configuration and construct the Grid."""
    dim = int(dim)
    return Grid(
        dim=dim,
        L=float(L),
        N=int(N),
        omega_lo=_as_point(omega_min, dim, "omega_min"),
        omega_hi=_as_point(omega_max, dim, "omega_max"),
        w1_lo=_as_point(w1_min, dim, "w1_min"),
        w1_hi=_as_point(w1_max, dim, "w1_max"),
        w2_lo=_as_point(w2_min, dim, "w2_min"),
        w2_hi=_as_point(w2_max, dim, "w2_max"),
    )


def assert_supported_in(grid, u, mask, tol=0.0, name="field"):
    """Raise if the nodal field has entries off the masked node set."""
    u = np.asarray(u)
    off = np.abs(u[~mask])
    worst = float(off.max()) if off.size else 0.0
    if worst > tol:
        raise ValueError(f"{name} is not supported in the requested region (max off-support {worst:.3e})")
