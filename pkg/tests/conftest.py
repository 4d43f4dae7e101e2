import numpy as np
import pytest

from fraccond.grid import build_grid


def standard_grid_1d(N=64, L=1.0):
    return build_grid(
        dim=1, L=L, N=N,
        omega_min=-0.5 * L, omega_max=0.5 * L,
        w1_min=-0.95 * L, w1_max=-0.65 * L,
        w2_min=0.65 * L, w2_max=0.95 * L,
    )


def standard_grid_2d(N=16, L=1.0):
    return build_grid(
        dim=2, L=L, N=N,
        omega_min=[-0.5 * L, -0.5 * L], omega_max=[0.5 * L, 0.5 * L],
        w1_min=[-0.95 * L, -0.95 * L], w1_max=[-0.65 * L, -0.65 * L],
        w2_min=[0.65 * L, 0.65 * L], w2_max=[0.95 * L, 0.95 * L],
    )


@pytest.fixture
def grid1d():
    return standard_grid_1d()


@pytest.fixture
def grid2d():
    return standard_grid_2d()


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def smooth_field(grid, rng, kmax=4):
    """Random band-limited real field (smooth on the grid scale)."""
    u = np.zeros(grid.n_nodes)
    x = grid.coords
    base = np.pi / grid.L
    for _ in range(6):
        k = rng.integers(-kmax, kmax + 1, size=grid.dim)
        amp = rng.normal()
        phase = rng.uniform(0, 2 * np.pi)
        u += amp * np.cos(base * (x @ k) + phase)
    return u
