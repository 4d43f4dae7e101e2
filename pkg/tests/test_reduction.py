import numpy as np
import pytest

from fraccond import reduction as red
from fraccond.conductivity import apply_operator
from fraccond.pairs import ZetaKernel
from fraccond.presets import build_preset
from fraccond.spectral import apply_symbol, frac_laplacian
from conftest import smooth_field, standard_grid_1d, standard_grid_2d


def convergence_field(grid):
    """Fixed smooth periodic function, resolution independent."""
    x = grid.coords
    u = np.cos(np.pi * x[:, 0]) + 0.5 * np.sin(2 * np.pi * x[:, 0])
    if grid.dim == 2:
        u = u * (1.0 + 0.3 * np.cos(np.pi * x[:, 1]))
    return u


class TestMultiplier:
    def test_plane_wave_closed_form_1d(self, grid1d):
        x = grid1d.coords[:, 0]
        k = 3.0 * np.pi
        F = np.cos(k * x)[:, None, None] * np.ones((1, 1))
        s = 0.6
        out = red.apply_D(grid1d, F, s)
        want = (k**2 + 2 * s * k**2) / (1 + 2 * s) * np.cos(k * x)
        np.testing.assert_allclose(out[:, 0, 0], want, atol=1e-11 * k**2)

    def test_plane_wave_closed_form_2d(self, grid2d):
        x = grid2d.coords
        kvec = np.array([2.0 * np.pi, -np.pi])
        phase = np.cos(x @ kvec + 0.3)
        F = np.zeros((grid2d.n_nodes, 2, 2))
        F[:, 0, 1] = F[:, 1, 0] = phase
        F[:, 0, 0] = phase
        s = 0.5
        out = red.apply_D(grid2d, F, s)
        k2 = kvec @ kvec
        scale = 1e-11 * k2
        np.testing.assert_allclose(
            out[:, 0, 0], (k2 + 2 * s * kvec[0] ** 2) / (2 + 2 * s) * phase, atol=scale
        )
        np.testing.assert_allclose(
            out[:, 0, 1], (2 * s * kvec[0] * kvec[1]) / (2 + 2 * s) * phase, atol=scale
        )
        np.testing.assert_allclose(out[:, 0, 1], out[:, 1, 0], atol=1e-13 * k2)

    def test_annihilates_constants_and_is_mean_free(self, grid2d, rng):
        M = grid2d.n_nodes
        const = np.broadcast_to(np.eye(2) * 2.5, (M, 2, 2)).copy()
        np.testing.assert_allclose(red.apply_D(grid2d, const, 0.5), 0.0, atol=1e-13)
        F = rng.normal(size=(2, M, 2, 2))
        out = red.apply_D(grid2d, F, 0.5)
        for k in range(2):
            for a in range(2):
                for b in range(2):
                    assert abs(out[k, :, a, b].sum()) <= 1e-10 * np.abs(out).max()

    def test_trace_of_scalar_lift_is_laplacian(self, grid2d, rng):
        u = smooth_field(grid2d, rng)
        F = np.eye(2)[None, :, :] * u[:, None, None]
        out = red.apply_D(grid2d, F, 0.7)
        mesh = grid2d.frequency_mesh()
        xi2 = sum(m * m for m in mesh)
        want = apply_symbol(grid2d, u, xi2)
        np.testing.assert_allclose(out[:, 0, 0] + out[:, 1, 1], want, atol=1e-11 * np.abs(want).max())

    def test_commutes_with_fractional_laplacian(self, grid1d, rng):
        u = smooth_field(grid1d, rng)
        F = u[:, None, None] * np.ones((1, 1))
        a = red.riesz_entrywise(grid1d, red.apply_D(grid1d, F, 0.5), 0.5)
        b = red.apply_D(grid1d, red.riesz_entrywise(grid1d, F, 0.5), 0.5)
        np.testing.assert_allclose(a, b, atol=1e-12 * max(1.0, np.abs(a).max()))

    def test_rejects_bad_shapes(self, grid1d):
        with pytest.raises(ValueError):
            red.apply_D(grid1d, np.zeros((grid1d.n_nodes, 2, 2)), 0.5)


class TestPotential:
    def test_identity_preset_has_zero_potential(self, grid1d):
        pre = build_preset(grid1d, "identity")
        pot = red.build_potential(grid1d, pre.phi, 0.5)
        assert np.abs(pot.R).max() == 0.0
        assert np.abs(pot.contracted).max() == 0.0
        u = convergence_field(grid1d)
        out = red.operator_via_reduction(grid1d, pre.phi, 0.5, u)
        want = frac_laplacian(grid1d, u, 0.5)
        np.testing.assert_allclose(out, want, atol=1e-12 * np.abs(want).max())

    def test_potential_collapses_to_multiplication_on_image(self, grid1d, rng):
        pre = build_preset(grid1d, "diagonal-crystal")
        pot = red.build_potential(grid1d, pre.phi, 0.5)
        u = smooth_field(grid1d, rng)
        w = red.reduce_field(pre.phi, u)
        lhs = pre.phi.contract(pot.q_apply(w))
        rhs = -u * pot.contracted
        np.testing.assert_allclose(lhs, rhs, atol=1e-13 * max(1.0, np.abs(rhs).max()))

    def test_roundtrip_through_the_image(self, rng):
        for grid in (standard_grid_1d(N=64), standard_grid_2d(N=16)):
            for name in ("diagonal-crystal", "rank-R-random"):
                pre = build_preset(grid, name, rng)
                u = smooth_field(grid, rng)
                back = red.unreduce_field(pre.phi, red.reduce_field(pre.phi, u))
                np.testing.assert_allclose(back, u, atol=1e-13 * np.abs(u).max())


class TestScalarRoute:
    def test_discrete_identity_is_exact(self, grid1d):
        pre = build_preset(grid1d, {"type": "isotropic-separable", "amplitude": 0.7})
        root = pre.phi.fields[0, :, 0, 0]
        u = convergence_field(grid1d)
        zeta = ZetaKernel(grid1d, 0.5)
        lhs = red.scalar_reduced_apply(grid1d, root, 0.5, u, discrete=True, zeta=zeta)
        rhs = apply_operator(grid1d, pre.kernel, 0.5, u, zeta=zeta)
        np.testing.assert_allclose(lhs, rhs, atol=1e-13 * np.abs(rhs).max())

    def test_spectral_scalar_route_matches_sequence_route(self, grid1d):
        pre = build_preset(grid1d, {"type": "isotropic-separable", "amplitude": 0.7})
        root = pre.phi.fields[0, :, 0, 0]
        u = convergence_field(grid1d)
        seq = red.operator_via_reduction(grid1d, pre.phi, 0.5, u)
        sca = red.scalar_reduced_apply(grid1d, root, 0.5, u, discrete=False)
        np.testing.assert_allclose(seq, sca, atol=1e-13 * np.abs(sca).max())


class TestOperatorIdentity:
    @pytest.mark.parametrize("name", ["identity", "isotropic-separable", "diagonal-crystal"])
    @pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
    def test_residual_decreases_under_refinement_1d(self, name, s):
        vals = []
        for N in (64, 128, 256):
            grid = standard_grid_1d(N=N)
            pre = build_preset(grid, name)
            vals.append(
                red.reduction_identity_residual(grid, pre.phi, pre.kernel, s, convergence_field(grid))
            )
        assert vals[0] < 0.5
        assert vals[2] < vals[1] < vals[0]
        assert vals[2] < 0.25

    def test_residual_decreases_under_refinement_2d(self):
        vals = []
        for N in (16, 32):
            grid = standard_grid_2d(N=N)
            pre = build_preset(grid, "diagonal-crystal")
            vals.append(
                red.reduction_identity_residual(grid, pre.phi, pre.kernel, 0.5, convergence_field(grid))
            )
        assert vals[1] < vals[0] < 0.2


class TestTransformedForm:
    def test_symmetric_on_the_image(self, rng):
        for grid in (standard_grid_1d(N=64), standard_grid_2d(N=16)):
            pre = build_preset(grid, "diagonal-crystal")
            pot = red.build_potential(grid, pre.phi, 0.5)
            worst = 0.0
            for _ in range(10):
                w = red.reduce_field(pre.phi, rng.normal(size=grid.n_nodes))
                v = red.reduce_field(pre.phi, rng.normal(size=grid.n_nodes))
                f1 = red.b_q_form(grid, pre.phi, 0.5, w, v, pot=pot)
                f2 = red.b_q_form(grid, pre.phi, 0.5, v, w, pot=pot)
                worst = max(worst, abs(f1 - f2) / max(abs(f1), abs(f2)))
            assert worst <= 1e-10

    def test_form_matches_operator_pairing(self, grid1d, rng):
        pre = build_preset(grid1d, "diagonal-crystal")
        pot = red.build_potential(grid1d, pre.phi, 0.5)
        u = smooth_field(grid1d, rng)
        v = smooth_field(grid1d, rng)
        w = red.reduce_field(pre.phi, u)
        vv = red.reduce_field(pre.phi, v)
        lhs = red.b_q_form(grid1d, pre.phi, 0.5, w, vv, pot=pot)
        rhs = grid1d.inner(red.operator_via_reduction(grid1d, pre.phi, 0.5, u, pot=pot), v)
        assert lhs == pytest.approx(rhs, rel=1e-12)
