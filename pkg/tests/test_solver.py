import numpy as np
import pytest

from fraccond import solver as sol
from fraccond.conductivity import assemble_bilinear
from fraccond.pairs import ZetaKernel
from fraccond.presets import build_preset, bump_field
from fraccond.reduction import operator_via_reduction
from conftest import standard_grid_1d, standard_grid_2d


def jump_datum(grid):
    """Smooth exterior datum taking different profiles on the two windows."""
    x = grid.coords[:, 0]
    return np.where(x < 0, np.cos(np.pi * x) ** 2, 0.5 * np.sin(np.pi * x) ** 2)


class TestDirect:
    def test_zero_data_gives_zero(self, grid1d, rng):
        pre = build_preset(grid1d, "diagonal-crystal")
        res = sol.solve_direct(grid1d, pre.kernel, 0.5, np.zeros(grid1d.n_nodes))
        assert np.abs(res.u).max() <= 1e-12
        assert res.residual <= 1e-12

    def test_matches_handwritten_assembly_and_solve(self):
        # fully independent route: double loop over pairs, no shared assembly code
        grid = standard_grid_1d(N=32)
        zeta = ZetaKernel(grid, 0.5)
        M = grid.n_nodes
        W = np.zeros((M, M))
        for i in range(M):
            for j in range(M):
                z = zeta.pair(i, j)
                W[i, j] = grid.node_weight**2 * float(z @ z)
        naive = np.zeros((M, M))
        for i in range(M):
            for j in range(M):
                naive[i, i] += W[i, j] + W[j, i]
                naive[i, j] -= W[i, j] + W[j, i]
        pre = build_preset(grid, "identity")
        mine = assemble_bilinear(grid, pre.kernel, 0.5, zeta=zeta).matrix
        np.testing.assert_allclose(mine, naive, atol=1e-13 * np.abs(naive).max())

        f = jump_datum(grid)
        I, E = grid.omega_idx, grid.exterior_idx
        want = np.array(f)
        want[I] = np.linalg.solve(naive[np.ix_(I, I)], -naive[np.ix_(I, E)] @ f[E])
        res = sol.solve_direct(grid, pre.kernel, 0.5, f, zeta=zeta)
        np.testing.assert_allclose(res.u, want, atol=1e-12 * np.abs(want).max())
        assert res.residual <= 1e-10

    def test_exterior_values_are_pinned(self, grid1d):
        pre = build_preset(grid1d, "isotropic-separable")
        f = jump_datum(grid1d)
        res = sol.solve_direct(grid1d, pre.kernel, 0.5, f)
        E = grid1d.exterior_idx
        np.testing.assert_array_equal(res.u[E], f[E])

    def test_superposition(self, grid1d, rng):
        pre = build_preset(grid1d, "diagonal-crystal")
        stiff = assemble_bilinear(grid1d, pre.kernel, 0.5)
        f1 = jump_datum(grid1d)
        f2 = bump_field(grid1d, center=np.array([0.8]), radius=0.1)
        src = np.zeros(grid1d.n_nodes)
        src[grid1d.omega_idx] = 1.0
        r1 = sol.solve_direct(grid1d, pre.kernel, 0.5, f1, source=src, stiffness=stiff)
        r2 = sol.solve_direct(grid1d, pre.kernel, 0.5, f2, stiffness=stiff)
        r12 = sol.solve_direct(grid1d, pre.kernel, 0.5, f1 + f2, source=src, stiffness=stiff)
        np.testing.assert_allclose(r12.u, r1.u + r2.u, atol=1e-12 * np.abs(r12.u).max())

    def test_interior_source_enters_weak_form(self, grid1d):
        pre = build_preset(grid1d, "identity")
        stiff = assemble_bilinear(grid1d, pre.kernel, 0.5)
        src = bump_field(grid1d, amplitude=2.0)
        res = sol.solve_direct(grid1d, pre.kernel, 0.5, np.zeros(grid1d.n_nodes), source=src, stiffness=stiff)
        I = grid1d.omega_idx
        want = grid1d.node_weight * src[I]
        np.testing.assert_allclose(stiff.matrix[I] @ res.u, want, atol=1e-12 * np.abs(want).max())


class TestTransformed:
    def test_matrix_matches_operator(self, grid1d, grid2d, rng):
        for grid in (grid1d, grid2d):
            pre = build_preset(grid, "diagonal-crystal")
            T = sol.reduced_operator_matrix(grid, pre.phi, 0.5)
            np.testing.assert_allclose(T, T.T, atol=1e-14 * np.abs(T).max())
            u = rng.normal(size=grid.n_nodes)
            want = grid.node_weight * operator_via_reduction(grid, pre.phi, 0.5, u)
            np.testing.assert_allclose(T @ u, want, atol=1e-12 * np.abs(want).max())

    def test_annihilates_constants(self, grid1d):
        pre = build_preset(grid1d, "isotropic-separable")
        T = sol.reduced_operator_matrix(grid1d, pre.phi, 0.5)
        scale = np.abs(T).max()
        assert np.abs(T @ np.ones(grid1d.n_nodes)).max() <= 1e-12 * scale

    def test_weak_residual_small(self, grid1d):
        pre = build_preset(grid1d, "diagonal-crystal")
        res = sol.solve_transformed(grid1d, pre.phi, 0.5, jump_datum(grid1d))
        assert res.residual <= 1e-10
        assert res.route == "transformed"

    def test_two_path_difference_decreases(self):
        for name in ("identity", "isotropic-separable", "diagonal-crystal"):
            vals = []
            for N in (64, 128, 256):
                grid = standard_grid_1d(N=N)
                pre = build_preset(grid, name)
                f = jump_datum(grid)
                direct = sol.solve_direct(grid, pre.kernel, 0.5, f)
                trans = sol.solve_transformed(grid, pre.phi, 0.5, f)
                I = grid.omega_idx
                vals.append(np.linalg.norm((direct.u - trans.u)[I]) / np.linalg.norm(direct.u[I]))
            assert vals[2] < vals[1] < vals[0], (name, vals)
            assert vals[0] < 0.05

    def test_datum_projection_roundtrip_and_rejection(self, grid1d, rng):
        pre = build_preset(grid1d, "diagonal-crystal")
        a = rng.normal(size=grid1d.n_nodes)
        G = pre.phi.times_scalar(a)
        np.testing.assert_allclose(sol.project_datum(pre.phi, G), a, atol=1e-12 * np.abs(a).max())
        with pytest.raises(ValueError):
            sol.project_datum(pre.phi, G + 0.05 * rng.normal(size=G.shape))


class TestWellposedness:
    def test_standard_presets_are_positive_definite(self, grid1d, rng):
        for name in ("identity", "isotropic-separable", "diagonal-crystal", "rank-R-random"):
            pre = build_preset(grid1d, name, rng)
            rep = sol.wellposedness_report(grid1d, pre.kernel, 0.5)
            assert rep["positive_definite"], (name, rep)
            assert rep["lambda_min"] > 0.05
            assert np.isfinite(rep["condition"])

    def test_indefinite_preset_is_flagged(self, grid1d):
        pre = build_preset(grid1d, "indefinite")
        rep = sol.wellposedness_report(grid1d, pre.kernel, 0.5)
        assert not rep["positive_definite"]
        assert rep["lambda_min"] < 0
        assert rep["condition"] == float("inf")

    def test_identity_shift_raises_smallest_eigenvalue(self, grid1d):
        pre = build_preset(grid1d, "diagonal-crystal")
        id_kernel = build_preset(grid1d, "identity").kernel
        mins = []
        for c in (0.0, 0.5, 1.0):
            shifted = pre.kernel.values + c * id_kernel.values
            rep = sol.wellposedness_report(grid1d, shifted, 0.5)
            mins.append(rep["lambda_min"])
        assert mins[0] < mins[1] < mins[2]

    def test_transformed_interior_block_positive(self, grid1d):
        for name in ("identity", "diagonal-crystal"):
            pre = build_preset(grid1d, name)
            T = sol.reduced_operator_matrix(grid1d, pre.phi, 0.5)
            I = grid1d.omega_idx
            lam = np.linalg.eigvalsh(T[np.ix_(I, I)])
            assert lam[0] > 0

    def test_2d_solve_roundtrip(self, grid2d):
        pre = build_preset(grid2d, "diagonal-crystal")
        x = grid2d.coords
        f = np.cos(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
        direct = sol.solve_direct(grid2d, pre.kernel, 0.5, f)
        trans = sol.solve_transformed(grid2d, pre.phi, 0.5, f)
        assert direct.residual <= 1e-10
        assert trans.residual <= 1e-10
        I = grid2d.omega_idx
        rel = np.linalg.norm((direct.u - trans.u)[I]) / np.linalg.norm(direct.u[I])
        assert rel < 0.25  # coarse grid; agreement is qualitative here
