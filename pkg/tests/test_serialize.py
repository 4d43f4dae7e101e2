"""Roundtrip and format tests for the on-disk representations."""

import json

import numpy as np
import numpy.testing as npt
import pytest

from fraccond import serialize as ser
from fraccond.grid import build_grid
from fraccond.pairs import ZetaKernel, frac_gradient
from fraccond.presets import build_preset, bump_field


class TestJson:
    def test_canonical_key_order(self):
        a = ser.canonical_json({"b": 1, "a": [2, {"z": 3, "y": 4}]})
        b = ser.canonical_json({"a": [2, {"y": 4, "z": 3}], "b": 1})
        assert a == b
        assert a.endswith("\n")

    def test_numpy_values_encode(self, tmp_path):
        obj = {
            "f": np.float64(1.5),
            "i": np.int64(3),
            "b": np.bool_(True),
            "arr": np.arange(3.0),
        }
        path = ser.write_json(tmp_path / "r.json", obj)
        back = ser.read_json(path)
        assert back == {"f": 1.5, "i": 3, "b": True, "arr": [0.0, 1.0, 2.0]}

    def test_grid_hash_tracks_config(self, grid1d):
        other = build_grid(1, 1.0, 128, -0.5, 0.5, -0.95, -0.65, 0.65, 0.95)
        assert ser.grid_hash(grid1d) != ser.grid_hash(other)
        assert ser.grid_hash(grid1d) == ser.grid_hash(grid1d)
        assert len(ser.grid_hash(grid1d)) == 16


class TestFieldCsv:
    def test_roundtrip_bitwise(self, grid1d, rng, tmp_path):
        u = rng.standard_normal(grid1d.n_nodes)
        ser.write_field(tmp_path / "u", grid1d, u, label="noise")
        back, meta = ser.read_field(tmp_path / "u", grid1d)
        assert np.array_equal(back, u)
        assert meta["label"] == "noise"
        assert meta["grid"]["N"] == grid1d.N

    def test_roundtrip_2d(self, grid2d, tmp_path):
        u = bump_field(grid2d)
        ser.write_field(tmp_path / "u", grid2d, u)
        back, _ = ser.read_field(tmp_path / "u", grid2d)
        assert np.array_equal(back, u)

    def test_header_row_and_columns(self, grid2d, tmp_path):
        path = ser.write_field(tmp_path / "u", grid2d, np.zeros(grid2d.n_nodes))
        first = path.read_text().splitlines()[0]
        assert first == "node,x0,x1,value"

    def test_wrong_grid_rejected(self, grid1d, tmp_path):
        ser.write_field(tmp_path / "u", grid1d, np.zeros(grid1d.n_nodes))
        other = build_grid(1, 1.0, 128, -0.5, 0.5, -0.95, -0.65, 0.65, 0.95)
        with pytest.raises(ValueError, match="fingerprint"):
            ser.read_field(tmp_path / "u", other)

    def test_wrong_length_rejected(self, grid1d, tmp_path):
        with pytest.raises(ValueError, match="nodes"):
            ser.write_field(tmp_path / "u", grid1d, np.zeros(5))


class TestBinary:
    def test_matrix_roundtrip(self, grid1d, rng, tmp_path):
        M = rng.standard_normal((7, 5))
        ser.write_matrix(tmp_path / "m", M, grid=grid1d, label="test")
        back, header = ser.read_matrix(tmp_path / "m", grid1d)
        assert np.array_equal(back, M)
        assert header["shape"] == [7, 5]
        assert header["label"] == "test"

    def test_pair_field_roundtrip(self, grid1d, tmp_path):
        kern = ZetaKernel(grid1d, 0.5)
        G = frac_gradient(grid1d, kern, bump_field(grid1d))
        ser.write_pair_field(tmp_path / "g", grid1d, G, 0.5)
        back, header = ser.read_pair_field(tmp_path / "g", grid1d)
        assert np.array_equal(back, G)
        assert header["s"] == 0.5
        assert header["component_shape"] == list(G.shape[2:])

    def test_grid_mismatch_rejected(self, grid1d, tmp_path):
        ser.write_matrix(tmp_path / "m", np.eye(3), grid=grid1d)
        other = build_grid(1, 1.0, 128, -0.5, 0.5, -0.95, -0.65, 0.65, 0.95)
        with pytest.raises(ValueError, match="fingerprint"):
            ser.read_matrix(tmp_path / "m", other)


class TestPhiManifest:
    @pytest.mark.parametrize("name", ["identity", "isotropic-separable", "diagonal-crystal"])
    def test_roundtrip_1d(self, grid1d, name, tmp_path):
        phi = build_preset(grid1d, name).phi
        manifest = ser.write_phi_manifest(tmp_path, "phi", grid1d, phi)
        back = ser.read_phi_manifest(manifest, grid1d)
        assert np.array_equal(back.fields, phi.fields)
        assert back.kinds == phi.kinds

    def test_roundtrip_2d(self, grid2d, tmp_path):
        phi = build_preset(grid2d, "diagonal-crystal").phi
        manifest = ser.write_phi_manifest(tmp_path, "phi", grid2d, phi)
        back = ser.read_phi_manifest(manifest, grid2d)
        assert np.array_equal(back.fields, phi.fields)

    def test_manifest_lists_files(self, grid1d, tmp_path):
        phi = build_preset(grid1d, "diagonal-crystal").phi
        manifest = ser.write_phi_manifest(tmp_path, "phi", grid1d, phi)
        meta = ser.read_json(manifest)
        assert len(meta["fields"]) == phi.fields.shape[0]
        for fname in meta["fields"]:
            assert (tmp_path / fname).exists()


class TestSweepCsv:
    def test_row_shape(self, tmp_path):
        s_list = [0.6, 0.7, 0.8, 0.9, 0.95, 0.99]
        errors = [0.8, 0.7, 0.6, 0.4, 0.2, 0.05]
        path = ser.write_sweep_csv(tmp_path / "sweep.csv", s_list, errors, 1e-15)
        lines = path.read_text().splitlines()
        assert len(lines) == 1 + 6 + 1
        assert lines[0] == "s,error"
        assert lines[-1].startswith("floor,")
        assert float(lines[1].split(",")[1]) == 0.8
