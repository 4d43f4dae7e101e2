"""On-disk formats.

Scalar fields travel as CSV (node index, coordinates, value) next to a JSON
metadata file; matrices and pair fields as row-major float64 dumps with a
JSON header carrying the grid fingerprint; factorization sequences as a
JSON manifest plus one CSV per field.  All JSON is written canonically
(sorted keys, fixed indentation) so byte-identical reruns are meaningful.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from fraccond.anisotropy import PhiSequence

__all__ = [
    "canonical_json",
    "write_json",
    "read_json",
    "grid_hash",
    "write_field",
    "read_field",
    "write_matrix",
    "read_matrix",
    "write_pair_field",
    "read_pair_field",
    "write_phi_manifest",
    "read_phi_manifest",
    "write_sweep_csv",
]


def _plain(obj):
    """Recursively convert numpy scalars/arrays so json can encode them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    Path(path).write_text(canonical_json(obj))
    return Path(path)


def read_json(path):
    return json.loads(Path(path).read_text())


def grid_hash(grid):
    """Fingerprint of the grid configuration (not of any field data)."""
    text = canonical_json(grid.config_dict())
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _check_grid(header, grid, path):
    if grid is not None and header.get("grid_hash") not in (None, grid_hash(grid)):
        raise ValueError(f"{path}: grid fingerprint mismatch")


def write_field(path_base, grid, u, **meta):
    """Scalar nodal field as <base>.csv plus <base>.json metadata."""
    base = Path(path_base)
    u = np.asarray(u, dtype=float).ravel()
    if u.size != grid.n_nodes:
        raise ValueError(f"field has {u.size} values, grid has {grid.n_nodes} nodes")
    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node"] + [f"x{a}" for a in range(grid.dim)] + ["value"])
        for i in range(grid.n_nodes):
            w.writerow([i] + [repr(float(c)) for c in grid.coords[i]] + [repr(float(u[i]))])
    write_json(base.with_suffix(".json"), {
        "kind": "field",
        "grid": grid.config_dict(),
        "grid_hash": grid_hash(grid),
        "n_nodes": grid.n_nodes,
        **meta,
    })
    return base.with_suffix(".csv")


def read_field(path_base, grid=None):
    base = Path(path_base)
    meta = read_json(base.with_suffix(".json"))
    _check_grid(meta, grid, base)
    out = []
    with open(base.with_suffix(".csv"), newline="") as fh:
        rows = csv.reader(fh)
        next(rows)
        for row in rows:
            out.append(float(row[-1]))
    u = np.array(out)
    if u.size != meta["n_nodes"]:
        raise ValueError(f"{base}: expected {meta['n_nodes']} rows, got {u.size}")
    return u, meta


def _write_binary(base, values, header):
    base = Path(base)
    values = np.ascontiguousarray(np.asarray(values, dtype=float))
    base.with_suffix(".bin").write_bytes(values.tobytes())
    write_json(base.with_suffix(".json"), {
        "shape": list(values.shape),
        "dtype": "float64",
        "order": "C",
        **header,
    })
    return base.with_suffix(".bin")


def _read_binary(base, grid=None):
    base = Path(base)
    header = read_json(base.with_suffix(".json"))
    _check_grid(header, grid, base)
    raw = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype=np.float64)
    return raw.reshape(header["shape"]).copy(), header


def write_matrix(base, M, grid=None, **meta):
    """Dense matrix as row-major float64 dump plus JSON header."""
    M = np.asarray(M, dtype=float)
    header = {"kind": "matrix", **meta}
    if grid is not None:
        header["grid_hash"] = grid_hash(grid)
    return _write_binary(base, M, header)


def read_matrix(base, grid=None):
    return _read_binary(base, grid)


def write_pair_field(base, grid, values, s, **meta):
    """Two-point field dump; the header records order and component shape."""
    values = np.asarray(values, dtype=float)
    return _write_binary(base, values, {
        "kind": "pair_field",
        "grid_hash": grid_hash(grid),
        "s": float(s),
        "component_shape": list(values.shape[2:]),
        **meta,
    })


def read_pair_field(base, grid=None):
    return _read_binary(base, grid)


def write_phi_manifest(out_dir, name, grid, phi, **meta):
    """Factorization sequence: JSON manifest plus one CSV per field.

    Each CSV carries one (dim x dim)-matrix field in row-major entry order
    after the node/coordinate columns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = grid.dim
    entries = [f"a{a}{b}" for a in range(d) for b in range(d)]
    files = []
    for k in range(phi.fields.shape[0]):
        fname = f"{name}_{k}.csv"
        with open(out / fname, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node"] + [f"x{a}" for a in range(d)] + entries)
            for i in range(grid.n_nodes):
                flat = phi.fields[k, i].reshape(-1)
                w.writerow(
                    [i]
                    + [repr(float(c)) for c in grid.coords[i]]
                    + [repr(float(v)) for v in flat]
                )
        files.append(fname)
    manifest = out / f"{name}.json"
    write_json(manifest, {
        "kind": "phi_sequence",
        "grid": grid.config_dict(),
        "grid_hash": grid_hash(grid),
        "kinds": list(phi.kinds),
        "fields": files,
        **meta,
    })
    return manifest


def read_phi_manifest(manifest_path, grid):
    path = Path(manifest_path)
    meta = read_json(path)
    _check_grid(meta, grid, path)
    d = grid.dim
    fields = []
    for fname in meta["fields"]:
        vals = np.zeros((grid.n_nodes, d, d))
        with open(path.parent / fname, newline="") as fh:
            rows = csv.reader(fh)
            next(rows)
            for row in rows:
                i = int(row[0])
                vals[i] = np.array([float(v) for v in row[1 + d:]]).reshape(d, d)
        fields.append(vals)
    return PhiSequence(grid, np.stack(fields, axis=0), tuple(meta["kinds"]))


def write_sweep_csv(path, s_list, errors, floor):
    """Order-sweep table: one row per order plus a trailing floor row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "error"])
        for s, e in zip(s_list, errors):
            w.writerow([repr(float(s)), repr(float(e))])
        w.writerow(["floor", repr(float(floor))])
    return Path(path)
