"""Batch driver exposing every experiment as a subcommand.

Each subcommand reads one JSON config, validates it completely before any
computation (unknown keys rejected), runs the experiment, and writes
machine-readable artifacts into the output directory: a canonical JSON
report — the only file carrying a timestamp — plus CSV/binary dumps where
a command produces fields or matrices.  One seed governs all randomness,
so a fixed (config, seed) pair reproduces every byte of output regardless
of thread count.

Exit codes: 0 all checks passed; 1 numeric failure or module error (a
report or error record is still written); 2 usage/config error (nothing
is computed).
"""

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from fraccond.anisotropy import (
    PhiSequence,
    apply_gauge,
    assemble_exterior,
    check_positivity,
    kernel_from_phi,
    mercer_decompose,
)
from fraccond.conductivity import (
    assemble_bilinear,
    gauge_invariance_residual,
    self_adjointness_residual,
)
from fraccond.grid import assert_supported_in, build_grid
from fraccond.inverse import (
    alessandrini_check,
    dn_map,
    runge_residual,
    uniqueness_experiment,
)
from fraccond.limits import s_sweep
from fraccond.pairs import (
    ZetaKernel,
    composition_apply,
    frac_divergence,
    frac_gradient,
    kernel_split_residual,
    pair_inner,
)
from fraccond.presets import PresetBundle, build_preset, bump_field, gaussian_field
from fraccond.serialize import (
    read_phi_manifest,
    write_field,
    write_json,
    write_matrix,
    write_phi_manifest,
    write_sweep_csv,
)
from fraccond.solver import solve_direct, solve_transformed, wellposedness_report
from fraccond.spectral import frac_laplacian

__all__ = ["main", "run_command", "ConfigError"]

SCHEMA_VERSION = 1

GRID_KEYS = (
    "dim", "L", "N",
    "omega_min", "omega_max",
    "w1_min", "w1_max",
    "w2_min", "w2_max",
)

_KERNEL_KEYS = {
    "identity": set(),
    "isotropic-separable": {"amplitude", "profile"},
    "diagonal-crystal": {"amplitude"},
    "rank-R-random": {"rank", "shift"},
    "indefinite": {"amplitude"},
    "phi-files": {"manifest"},
}

_FIELD_KEYS = {
    "zero": set(),
    "bump": {"center", "radius", "amplitude"},
    "gaussian": {"center", "decay_radius", "amplitude"},
}


class ConfigError(ValueError):
    """Config or usage problem detected before any computation."""


def _expect_block(block, required, optional, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: must be a JSON object")
    unknown = set(block) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in block]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")


def _build_grid_block(cfg):
    if "grid" not in cfg:
        raise ConfigError("missing 'grid' block")
    _expect_block(cfg["grid"], GRID_KEYS, (), "grid")
    try:
        return build_grid(**cfg["grid"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}")


def _build_kernel(grid, cfg, rng):
    block = cfg.get("kernel", {"type": "identity"})
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError("kernel: must be an object with a 'type' key")
    name = block["type"]
    if name not in _KERNEL_KEYS:
        raise ConfigError(
            f"kernel: unknown type {name!r}; choose from {sorted(_KERNEL_KEYS)}"
        )
    unknown = set(block) - {"type"} - _KERNEL_KEYS[name]
    if unknown:
        raise ConfigError(f"kernel: unknown keys {sorted(unknown)} for type {name!r}")
    if name == "phi-files":
        try:
            phi = read_phi_manifest(block["manifest"], grid)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"kernel: cannot load factorization: {exc}")
        return PresetBundle(name, phi, kernel_from_phi(phi), 0.0, None)
    try:
        return build_preset(grid, block, rng=rng)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"kernel: {exc}")


def _build_field(grid, spec, where):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"{where}: must be an object with a 'type' key")
    kind = spec["type"]
    if kind not in _FIELD_KEYS:
        raise ConfigError(
            f"{where}: unknown field type {kind!r}; choose from {sorted(_FIELD_KEYS)}"
        )
    unknown = set(spec) - {"type"} - _FIELD_KEYS[kind]
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    if kind == "zero":
        return np.zeros(grid.n_nodes)
    amp = float(spec.get("amplitude", 1.0))
    center = np.atleast_1d(np.asarray(spec["center"], float)) if "center" in spec else None
    try:
        if kind == "bump":
            radius = spec.get("radius")
            return bump_field(grid, center=center, radius=radius, amplitude=amp)
        radius = spec.get("decay_radius")
        return gaussian_field(grid, center=center, decay_radius=radius, amplitude=amp)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}")


def _build_gauge(grid, cfg):
    if "gauge" not in cfg:
        raise ConfigError("missing 'gauge' block")
    spec = cfg["gauge"]
    _expect_block(spec, ("amplitude",), ("profile",), "gauge")
    amp = float(spec["amplitude"])
    profile = spec.get("profile", "bump")
    if profile == "bump":
        rho = amp * bump_field(grid)
    elif profile == "gaussian":
        rho = amp * gaussian_field(grid)
    else:
        raise ConfigError(f"gauge: unknown profile {profile!r}")
    if np.any(1.0 + rho <= 0.0):
        raise ConfigError("gauge: 1 + rho must stay positive")
    return rho


def _tolerances(cfg, defaults):
    tols = dict(defaults)
    block = cfg.get("tolerances", {})
    _expect_block(block, (), tuple(defaults), "tolerances")
    for key, val in block.items():
        tols[key] = float(val)
    return tols


def _s_value(cfg):
    s = cfg.get("s", 0.5)
    try:
        s = float(s)
    except (TypeError, ValueError):
        raise ConfigError(f"s must be a number, got {s!r}")
    if not 0.0 < s < 1.0:
        raise ConfigError(f"s must lie in (0, 1), got {s}")
    return s


def _require_phi(pre, command):
    if pre.phi is None:
        raise ConfigError(
            f"{command}: kernel type {pre.name!r} carries no factorization"
        )
    return pre.phi


def _suite(measured, threshold):
    return {
        "measured": float(measured),
        "threshold": float(threshold),
        "pass": bool(measured <= threshold),
    }


# -- subcommands ---------------------------------------------------------------


def cmd_identities(grid, cfg, ctx):
    s = _s_value(cfg)
    trials = int(cfg.get("trials", 100))
    tol = _tolerances(cfg, {
        "adjointness": 1e-12,
        "gauge": 1e-12,
        "self_adjointness": 1e-12,
        "kernel_split": 1e-6,
    })
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)

    kern = ZetaKernel(grid, s)
    pair_shape = frac_gradient(grid, kern, np.zeros(grid.n_nodes)).shape
    worst_adj = 0.0
    for _ in range(trials):
        st = float(rng.uniform(0.15, 0.9))
        kt = ZetaKernel(grid, st)
        u = rng.standard_normal(grid.n_nodes)
        V = rng.standard_normal(pair_shape)
        lhs = pair_inner(grid, V, frac_gradient(grid, kt, u))
        rhs = grid.inner(u, frac_divergence(grid, kt, V))
        worst_adj = max(worst_adj, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))

    u = gaussian_field(grid)
    comp = composition_apply(grid, kern, u)
    lap = frac_laplacian(grid, u, s)
    I = grid.omega_idx
    comp_err = float(
        np.linalg.norm((comp - lap)[I]) / max(np.linalg.norm(lap[I]), 1e-300)
    )

    vals = np.asarray(pre.kernel.values, dtype=float)
    noise = rng.standard_normal(vals.shape)
    noise *= float(np.abs(vals).max()) / max(float(np.abs(noise).max()), 1e-300)
    gauge_res = gauge_invariance_residual(
        grid, vals + noise, s, trials=trials, rng=rng, threads=ctx["threads"]
    )
    sa_res = self_adjointness_residual(grid, pre.kernel, s, trials=trials, rng=rng)

    nu_claim = max(float(pre.nu), 0.0) if pre.nu is not None else 0.0
    pos = check_positivity(pre.kernel, nu=nu_claim)

    if grid.dim == 1:
        probes = [(-0.3, 0.45), (0.1, 0.62)]
    else:
        probes = [([-0.3, 0.1], [0.45, -0.2]), ([0.2, 0.3], [-0.4, 0.0])]
    split = [kernel_split_residual(x, y, s) for x, y in probes]
    applicable = [r["residual"] for r in split if r["applicable"]]
    split_worst = max(applicable) if applicable else None

    suites = {
        "adjointness": _suite(worst_adj, tol["adjointness"]),
        "composition": {"measured": comp_err, "pass": True},
        "gauge": _suite(gauge_res, tol["gauge"]),
        "self_adjointness": _suite(sa_res, tol["self_adjointness"]),
        "positivity": {
            "measured": pos["min_rayleigh"],
            "threshold": nu_claim,
            "pass": bool(pos["passed"]),
        },
        "kernel_split": (
            _suite(split_worst, tol["kernel_split"])
            if split_worst is not None
            else {"measured": None, "pass": True, "applicable": False}
        ),
    }
    ok = all(entry["pass"] for entry in suites.values())
    payload = {"s": s, "trials": trials, "kernel": pre.name, "suites": suites}
    return payload, ok, comp_err


def cmd_decompose(grid, cfg, ctx):
    tol = _tolerances(cfg, {"roundtrip": 1e-9, "mercer": 1e-10})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)

    if pre.phi is not None:
        is_beta = np.array([k == "beta" for k in pre.phi.kinds])
        betas = pre.phi.fields[is_beta]
    else:
        betas = np.broadcast_to(
            np.eye(grid.dim), (1, grid.n_nodes, grid.dim, grid.dim)
        ).copy()
    tilde = assemble_exterior(grid, betas)
    fields, rep = mercer_decompose(grid, pre.kernel, tilde, tol=tol["mercer"])

    kinds = ("beta",) * betas.shape[0] + ("phi",) * fields.shape[0]
    recovered = PhiSequence(grid, np.concatenate([betas, fields], axis=0), kinds)
    rebuilt = kernel_from_phi(recovered)
    scale = float(np.abs(pre.kernel.values).max()) or 1.0
    roundtrip = float(np.abs(rebuilt.values - pre.kernel.values).max()) / scale

    trace_defect = 0.0
    recon_worst = 0.0
    for entry in rep["entries"].values():
        denom = max(abs(entry["trace_quadrature"]), 1e-300)
        trace_defect = max(
            trace_defect, abs(entry["trace_sum"] - entry["trace_quadrature"]) / denom
        )
        recon_worst = max(recon_worst, entry["reconstruction_residual"])

    if ctx["out"] is not None:
        write_phi_manifest(ctx["out"], "phi_recovered", grid, recovered)

    ok = bool(rep["psd"]) and roundtrip <= tol["roundtrip"]
    payload = {
        "kernel": pre.name,
        "rank": int(fields.shape[0]),
        "psd": bool(rep["psd"]),
        "roundtrip": roundtrip,
        "roundtrip_threshold": tol["roundtrip"],
        "trace_defect": trace_defect,
        "reconstruction_worst": recon_worst,
    }
    return payload, ok, roundtrip


def cmd_solve(grid, cfg, ctx):
    s = _s_value(cfg)
    if "datum" not in cfg:
        raise ConfigError("missing 'datum' block")
    tol = _tolerances(cfg, {"residual": 1e-10})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    f = _build_field(grid, cfg["datum"], "datum")
    src = _build_field(grid, cfg["source"], "source") if "source" in cfg else None

    st = assemble_bilinear(grid, pre.kernel, s, threads=ctx["threads"])
    res = solve_direct(grid, pre.kernel, s, f, source=src, stiffness=st)
    well = wellposedness_report(grid, pre.kernel, s, stiffness=st)

    two_path = None
    if pre.phi is not None:
        res_t = solve_transformed(grid, pre.phi, s, f, source=src)
        scale = max(float(np.abs(res.u).max()), 1e-300)
        two_path = float(np.abs(res.u - res_t.u).max()) / scale

    if ctx["out"] is not None:
        write_field(ctx["out"] / "solution", grid, res.u, s=s, residual=res.residual)

    ok = bool(well["positive_definite"]) and res.residual <= tol["residual"]
    payload = {
        "s": s,
        "kernel": pre.name,
        "residual": res.residual,
        "residual_threshold": tol["residual"],
        "energy": res.energy,
        "two_path": two_path,
        "wellposedness": well,
    }
    return payload, ok, two_path if two_path is not None else res.residual


def cmd_dn(grid, cfg, ctx):
    s = _s_value(cfg)
    tol = _tolerances(cfg, {"symmetry": 1e-10})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    lam = dn_map(grid, pre.kernel, s, threads=ctx["threads"], label=pre.name)
    if ctx["out"] is not None:
        write_matrix(
            ctx["out"] / "dn_schur", lam.schur, grid=grid,
            s=s, matrix_kind="exterior_schur", kernel_hash=lam.kernel_hash,
        )
        write_matrix(
            ctx["out"] / "dn_block", lam.block, grid=grid,
            s=s, matrix_kind="window_block", kernel_hash=lam.kernel_hash,
        )
    ok = lam.symmetry_defect <= tol["symmetry"]
    payload = {
        "s": s,
        "kernel": pre.name,
        "kernel_hash": lam.kernel_hash,
        "symmetry_defect": lam.symmetry_defect,
        "symmetry_threshold": tol["symmetry"],
        "schur_shape": list(lam.schur.shape),
        "block_shape": list(lam.block.shape),
        "scale": float(np.abs(lam.schur).max()),
    }
    return payload, ok, lam.symmetry_defect


def cmd_alessandrini(grid, cfg, ctx):
    s = _s_value(cfg)
    for key in ("datum1", "datum2"):
        if key not in cfg:
            raise ConfigError(f"missing '{key}' block")
    tol = _tolerances(cfg, {"residual": 1e-2})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    phi1 = _require_phi(pre, "alessandrini")
    rho = _build_gauge(grid, cfg)
    f1 = _build_field(grid, cfg["datum1"], "datum1")
    f2 = _build_field(grid, cfg["datum2"], "datum2")
    try:
        assert_supported_in(grid, f1, grid.w1_mask, name="datum1")
        assert_supported_in(grid, f2, grid.w2_mask, name="datum2")
    except ValueError as exc:
        raise ConfigError(str(exc))

    phi2 = apply_gauge(phi1, rho)
    rep = alessandrini_check(grid, phi1, phi2, s, f1, f2, threads=ctx["threads"])
    ok = rep["residual"] <= tol["residual"]
    payload = {
        "s": s,
        "kernel": pre.name,
        "rho_max": float(np.abs(rho).max()),
        "lhs": rep["lhs"],
        "rhs": rep["rhs"],
        "residual": rep["residual"],
        "residual_threshold": tol["residual"],
        "dn_symmetry": rep["dn_symmetry"],
    }
    return payload, ok, rep["residual"]


def cmd_runge(grid, cfg, ctx):
    s = _s_value(cfg)
    n_basis = int(cfg.get("n_basis", 16))
    window = cfg.get("window", "w1")
    if window not in ("w1", "w2", "exterior"):
        raise ConfigError(f"window must be w1, w2, or exterior, got {window!r}")
    tol = _tolerances(cfg, {"final": float("inf")})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    target = _build_field(grid, cfg["target"], "target") if "target" in cfg else None

    rep = runge_residual(
        grid, pre.kernel, s,
        target=target, n_basis=n_basis, window=window, threads=ctx["threads"],
    )
    curve = rep["residuals"]
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(curve, curve[1:]))

    if ctx["out"] is not None:
        with open(ctx["out"] / "runge_curve.csv", "w") as fh:
            fh.write("m,residual\n")
            for m, r in enumerate(curve, start=1):
                fh.write(f"{m},{r!r}\n")

    ok = nonincreasing and curve[-1] <= tol["final"]
    payload = {
        "s": s,
        "kernel": pre.name,
        "window": window,
        "n_basis": rep["n_basis"],
        "curve": curve,
        "final": curve[-1],
        "final_threshold": tol["final"],
        "nonincreasing": bool(nonincreasing),
        "supported": bool(rep["supported"]),
    }
    return payload, ok, curve[-1]


def cmd_uniqueness(grid, cfg, ctx):
    s = _s_value(cfg)
    tol = _tolerances(cfg, {"control": 1e-10, "ratio": 10.0})
    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    phi = _require_phi(pre, "uniqueness")
    rho = _build_gauge(grid, cfg)

    rep = uniqueness_experiment(grid, phi, s, rho, threads=ctx["threads"])
    if rep["rho_max"] == 0.0:
        ok = rep["delta_dn"] <= tol["control"]
    else:
        ok = (
            bool(rep["control_ok"])
            and bool(rep["separated"])
            and rep["delta_dn"] >= tol["ratio"] * rep["control_floor"]
        )
    payload = {"kernel": pre.name, **rep, "control_threshold": tol["control"]}
    return payload, ok, rep["delta_dn"]


def cmd_limit(grid, cfg, ctx):
    s_list = cfg.get("s_list", [0.6, 0.7, 0.8, 0.9, 0.95, 0.99])
    if not isinstance(s_list, (list, tuple)) or not s_list:
        raise ConfigError("s_list must be a nonempty array")
    try:
        s_list = [float(s) for s in s_list]
    except (TypeError, ValueError):
        raise ConfigError("s_list entries must be numbers")
    if any(not 0.0 < s < 1.0 for s in s_list):
        raise ConfigError("s_list entries must lie in (0, 1)")
    if any(b <= a for a, b in zip(s_list, s_list[1:])):
        raise ConfigError("s_list must increase strictly")

    rng = np.random.default_rng(ctx["seed"])
    pre = _build_kernel(grid, cfg, rng)
    phi = _require_phi(pre, "limit")
    u = _build_field(grid, cfg.get("field", {"type": "gaussian"}), "field")

    rep = s_sweep(grid, phi, u, s_list, threads=ctx["threads"])
    if ctx["out"] is not None:
        write_sweep_csv(
            ctx["out"] / "limit_sweep.csv", s_list, rep["errors"], rep["floor"]
        )
    ok = bool(rep["monotone_above_floor"]) and bool(rep["nu_ok"])
    payload = {"kernel": pre.name, **rep}
    return payload, ok, rep["errors"][-1]


# -- driver --------------------------------------------------------------------

_COMMANDS = {
    "identities": (cmd_identities, {"s", "trials", "tolerances"}, True),
    "decompose": (cmd_decompose, {"tolerances"}, False),
    "solve": (cmd_solve, {"s", "datum", "source", "tolerances"}, True),
    "dn": (cmd_dn, {"s", "tolerances"}, False),
    "alessandrini": (
        cmd_alessandrini,
        {"s", "gauge", "datum1", "datum2", "tolerances"},
        True,
    ),
    "runge": (cmd_runge, {"s", "n_basis", "window", "target", "tolerances"}, False),
    "uniqueness": (cmd_uniqueness, {"s", "gauge", "tolerances"}, False),
    "limit": (cmd_limit, {"s_list", "field", "tolerances"}, False),
}


def _load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _refined_grid(grid, level):
    spec = grid.config_dict()
    spec["N"] = grid.N * (2 ** level)
    return build_grid(**spec)


def run_command(name, config_path, out_dir=None, seed=0, threads=1, refine=0):
    """Run one subcommand; returns the process exit code."""
    fn, extra_keys, needs_decrease = _COMMANDS[name]
    try:
        cfg = _load_config(config_path)
        allowed = {"grid", "kernel", "out"} | extra_keys
        unknown = set(cfg) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)} for {name}")
        base_grid = _build_grid_block(cfg)
        out = Path(out_dir) if out_dir is not None else Path(cfg.get("out", "fraccond-out"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out.mkdir(parents=True, exist_ok=True)
    report_path = out / f"{name}_report.json"
    envelope = {
        "schema_version": SCHEMA_VERSION,
        "command": name,
        "seed": int(seed),
        "config": cfg,
    }
    try:
        payload0 = None
        oks, levels = [], []
        for level in range(refine + 1):
            g = base_grid if level == 0 else _refined_grid(base_grid, level)
            ctx = {"seed": seed, "threads": threads, "out": out if level == 0 else None}
            payload, ok, primary = fn(g, cfg, ctx)
            if level == 0:
                payload0 = payload
            oks.append(bool(ok))
            levels.append({"N": g.N, "value": None if primary is None else float(primary)})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        record = {
            **envelope,
            "generated_at": _timestamp(),
            "pass": False,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        write_json(report_path, record)
        print(f"{name}: ERROR ({type(exc).__name__}) -> {report_path}", file=sys.stderr)
        return 1

    passed = all(oks)
    report = {**envelope, "generated_at": _timestamp(), **payload0}
    if refine > 0:
        values = [entry["value"] for entry in levels]
        decreasing = (
            all(b < a for a, b in zip(values, values[1:]))
            if all(v is not None for v in values)
            else None
        )
        report["refinement"] = {"levels": levels, "decreasing": decreasing}
        if needs_decrease and decreasing is False:
            passed = False
    report["pass"] = bool(passed)
    write_json(report_path, report)
    print(f"{name}: {'PASS' if passed else 'FAIL'} -> {report_path}")
    return 0 if passed else 1


def _timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fraccond",
        description="Experiments on the two-point conductivity calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    descriptions = {
        "identities": "operator identity suites: adjointness, composition, gauge, positivity, kernel split",
        "decompose": "factorize the interior kernel and verify the roundtrip",
        "solve": "exterior-value problem with wellposedness diagnostics",
        "dn": "exterior measurement matrix with symmetry check",
        "alessandrini": "integral identity for a gauge pair",
        "runge": "interior approximation residual curve",
        "uniqueness": "coefficient distinguishability with embedded control",
        "limit": "order sweep against the local operator",
    }
    for name in _COMMANDS:
        sp = sub.add_parser(name, help=descriptions[name])
        sp.add_argument("--config", required=True, help="path to JSON experiment config")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, default=0, help="seed governing all randomness")
        sp.add_argument("--threads", type=int, default=1, help="worker threads")
        sp.add_argument(
            "--refine", type=int, default=0, metavar="K",
            help="rerun at N, 2N, ..., 2^K N and record the convergence curve",
        )
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2 ** 64:
        parser.error("seed must fit in 64 bits")
    if args.threads < 1:
        parser.error("threads must be >= 1")
    if args.refine < 0:
        parser.error("refine must be >= 0")
    return run_command(
        args.command, args.config,
        out_dir=args.out, seed=args.seed, threads=args.threads, refine=args.refine,
    )


if __name__ == "__main__":
    sys.exit(main())
