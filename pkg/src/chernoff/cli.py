"""Command-line experiment harness.

Subcommands run the four experiment families from JSON configs and write
plot-ready CSV plus JSON summaries, together with a run manifest:

* ``converge`` — partition products vs a reference (or self-reference),
  plus the ``generator`` and ``invariants`` modes;
* ``asymptotics`` — short-time expansion fits vs predictions;
* ``mc-fdd`` — Monte Carlo finite-dimensional expectations vs exact chain
  and diffusion references;
* ``density-check`` — off-partition density normalization and shell limits;
* ``run-all-presets`` — every shipped preset, one output directory each.

Exit codes: 0 all assertions passed; 2 configuration error; 3 numerical
precondition failure; 4 assertion failure (artifacts still written).
Numeric CSV fields carry 17 significant digits; JSON keys are sorted. Reruns
with the same config and seed are byte-identical except for the manifest
timestamps.
"""

from __future__ import annotations

import argparse
import csv
import importlib.resources
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import BACKEND
from .asymptotics import (
    kernel_tail_bound,
    measure_normalized,
    measure_unnormalized,
    predict_normalized,
    predict_unnormalized,
)
from .catalog import resolve
from .conditioned import (
    fdd_estimate,
    fdd_reference,
    off_partition_normalization,
    shell_density_limit,
)
from .engine import (
    apply_product,
    convergence_study,
    generator_consistency_check,
    self_convergence_study,
    uniform_partition,
)
from .errors import ChernoffError, InvalidConfig
from .geometry import EigenIndex, ManifoldSpec, build_grid, chordal_sq
from .kernels import TimeScaling, assemble_step_operator
from .spectral import (
    ScalarGeneratorModel,
    SpectralFunction,
    drift_vanishes,
    propagate,
    propagator_law_check,
)

ENV_OUT = "CHERNOFF_OUT"

_EXPERIMENT_BY_COMMAND = {
    "converge": "converge",
    "asymptotics": "asymptotics",
    "mc-fdd": "mc_fdd",
    "density-check": "density",
}


# ---------------------------------------------------------------------------
# config loading and validation


def _fail(path: str, message: str):
    raise InvalidConfig(f"config field {path!r}: {message}")


def _check_keys(obj: dict, path: str, required: tuple, optional: tuple = ()):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    for key in obj:
        if key not in required and key not in optional:
            _fail(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in obj:
            _fail(f"{path}.{key}", "missing required field")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
    return cfg


_SCALING_KEYS = ("family", "a", "b")


def _validate_scaling(obj, path):
    if "diagonal" in obj:
        _check_keys(obj, path, ("diagonal",))
        if not isinstance(obj["diagonal"], list) or not obj["diagonal"]:
            _fail(f"{path}.diagonal", "expected a non-empty list")
        for i, comp in enumerate(obj["diagonal"]):
            _check_keys(comp, f"{path}.diagonal[{i}]", ("family",), ("a", "b"))
    else:
        _check_keys(obj, path, ("family",), ("a", "b"))


def _validate_config(cfg: dict, experiment: str):
    _check_keys(
        cfg,
        "config",
        ("schema_version", "experiment", "manifold", "scaling", "interval", "params"),
        ("seed",),
    )
    if cfg["schema_version"] != 1:
        _fail("config.schema_version", f"unsupported version {cfg['schema_version']}")
    if cfg["experiment"] != experiment:
        _fail("config.experiment", f"expected {experiment!r}, got {cfg['experiment']!r}")
    _check_keys(cfg["manifold"], "config.manifold", ("kind", "radius", "resolution"))
    _validate_scaling(cfg["scaling"], "config.scaling")
    interval = cfg["interval"]
    if not (isinstance(interval, list) and len(interval) == 2 and interval[0] < interval[1]):
        _fail("config.interval", "expected [S, T] with S < T")

    p = cfg["params"]
    if experiment == "converge":
        _check_keys(p, "config.params", ("mode",), _CONVERGE_OPTIONAL)
        mode = p["mode"]
        if mode in ("reference", "self"):
            for key in ("function", "n_list"):
                if key not in p:
                    _fail(f"config.params.{key}", "missing required field")
            if not isinstance(p["n_list"], list) or len(p["n_list"]) < 3:
                _fail("config.params.n_list", "need an ascending list of at least 3 entries")
        elif mode == "generator":
            for key in ("functions", "t_values", "h_list"):
                if key not in p:
                    _fail(f"config.params.{key}", "missing required field")
        elif mode != "invariants":
            _fail("config.params.mode", f"unknown mode {mode!r}")
    elif experiment == "asymptotics":
        _check_keys(p, "config.params", ("fits",), ("t_samples",))
        for i, fit in enumerate(p["fits"]):
            _check_keys(
                fit,
                f"config.params.fits[{i}]",
                ("kind", "function", "point", "target_a1"),
                ("rel_tol", "abs_tol", "min_remainder_exponent"),
            )
            if fit["kind"] not in ("unnormalized", "normalized"):
                _fail(f"config.params.fits[{i}].kind", f"unknown kind {fit['kind']!r}")
            if ("rel_tol" in fit) == ("abs_tol" in fit):
                _fail(f"config.params.fits[{i}]", "need exactly one of rel_tol/abs_tol")
        if "t_samples" in p:
            _check_keys(p["t_samples"], "config.params.t_samples", ("start", "stop", "count"))
    elif experiment == "mc_fdd":
        _check_keys(
            p,
            "config.params",
            ("n_steps", "times", "functions", "n_paths", "x0"),
            ("gap_n_list", "max_z"),
        )
        if p["n_paths"] < 10_000:
            _fail("config.params.n_paths", "need at least 10000 paths")
        if len(p["times"]) != len(p["functions"]):
            _fail("config.params.functions", "need one function per observation time")
    elif experiment == "density":
        _check_keys(p, "config.params", (), ("off_partition", "shell"))
        if not p:
            _fail("config.params", "need at least one of off_partition/shell")
        if "off_partition" in p:
            _check_keys(
                p["off_partition"],
                "config.params.off_partition",
                ("r", "tau", "t_i", "z", "tol"),
                ("box_points", "box_widths"),
            )
        if "shell" in p:
            _check_keys(
                p["shell"],
                "config.params.shell",
                ("h", "eps_list", "function", "x", "final_tol"),
            )


_CONVERGE_OPTIONAL = (
    "function",
    "n_list",
    "min_order",
    "max_final_error",
    "functions",
    "t_values",
    "h_list",
    "scalings",
    "min_exponent",
    "tolerance",
    "product_steps",
)


# ---------------------------------------------------------------------------
# builders


def _build_manifold(mcfg: dict):
    try:
        spec = ManifoldSpec(mcfg["kind"], float(mcfg["radius"]))
    except ValueError as exc:
        raise InvalidConfig(f"config.manifold: {exc}") from exc
    resolution = mcfg["resolution"]
    if isinstance(resolution, list):
        resolution = tuple(resolution)
    return spec, build_grid(spec, resolution)


def _build_scaling(scfg: dict) -> TimeScaling:
    from .kernels import ScalingComponent

    try:
        if "diagonal" in scfg:
            comps = [
                ScalingComponent(c["family"], float(c.get("a", 1.0)), float(c.get("b", 0.0)))
                for c in scfg["diagonal"]
            ]
            return TimeScaling.diagonal(comps)
        return TimeScaling(
            (
                ScalingComponent(
                    scfg["family"], float(scfg.get("a", 1.0)), float(scfg.get("b", 0.0))
                ),
            ),
            scalar=True,
        )
    except ValueError as exc:
        raise InvalidConfig(f"config.scaling: {exc}") from exc


def _scaling_label(scfg: dict) -> str:
    if "diagonal" in scfg:
        inner = ",".join(_scaling_label(c) for c in scfg["diagonal"])
        return f"diag({inner})"
    return f"{scfg['family']}(a={scfg.get('a', 1.0)},b={scfg.get('b', 0.0)})"


def _resolve_point(spec: ManifoldSpec, pspec):
    r = spec.radius
    if isinstance(pspec, str):
        if pspec.startswith("angle:") and spec.kind == "circle":
            theta = float(pspec.split(":", 1)[1])
            return np.array([r * math.cos(theta), r * math.sin(theta)])
        if pspec == "pole" and spec.kind == "sphere":
            return np.array([0.0, 0.0, r])
        raise InvalidConfig(f"cannot interpret point {pspec!r} on a {spec.kind}")
    point = np.asarray(pspec, dtype=float)
    if point.shape != (spec.ambient_dim,):
        raise InvalidConfig(f"point must have {spec.ambient_dim} coordinates")
    return point


def _node_index(grid, point) -> int:
    d2 = chordal_sq(grid.nodes, point)
    idx = int(np.argmin(d2))
    if math.sqrt(d2[idx]) > 1e-9 * grid.spec.radius:
        raise InvalidConfig("start point must coincide with a grid node")
    return idx


# ---------------------------------------------------------------------------
# output writers


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    return value


def _fmt_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(path: Path, header, rows):
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])
    os.replace(tmp, path)


def _write_json(path: Path, obj):
    tmp = path.with_suffix(path.suffix + ".tmp")
    text = json.dumps(_plain(obj), sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _check(name: str, passed: bool, **data) -> dict:
    entry = {"name": name, "passed": bool(passed)}
    entry.update(data)
    return entry


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# experiment commands


def _cmd_converge(cfg, out_dir, seed):
    spec, grid = _build_manifold(cfg["manifold"])
    scaling = _build_scaling(cfg["scaling"])
    s, t = (float(v) for v in cfg["interval"])
    p = cfg["params"]
    mode = p["mode"]

    if mode in ("reference", "self"):
        f = resolve(spec, p["function"])
        if mode == "reference":
            model = ScalarGeneratorModel(spec, scaling)
            reference = propagate(model, s, t, f.to_spectral()).to_grid(grid)
            table = convergence_study(grid, scaling, s, t, f.on_grid(grid), p["n_list"], reference)
        else:
            table = self_convergence_study(grid, scaling, s, t, f.on_grid(grid), p["n_list"])
        _write_csv(out_dir / "converge_table.csv", ["n", "mesh", "sup_error"], table.rows)
        checks = [
            _check(
                "errors_strictly_decreasing",
                _strictly_decreasing(table.errors()),
                errors=list(table.errors()),
            )
        ]
        if p.get("min_order") is not None:
            checks.append(
                _check("order_at_least", table.order >= p["min_order"], order=table.order)
            )
        if p.get("max_final_error") is not None:
            checks.append(
                _check(
                    "final_error_within",
                    table.errors()[-1] <= p["max_final_error"],
                    final_error=table.errors()[-1],
                    bound=p["max_final_error"],
                )
            )
        summary = {
            "mode": mode,
            "order": table.order,
            "order_ci95": table.order_ci95,
            "intercept": table.intercept,
            "rows": [list(row) for row in table.rows],
            "checks": checks,
        }
        _write_json(out_dir / "converge_summary.json", summary)
        return ["converge_table.csv", "converge_summary.json"], checks

    if mode == "generator":
        scaling_cfgs = p.get("scalings", [cfg["scaling"]])
        min_exponent = p.get("min_exponent", 0.4)
        rows, checks = [], []
        for scfg in scaling_cfgs:
            sc = _build_scaling(scfg)
            label = _scaling_label(scfg)
            for t_val in p["t_values"]:
                for fname in p["functions"]:
                    f_spec = resolve(spec, fname).to_spectral()
                    table = generator_consistency_check(grid, sc, float(t_val), f_spec, p["h_list"])
                    for h, defect in table.rows:
                        rows.append((label, t_val, fname, h, defect))
                    checks.append(
                        _check(
                            f"defect_decay[{label},t={t_val},{fname}]",
                            _strictly_decreasing(table.defects())
                            and table.exponent >= min_exponent,
                            exponent=table.exponent,
                            defects=list(table.defects()),
                        )
                    )
        _write_csv(
            out_dir / "generator_table.csv",
            ["scaling", "t", "function", "h", "defect"],
            rows,
        )
        _write_json(out_dir / "generator_summary.json", {"mode": mode, "checks": checks})
        return ["generator_table.csv", "generator_summary.json"], checks

    # invariants battery: exact algebraic identities at tight tolerance
    tol = p.get("tolerance", 1e-12)
    steps = int(p.get("product_steps", 16))
    checks = []
    span = t - s
    for a, b in ((s, s + span / 8), (s + span / 2, s + 5 * span / 8), (t - span / 8, t)):
        op = assemble_step_operator(grid, scaling, a, b)
        dev = float(np.max(np.abs(op.matrix.sum(axis=1) - 1.0)))
        checks.append(_check(f"row_sums_one[{a:.3g},{b:.3g}]", dev <= tol, deviation=dev))

    ones = np.ones(grid.n_nodes)
    product = apply_product(grid, scaling, uniform_partition(s, t, steps), ones)
    dev = float(np.max(np.abs(product.values - 1.0)))
    checks.append(_check("product_preserves_constants", dev <= tol, deviation=dev))

    if spec.kind == "circle":
        op = assemble_step_operator(grid, TimeScaling.identity(), s, s + span / 16)
        base = op.matrix[0]
        dev = 0.0
        for i in range(grid.n_nodes):
            dev = max(dev, float(np.max(np.abs(op.matrix[i] - np.roll(base, i)))))
        checks.append(_check("circulant_symmetry", dev <= tol, deviation=dev))

    if scaling.scalar:
        model = ScalarGeneratorModel(spec, scaling)
        if spec.kind == "circle":
            entries = {
                EigenIndex.circle(1, "cos"): 1.0,
                EigenIndex.circle(2, "sin"): 0.25,
                EigenIndex.circle(3, "cos"): 0.5,
            }
        else:
            entries = {EigenIndex.sphere(1, 0): 1.0, EigenIndex.sphere(2, 1): 0.5}
        f_mixed = SpectralFunction.from_coefficients(spec, entries)
        dev = propagator_law_check(model, s, s + 0.3 * span, t, f_mixed)
        checks.append(_check("propagator_law", dev <= tol, deviation=dev))

        t_mid = s + 0.7 * span
        samples = grid.nodes[:: max(1, grid.n_nodes // 64)]
        raw = drift_vanishes(spec, scaling, t_mid, samples)
        scale = abs(scaling.c_prime(t_mid)) * spec.radius
        rel = raw / scale if scale > 0 else raw
        checks.append(_check("drift_projection_vanishes", rel <= tol, relative=rel))

    _write_csv(
        out_dir / "invariants_checks.csv",
        ["check", "passed", "measured"],
        [(c["name"], c["passed"], c.get("deviation", c.get("relative", 0.0))) for c in checks],
    )
    _write_json(out_dir / "invariants_summary.json", {"mode": mode, "checks": checks})
    return ["invariants_checks.csv", "invariants_summary.json"], checks


def _cmd_asymptotics(cfg, out_dir, seed):
    spec, grid = _build_manifold(cfg["manifold"])
    p = cfg["params"]
    ts_cfg = p.get("t_samples", {"start": 1e-4, "stop": 1e-2, "count": 9})
    t_samples = np.geomspace(ts_cfg["start"], ts_cfg["stop"], int(ts_cfg["count"]))

    rows, checks, details = [], [], []
    for fit_cfg in p["fits"]:
        f = resolve(spec, fit_cfg["function"])
        point = _resolve_point(spec, fit_cfg["point"])
        if fit_cfg["kind"] == "unnormalized":
            fit = measure_unnormalized(grid, f.on_grid(grid), point, t_samples)
            prediction = predict_unnormalized(spec, f.to_spectral(), point)
        else:
            fit = measure_normalized(grid, f.on_grid(grid), point, t_samples)
            prediction = predict_normalized(spec, f.to_spectral(), point)
        target = float(fit_cfg["target_a1"])
        if "rel_tol" in fit_cfg:
            ok_target = abs(fit.a1_hat - target) <= fit_cfg["rel_tol"] * abs(target)
        else:
            ok_target = abs(fit.a1_hat - target) <= fit_cfg["abs_tol"]
        name = f"{fit_cfg['kind']}[{fit_cfg['function']}]"
        checks.append(
            _check(f"level1_coefficient_{name}", ok_target, fitted=fit.a1_hat, target=target)
        )
        min_exp = fit_cfg.get("min_remainder_exponent")
        if min_exp is not None:
            checks.append(
                _check(
                    f"remainder_exponent_{name}",
                    fit.remainder_exponent >= min_exp,
                    exponent=fit.remainder_exponent,
                    bound=min_exp,
                )
            )
        rows.append(
            (
                fit_cfg["kind"],
                fit_cfg["function"],
                fit.a0_hat,
                fit.a1_hat,
                fit.k_hat,
                fit.remainder_exponent,
                prediction.a0,
                prediction.a1,
                target,
                ok_target,
            )
        )
        details.append(
            {
                "kind": fit_cfg["kind"],
                "function": fit_cfg["function"],
                "fitted": {"a0": fit.a0_hat, "a1": fit.a1_hat, "k": fit.k_hat},
                "predicted": {"a0": prediction.a0, "a1": prediction.a1},
                "remainder_exponent": fit.remainder_exponent,
                "residual_norm": fit.residual_norm,
                "t_window": list(fit.t_window),
            }
        )

    first_point = _resolve_point(spec, p["fits"][0]["point"])
    t0, tail_rows = kernel_tail_bound(grid, first_point, t_samples)
    summary = {
        "fits": details,
        "checks": checks,
        "tail_bound": {"t0": t0, "rows": [list(row) for row in tail_rows]},
    }
    _write_csv(
        out_dir / "asymptotics_fits.csv",
        [
            "kind",
            "function",
            "a0_hat",
            "a1_hat",
            "k_hat",
            "remainder_exponent",
            "predicted_a0",
            "predicted_a1",
            "target_a1",
            "passed",
        ],
        rows,
    )
    _write_json(out_dir / "asymptotics_summary.json", summary)
    return ["asymptotics_fits.csv", "asymptotics_summary.json"], checks


def _cmd_mc_fdd(cfg, out_dir, seed):
    spec, grid = _build_manifold(cfg["manifold"])
    scaling = _build_scaling(cfg["scaling"])
    s, t = (float(v) for v in cfg["interval"])
    p = cfg["params"]
    if seed is None:
        raise InvalidConfig("mc_fdd requires a seed (config field or --seed)")
    partition = uniform_partition(s, t, int(p["n_steps"]))
    x0 = _node_index(grid, _resolve_point(spec, p["x0"]))
    functions = [resolve(spec, name) for name in p["functions"]]
    label = "*".join(p["functions"])
    report = fdd_estimate(
        grid,
        scaling,
        partition,
        x0,
        p["times"],
        functions,
        int(p["n_paths"]),
        int(seed),
        function_label=label,
    )
    max_z = float(p.get("max_z", 3.0))
    checks = [_check("z_score_within", report.z_score <= max_z, z=report.z_score, bound=max_z)]

    gap_rows = []
    for n in p.get("gap_n_list", []):
        part_n = uniform_partition(s, t, int(n))
        chain, diffusion = fdd_reference(grid, scaling, part_n, x0, p["times"], functions)
        gap_rows.append((int(n), chain, diffusion, abs(chain - diffusion)))
    if gap_rows:
        gaps = [row[3] for row in gap_rows]
        checks.append(_check("chain_diffusion_gap_decreasing", _strictly_decreasing(gaps), gaps=gaps))
        _write_csv(
            out_dir / "mc_fdd_gaps.csv", ["n_steps", "chain", "diffusion", "gap"], gap_rows
        )

    summary = {
        "report": {
            "times": list(report.times),
            "function": report.function_label,
            "mc_mean": report.mc_mean,
            "mc_stderr": report.mc_stderr,
            "chain_reference": report.chain_reference,
            "diffusion_reference": report.diffusion_reference,
            "z_score": report.z_score,
            "n_paths": report.n_paths,
            "seed": report.seed,
        },
        "checks": checks,
    }
    _write_json(out_dir / "mc_fdd_report.json", summary)
    outputs = ["mc_fdd_report.json"] + (["mc_fdd_gaps.csv"] if gap_rows else [])
    return outputs, checks


def _cmd_density(cfg, out_dir, seed):
    spec, grid = _build_manifold(cfg["manifold"])
    scaling = _build_scaling(cfg["scaling"])
    s, _t = (float(v) for v in cfg["interval"])
    p = cfg["params"]
    checks = []
    outputs = []
    summary = {}

    if "off_partition" in p:
        op_cfg = p["off_partition"]
        z = _resolve_point(spec, op_cfg["z"])
        mass = off_partition_normalization(
            grid,
            scaling,
            float(op_cfg["r"]),
            z,
            float(op_cfg["tau"]),
            float(op_cfg["t_i"]),
            int(op_cfg.get("box_points", 160)),
            float(op_cfg.get("box_widths", 6.0)),
        )
        tol = float(op_cfg["tol"])
        checks.append(_check("off_partition_mass_one", abs(mass - 1.0) <= tol, mass=mass, tol=tol))
        summary["off_partition_mass"] = mass

    if "shell" in p:
        sh = p["shell"]
        f = resolve(spec, sh["function"])
        x = _resolve_point(spec, sh["x"])
        rows, limit = shell_density_limit(
            grid, scaling, s, x, s + float(sh["h"]), sh["eps_list"], f
        )
        deviations = [abs(val - limit) for _, val in rows]
        checks.append(
            _check("shell_deviation_decreasing", _strictly_decreasing(deviations), deviations=deviations)
        )
        checks.append(
            _check(
                "shell_final_within",
                deviations[-1] <= float(sh["final_tol"]),
                final=deviations[-1],
                bound=float(sh["final_tol"]),
            )
        )
        _write_csv(
            out_dir / "density_shell.csv",
            ["eps", "expectation", "deviation"],
            [(eps, val, dev) for (eps, val), dev in zip(rows, deviations)],
        )
        outputs.append("density_shell.csv")
        summary["shell_limit"] = limit

    summary["checks"] = checks
    _write_json(out_dir / "density_summary.json", summary)
    outputs.append("density_summary.json")
    return outputs, checks


_COMMANDS = {
    "converge": _cmd_converge,
    "asymptotics": _cmd_asymptotics,
    "mc_fdd": _cmd_mc_fdd,
    "density": _cmd_density,
}


# ---------------------------------------------------------------------------
# run orchestration


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _run_single(cfg: dict, experiment: str, out_dir: Path, seed_override) -> bool:
    _validate_config(cfg, experiment)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = seed_override if seed_override is not None else cfg.get("seed")
    started = _utc_now()
    outputs, checks = _COMMANDS[experiment](cfg, out_dir, seed)
    passed = all(c["passed"] for c in checks)
    manifest = {
        "config": cfg,
        "tool_version": __version__,
        "backend": BACKEND,
        "seed": seed,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": outputs,
        "passed": passed,
        "checks": checks,
    }
    _write_json(out_dir / "manifest.json", manifest)
    return passed


def preset_names():
    root = importlib.resources.files("chernoff") / "presets"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    root = importlib.resources.files("chernoff") / "presets"
    return json.loads((root / name).read_text(encoding="utf-8"))


def _run_all(out_root: Path, seed_override, threads: int) -> int:
    names = preset_names()
    started = _utc_now()

    def run_one(name: str) -> bool:
        cfg = load_preset(name)
        return _run_single(cfg, cfg["experiment"], out_root / Path(name).stem, seed_override)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(names, pool.map(run_one, names)))
    else:
        results = {name: run_one(name) for name in names}
    manifest = {
        "tool_version": __version__,
        "backend": BACKEND,
        "seed": seed_override,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "presets": {Path(name).stem: passed for name, passed in results.items()},
        "passed": all(results.values()),
    }
    out_root.mkdir(parents=True, exist_ok=True)
    _write_json(out_root / "manifest.json", manifest)
    for name, passed in sorted(results.items()):
        print(f"{'PASS' if passed else 'FAIL'} {Path(name).stem}")
    return 0 if all(results.values()) else 4


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp, with_config: bool):
    if with_config:
        sp.add_argument("--config", required=True, help="experiment config (JSON)")
    sp.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${ENV_OUT} or ./chernoff-out)",
    )
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--threads", type=int, default=1, help="parallel experiments in a batch")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chernoff",
        description="Product-formula propagator experiments on the circle and sphere.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "converge": "partition-product convergence studies",
        "asymptotics": "short-time expansion fits",
        "mc-fdd": "Monte Carlo finite-dimensional distributions",
        "density-check": "conditioned-density normalization and shell limits",
    }
    for command, text in helps.items():
        _add_common(sub.add_parser(command, help=text), with_config=True)
    _add_common(
        sub.add_parser("run-all-presets", help="run every shipped preset"), with_config=False
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_root = Path(args.out or os.environ.get(ENV_OUT) or "chernoff-out")
    try:
        if args.command == "run-all-presets":
            return _run_all(out_root, args.seed, max(1, args.threads))
        experiment = _EXPERIMENT_BY_COMMAND[args.command]
        cfg = _load_config(args.config)
        passed = _run_single(cfg, experiment, out_root, args.seed)
        return 0 if passed else 4
    except ChernoffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
