"""Command-line interface: run configuration, file emission, benchmark suite.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.

Subcommands:
    run      single simulation (flags below)
    bench    run the published-data comparison suite
    verify   check an emitted run manifest's file hashes
"""

import argparse
import hashlib
import importlib.resources
import json
import logging
import sys
import time
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from . import __version__
from .driver import SimConfig, SimState, restore, run_simulation
from .errors import CheckpointError, ConfigError, ConformationError, SolverError, TimeStepError
from .postprocess import eigenvalue_fields, sample_cross_section
from .mesh import mesh_statistics

log = logging.getLogger("oldroydb")

# the three cross-section lines reported for the cavity benchmark
CROSS_SECTIONS = (
    ("horizontal", 1.0, "section_y1.csv"),
    ("horizontal", 0.75, "section_y075.csv"),
    ("vertical", 0.5, "section_x05.csv"),
)


def _parse_mesh_spec(spec):
    """Parse 'ratio:N[:gamma]' or 'quadratic:N' into config fields."""
    parts = spec.split(":")
    if parts[0] == "ratio" and len(parts) in (2, 3):
        out = {"mesh_type": "ratio", "mesh_n": int(parts[1])}
        if len(parts) == 3:
            out["mesh_gamma"] = float(parts[2])
        return out
    if parts[0] == "quadratic" and len(parts) == 2:
        return {"mesh_type": "quadratic", "mesh_n": int(parts[1])}
    raise ConfigError(
        f"invalid mesh spec {spec!r}: expected 'ratio:N[:gamma]' or 'quadratic:N'"
    )


def _mesh_spec_string(config: SimConfig):
    if config.mesh_type == "ratio":
        return f"ratio:{config.mesh_n}:{config.mesh_gamma}"
    return f"quadratic:{config.mesh_n}"


def _read_config_file(path):
    """Flat key=value file; blank lines and '#' comments ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key] = val
    return values


_CONFIG_FIELD_TYPES = {f.name: f.type for f in dc_fields(SimConfig)}


def _coerce(key, val):
    if key not in _CONFIG_FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    typ = _CONFIG_FIELD_TYPES[key]
    try:
        if typ == "bool" or typ is bool:
            return val if isinstance(val, bool) else val.lower() in ("1", "true", "yes")
        if typ == "int" or typ is int:
            return int(val)
        if typ == "float" or typ is float:
            return float(val)
        return str(val)
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {val!r}") from exc


def parse_config(args) -> SimConfig:
    """Resolve a SimConfig: flags override file values override defaults."""
    values = {}
    if getattr(args, "config", None):
        for key, val in _read_config_file(args.config).items():
            if key == "mesh":
                values.update(_parse_mesh_spec(val))
            else:
                values[key] = _coerce(key, val)
    flag_map = {
        "wi": "wi",
        "beta": "beta",
        "dt": "dt",
        "t_end": "t_end",
        "lid_profile": "lid_variant",
        "steady_tol": "steady_tol",
        "stop_when_steady": "stop_when_steady",
        "check_threshold": "check_threshold",
        "output_dir": "output_dir",
        "checkpoint_every": "checkpoint_every",
        "samples": "samples",
    }
    for flag, key in flag_map.items():
        val = getattr(args, flag, None)
        if val is not None:
            values[key] = val
    if getattr(args, "mesh", None):
        values.update(_parse_mesh_spec(args.mesh))
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write_vtk_rectilinear(path, state: SimState):
    """Legacy-VTK rectilinear grid with point data for u, p, conf, eigenvalues."""
    mesh = state.u.mesh
    lo_f, hi_f = eigenvalue_fields(state.conf)
    nv = mesh.n_vertices
    npts = mesh.n + 1
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("oldroydb cavity snapshot\n")
        fh.write("ASCII\nDATASET RECTILINEAR_GRID\n")
        fh.write(f"DIMENSIONS {npts} {npts} 1\n")
        fh.write(f"X_COORDINATES {npts} double\n")
        fh.write(" ".join(f"{v:.17g}" for v in mesh.x_coords) + "\n")
        fh.write(f"Y_COORDINATES {npts} double\n")
        fh.write(" ".join(f"{v:.17g}" for v in mesh.y_coords) + "\n")
        fh.write("Z_COORDINATES 1 double\n0\n")
        fh.write(f"POINT_DATA {nv}\n")
        fh.write("VECTORS velocity double\n")
        for u1, u2 in state.u.values:
            fh.write(f"{u1:.17g} {u2:.17g} 0\n")

        def scalar(name, arr):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.17g}" for v in arr) + "\n")

        scalar("pressure", state.p.values)
        scalar("sigma11", state.conf.values[:, 0])
        scalar("sigma12", state.conf.values[:, 1])
        scalar("sigma22", state.conf.values[:, 2])
        scalar("lambda_min", lo_f.values)
        scalar("lambda_max", hi_f.values)


def _write_cross_section_csv(path, state: SimState, axis, coordinate, n_samples):
    s, uvals = sample_cross_section(state.u, axis, coordinate, n_samples)
    _, pvals = sample_cross_section(state.p, axis, coordinate, n_samples)
    _, cvals = sample_cross_section(state.conf, axis, coordinate, n_samples)
    with open(path, "w") as fh:
        fh.write("s,u1,u2,p,sigma11,sigma12,sigma22\n")
        for k in range(len(s)):
            fh.write(
                f"{s[k]:.17g},{uvals[k, 0]:.17g},{uvals[k, 1]:.17g},{pvals[k]:.17g},"
                f"{cvals[k, 0]:.17g},{cvals[k, 1]:.17g},{cvals[k, 2]:.17g}\n"
            )


def _config_hash(config: SimConfig):
    canonical = json.dumps(config.as_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def metrics_document(config: SimConfig, state: SimState, metrics):
    """Deterministic metrics JSON document (no timestamps)."""
    doc = metrics.as_dict()
    doc.update(
        {
            "t": state.t,
            "step": state.step,
            "mesh": _mesh_spec_string(config),
            "config": config.as_dict(),
            "config_hash": _config_hash(config),
            "min_lambda_min_over_steps": _json_safe(
                state.diagnostics.get("min_lambda_min_over_steps")
            ),
            "max_clamp_distance_over_steps": state.diagnostics.get(
                "max_clamp_distance_over_steps"
            ),
            "steady_step": state.diagnostics.get("steady_step"),
        }
    )
    return doc


def _json_safe(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def _sha256(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def emit_fields(state: SimState, config: SimConfig, metrics, out_dir):
    """Write the VTK grid file, the three cross-section CSVs and metrics JSON.

    Returns the list of emitted file paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emitted = []
    vtk_path = out / "fields.vtk"
    _write_vtk_rectilinear(vtk_path, state)
    emitted.append(vtk_path)
    for axis, coord, name in CROSS_SECTIONS:
        path = out / name
        _write_cross_section_csv(path, state, axis, coord, config.samples)
        emitted.append(path)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(
        json.dumps(metrics_document(config, state, metrics), sort_keys=True, indent=2)
        + "\n"
    )
    emitted.append(metrics_path)
    return emitted


def write_manifest(out_dir, config: SimConfig, emitted, started, finished):
    manifest = {
        "version": __version__,
        "config": config.as_dict(),
        "config_hash": _config_hash(config),
        "started": started,
        "finished": finished,
        "files": {p.name: _sha256(p) for p in emitted},
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def verify_manifest(out_dir):
    """Re-hash emitted files against the manifest; returns mismatched names."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"no manifest.json in {out}")
    manifest = json.loads(manifest_path.read_text())
    bad = []
    for name, digest in manifest["files"].items():
        path = out / name
        if not path.exists() or _sha256(path) != digest:
            bad.append(name)
    return bad


def load_published_benchmarks():
    """Benchmark fixture rows shipped with the package."""
    raw = (
        importlib.resources.files("oldroydb")
        .joinpath("data/published_benchmarks.json")
        .read_text()
    )
    return json.loads(raw)["rows"]


def run_benchmark_suite(wi, mesh_specs, beta=0.5, dt=1e-3, t_end=None, out_dir="bench",
                        lid_variant="standard"):
    """Run each mesh configuration and tabulate against the published rows.

    Returns the report row dicts; also writes bench_report.csv and
    bench_report.md mirroring the published comparison layout.
    """
    published = load_published_benchmarks()
    rows = []
    for spec in mesh_specs:
        ref = next(
            (r for r in published if r["mesh"] == spec and r["wi"] == wi), None
        )
        snapshot_t = t_end if t_end is not None else (ref or {}).get("t_end") or 10.0
        row = {"wi": wi, "mesh": spec, "t_end": snapshot_t, "status": "ok"}
        try:
            config = SimConfig(
                wi=wi, beta=beta, dt=dt, t_end=snapshot_t, lid_variant=lid_variant,
                output_dir=out_dir, **_parse_mesh_spec(spec),
            )
            state, metrics = run_simulation(config)
            row.update(metrics.as_dict())
            if ref is not None:
                for key in ("max_ln_s11_midline", "max_s11_global"):
                    if ref.get(key):
                        row[f"published_{key}"] = ref[key]
                        row[f"reldiff_{key}"] = (row[key] - ref[key]) / ref[key]
                if ref.get("vortex_center"):
                    row["published_vortex_center"] = ref["vortex_center"]
        except (ConfigError, SolverError, TimeStepError, ConformationError) as exc:
            row["status"] = f"failed: {exc}"
        rows.append(row)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_bench_report(out, rows)
    return rows


def _write_bench_report(out, rows):
    cols = [
        "wi", "mesh", "t_end", "status", "max_ln_s11_midline", "published_max_ln_s11_midline",
        "reldiff_max_ln_s11_midline", "max_s11_global", "published_max_s11_global",
        "reldiff_max_s11_global", "vortex_center", "published_vortex_center",
    ]
    with open(out / "bench_report.csv", "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row.get(c)) for c in cols) + "\n")
    with open(out / "bench_report.md", "w") as fh:
        fh.write("| " + " | ".join(cols) + " |\n")
        fh.write("|" + "---|" * len(cols) + "\n")
        for row in rows:
            fh.write("| " + " | ".join(_cell(row.get(c)) for c in cols) + " |\n")


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "(" + " ".join(f"{x:.4g}" for x in v) + ")"
    return str(v).replace(",", ";")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="oldroydb",
        description="Semi-Lagrangian Oldroyd-B lid-driven cavity solver",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a single simulation")
    run_p.add_argument("--config", help="flat key=value config file")
    run_p.add_argument("--wi", type=float)
    run_p.add_argument("--beta", type=float)
    run_p.add_argument("--dt", type=float)
    run_p.add_argument("--t-end", dest="t_end", type=float)
    run_p.add_argument("--mesh", help="ratio:N[:gamma] or quadratic:N")
    run_p.add_argument("--lid-profile", dest="lid_profile",
                       choices=["standard", "as-printed"])
    run_p.add_argument("--steady-tol", dest="steady_tol", type=float)
    run_p.add_argument("--stop-when-steady", dest="stop_when_steady",
                       action="store_true", default=None)
    run_p.add_argument("--check-threshold", dest="check_threshold", type=float)
    run_p.add_argument("--output-dir", dest="output_dir")
    run_p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    run_p.add_argument("--resume", help="checkpoint file to restore and continue")
    run_p.add_argument("--samples", type=int)
    run_p.add_argument("--print-config", action="store_true",
                       help="echo the resolved configuration and exit")

    bench_p = sub.add_parser("bench", help="run the published-data comparison suite")
    bench_p.add_argument("--wi", type=float, required=True)
    bench_p.add_argument("--meshes", nargs="*", default=[],
                         help="mesh specs, e.g. ratio:90 ratio:120")
    bench_p.add_argument("--beta", type=float, default=0.5)
    bench_p.add_argument("--dt", type=float, default=1e-3)
    bench_p.add_argument("--t-end", dest="t_end", type=float)
    bench_p.add_argument("--output-dir", dest="output_dir", default="bench")

    verify_p = sub.add_parser("verify", help="verify an output manifest")
    verify_p.add_argument("output_dir")

    stats_p = sub.add_parser("mesh-stats", help="print mesh statistics")
    stats_p.add_argument("mesh", help="ratio:N[:gamma] or quadratic:N")
    return parser


def _cmd_run(args):
    config = parse_config(args)
    if args.print_config:
        print(json.dumps(config.as_dict(), sort_keys=True, indent=2))
        return 0
    resume_state = restore(args.resume) if args.resume else None
    started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    ckpt = Path(config.output_dir) / "checkpoint.bin" if config.checkpoint_every else None
    if ckpt is not None:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    state, metrics = run_simulation(config, resume_state=resume_state,
                                    checkpoint_path=ckpt)
    emitted = emit_fields(state, config, metrics, config.output_dir)
    if ckpt is not None and ckpt.exists():
        emitted.append(ckpt)
    finished = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    write_manifest(config.output_dir, config, emitted, started, finished)
    print(json.dumps(metrics.as_dict(), sort_keys=True))
    return 0


def _cmd_bench(args):
    rows = run_benchmark_suite(
        wi=args.wi, mesh_specs=args.meshes, beta=args.beta, dt=args.dt,
        t_end=args.t_end, out_dir=args.output_dir,
    )
    for row in rows:
        print(json.dumps(row, sort_keys=True, default=str))
    return 0


def _cmd_verify(args):
    bad = verify_manifest(args.output_dir)
    if bad:
        print("hash mismatch: " + ", ".join(bad))
        return 3
    print("manifest verified")
    return 0


def _cmd_mesh_stats(args):
    cfg = _parse_mesh_spec(args.mesh)
    config = SimConfig(**cfg)
    h_min, h_max, n_elem = mesh_statistics(config.build_mesh())
    print(json.dumps({"h_min": h_min, "h_max": h_max, "n_elements": n_elem}))
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    handlers = {
        "run": _cmd_run,
        "bench": _cmd_bench,
        "verify": _cmd_verify,
        "mesh-stats": _cmd_mesh_stats,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, TimeStepError, ConformationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
