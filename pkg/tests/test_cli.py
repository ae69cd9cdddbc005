import json
from pathlib import Path

import numpy as np
import pytest

from oldroydb import SimConfig, run_simulation
from oldroydb.cli import (
    emit_fields,
    load_published_benchmarks,
    main,
    metrics_document,
    parse_config,
    run_benchmark_suite,
    verify_manifest,
)
from oldroydb.errors import ConfigError

TINY_ARGS = ["--mesh", "ratio:10:0.9", "--dt", "2e-3", "--t-end", "0.05"]


class Args:
    """Minimal stand-in for parsed argparse flags."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def test_parse_config_defaults():
    config = parse_config(Args())
    assert config == SimConfig()


def test_parse_config_flags_override_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("wi = 0.7  # with a comment\nmesh = quadratic:16\ndt=5e-3\n\n")
    config = parse_config(Args(config=str(cfg), wi=0.9))
    assert config.wi == 0.9  # flag wins
    assert config.mesh_type == "quadratic" and config.mesh_n == 16
    assert config.dt == 5e-3


def test_parse_config_rejects_bad_input(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("this is not key value\n")
    with pytest.raises(ConfigError):
        parse_config(Args(config=str(bad)))
    bad.write_text("unknown_key=3\n")
    with pytest.raises(ConfigError):
        parse_config(Args(config=str(bad)))
    with pytest.raises(ConfigError):
        parse_config(Args(mesh="hexagonal:9"))


def test_published_benchmark_fixture():
    rows = load_published_benchmarks()
    row = next(r for r in rows if r["mesh"] == "ratio:90" and r["wi"] == 0.5)
    assert row["max_ln_s11_midline"] == 5.76
    assert row["max_s11_global"] == 351.21
    assert row["vortex_center"] == [0.466, 0.799]


def test_emit_fields_and_manifest(tmp_path):
    config = SimConfig(mesh_n=10, mesh_gamma=0.9, dt=2e-3, t_end=0.05, samples=16,
                       output_dir=str(tmp_path))
    state, metrics = run_simulation(config)
    emitted = emit_fields(state, config, metrics, tmp_path)
    names = {p.name for p in emitted}
    assert names == {"fields.vtk", "section_y1.csv", "section_y075.csv",
                     "section_x05.csv", "metrics.json"}
    header = (tmp_path / "section_x05.csv").read_text().splitlines()[0]
    assert header == "s,u1,u2,p,sigma11,sigma12,sigma22"
    vtk = (tmp_path / "fields.vtk").read_text()
    assert vtk.startswith("# vtk DataFile Version 3.0")
    assert "VECTORS velocity double" in vtk

    doc = json.loads((tmp_path / "metrics.json").read_text())
    assert doc["max_s11_global"] == metrics.max_s11_global
    assert doc["config"]["mesh_n"] == 10
    # the document must be byte-deterministic across identical runs
    state2, metrics2 = run_simulation(config)
    doc2 = metrics_document(config, state2, metrics2)
    assert json.dumps(doc2, sort_keys=True) == json.dumps(
        metrics_document(config, state, metrics), sort_keys=True
    )


def test_cli_run_and_verify(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["run", *TINY_ARGS, "--samples", "16", "--output-dir", str(out)])
    assert rc == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    printed = json.loads(last)
    assert "max_ln_s11_midline" in printed
    assert (out / "manifest.json").exists()
    assert verify_manifest(out) == []
    assert main(["verify", str(out)]) == 0

    # tampering with an emitted file must fail verification
    path = out / "metrics.json"
    path.write_text(path.read_text().replace("max", "mux"))
    assert main(["verify", str(out)]) == 3


def test_cli_print_config(capsys):
    rc = main(["run", *TINY_ARGS, "--print-config"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mesh_n"] == 10 and doc["dt"] == 2e-3


def test_cli_bad_config_exit_code(capsys):
    assert main(["run", "--mesh", "ratio:9"]) == 2
    assert main(["run", "--wi", "-2"]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    rc = main(["run", *TINY_ARGS, "--t-end", "2.0", "--check-threshold", "1e-3",
               "--output-dir", str(tmp_path / "x")])
    assert rc == 3


def test_cli_mesh_stats(capsys):
    assert main(["mesh-stats", "ratio:90"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_elements"] == 8100
    assert float(f"{doc['h_min']:.2g}") == 0.0039


def test_cli_resume_matches_full_run(tmp_path, capsys):
    out1 = tmp_path / "full"
    out2 = tmp_path / "part"
    assert main(["run", *TINY_ARGS, "--t-end", "0.1", "--samples", "16",
                 "--output-dir", str(out1)]) == 0
    assert main(["run", *TINY_ARGS, "--samples", "16", "--checkpoint-every", "25",
                 "--output-dir", str(out2)]) == 0
    rc = main(["run", *TINY_ARGS, "--t-end", "0.1", "--samples", "16",
               "--resume", str(out2 / "checkpoint.bin"), "--output-dir", str(out2)])
    assert rc == 0
    m1 = json.loads((out1 / "metrics.json").read_text())
    m2 = json.loads((out2 / "metrics.json").read_text())
    for key in ("max_ln_s11_midline", "max_s11_global", "vortex_center"):
        assert m1[key] == m2[key]


def test_benchmark_suite_tiny(tmp_path):
    # suite plumbing on a non-published mesh spec: runs, writes reports,
    # and keeps going even without a matching reference row
    rows = run_benchmark_suite(wi=0.5, mesh_specs=["ratio:10:0.9"], dt=2e-3,
                               t_end=0.05, out_dir=str(tmp_path))
    assert rows[0]["status"] == "ok"
    assert "max_s11_global" in rows[0]
    report = (tmp_path / "bench_report.csv").read_text().splitlines()
    assert report[0].startswith("wi,mesh,t_end,status")
    assert len(report) == 2
    assert (tmp_path / "bench_report.md").exists()


def test_benchmark_suite_records_failures(tmp_path):
    rows = run_benchmark_suite(wi=0.5, mesh_specs=["ratio:9"], out_dir=str(tmp_path))
    assert rows[0]["status"].startswith("failed:")
