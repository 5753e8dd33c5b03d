"""Command-line interface: exit codes, artifacts, and determinism."""

import json
import os
import subprocess
import sys

import pytest

from gpme.cli import main

TINY_RUN = {
    "preset": "heat_gaussian_1d",
    "problem": {"h": 0.5, "T": 0.1, "box_half_extent": 4.0},
    "diagnostics": {"R_list": [1.5], "save_stride": 4},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def last_err_record(capsys):
    captured = capsys.readouterr()
    return json.loads(captured.err.strip().splitlines()[-1]), captured.out


def test_run_writes_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["problem"]["h"] == 0.5
    assert len(report["run"]["times"]) >= 2
    assert (out / "field_00000.csv").exists()
    last = max(report["saved_knots"])
    assert (out / f"field_{last:05d}.csv").exists()
    eq_lines = (out / "equitightness.csv").read_text().splitlines()
    assert eq_lines[0] == "R,lhs,rhs,pass"
    assert len(eq_lines) == 2 and eq_lines[1].endswith(",true")


def test_run_dry_run_echoes_config_without_writing(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--dry-run"]) == 0
    echoed = json.loads(capsys.readouterr().out)
    assert echoed["problem"]["h"] == 0.5
    assert echoed["problem"]["phi"]["kind"] == "linear"
    assert not out.exists()


def test_missing_phi_is_a_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"problem": {
        "operator": {"c": 1},
        "initial": {"kind": "gaussian", "amplitude": 1.0, "spread": 0.25},
        "h": 0.5, "box_half_extent": 2.0, "T": 0.1,
    }})
    assert main(["run", "--config", cfg]) == 2
    record, _ = last_err_record(capsys)
    assert record["error"] == "configuration"
    assert record["field"] == "problem.phi"


def test_unknown_key_is_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"preset": "heat_gaussian_1d",
                               "problem": {"hh": 0.1}})
    assert main(["run", "--config", cfg]) == 2
    record, _ = last_err_record(capsys)
    assert "unknown key" in record["message"]


def test_unknown_preset_is_rejected(capsys):
    assert main(["run", "--config", "no_such_preset"]) == 2
    record, _ = last_err_record(capsys)
    assert record["error"] == "configuration"


def test_study_needs_two_levels(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TINY_RUN)
    assert main(["study", "--config", cfg, "--levels", "1"]) == 2
    record, _ = last_err_record(capsys)
    assert record["field"] == "levels"


def test_unknown_check_suite(capsys):
    assert main(["check", "no_such_suite"]) == 2


def test_check_moments_passes(capsys):
    assert main(["check", "moments"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out.splitlines()[-1]


def test_pole_measure_reports_offending_cell(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"problem": {
        "h": 0.5, "box_half_extent": 2.0,
        "operator": {"c": 0, "measure": {"kind": "custom", "form": "pole",
                                         "exponent": 1.5, "location": 0.75}},
    }})
    assert main(["stencil", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    record, _ = last_err_record(capsys)
    assert record["error"] == "runtime"
    assert "not integrable" in record["message"]
    assert record["cell"] == [1]


def test_stencil_dumps_laplacian_weights(tmp_path):
    cfg = write_cfg(tmp_path, {"problem": {
        "h": 0.5, "box_half_extent": 2.0, "operator": {"c": 1},
    }})
    out = tmp_path / "o"
    assert main(["stencil", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "stencil.csv").read_text().splitlines()
    assert rows[0] == "gamma_1,weight"
    body = sorted(tuple(r.split(",")) for r in rows[1:])
    assert body == [("-1", "4.0"), ("1", "4.0")]
    moments = json.loads((out / "moments.json").read_text())["moments"]
    assert moments["far_mass"] == 0.0


def test_report_json_identical_across_out_dirs(tmp_path):
    cfg = write_cfg(tmp_path, TINY_RUN)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(out_a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(out_b)]) == 0
    assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()


def test_thread_count_does_not_change_bytes(tmp_path):
    cfg = write_cfg(tmp_path, TINY_RUN)
    outs = {}
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        env = dict(os.environ, GPME_THREADS=threads)
        proc = subprocess.run(
            [sys.executable, "-c",
             "import sys; from gpme.cli import main; sys.exit(main(sys.argv[1:]))",
             "run", "--config", cfg, "--out", str(out)],
            env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs[threads] = (out / "report.json").read_bytes()
    assert outs["1"] == outs["4"]
