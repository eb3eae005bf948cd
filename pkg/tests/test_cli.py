import json
import subprocess
import sys

import pytest

from gate_teleport.cli import main
from gate_teleport.config import OUTPUT_DIR_ENV, RunConfig


def write_config(path, **fields):
    path.write_text(json.dumps(fields))
    return path


def test_verify_passes(capsys):
    assert main(["verify", "--inputs", "20", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["inputs_checked"] == 36
    assert report["featured_output_fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_usage_errors(capsys, tmp_path):
    assert main(["verify", "--inputs", "0"]) == 2
    assert main(["simulate", "--counts", "-5", "--out", str(tmp_path)]) == 2
    bad = write_config(tmp_path / "bad.json", input_label="XX")
    assert main(["simulate", "--config", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_missing_config_is_io_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 3


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", "--out", str(blocker / "sub")]) == 3


def test_report_on_empty_directory(tmp_path):
    assert main(["report", str(tmp_path)]) == 3
    assert main(["report", str(tmp_path / "missing")]) == 3


def test_simulate_then_tomo_state(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["simulate", "--out", out, "--seed", "2"]) == 0
    assert sorted(p.name for p in tmp_path.glob("counts_RR_*.csv")) == [
        "counts_RR_D1D3.csv", "counts_RR_D1D4.csv", "counts_RR_D2D3.csv", "counts_RR_D2D4.csv"]
    capsys.readouterr()
    assert main(["tomo-state", "--out", out]) == 0
    artifact = json.loads(capsys.readouterr().out)
    assert artifact["f_s"] > 0.95 and artifact["entangled"] is True
    assert (tmp_path / "state_RR.json").exists()


def test_tomo_state_from_explicit_json_files(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["simulate", "--out", out]) == 0
    files = [str(p) for p in sorted(tmp_path.glob("counts_RR_*.json"))]
    capsys.readouterr()
    assert main(["tomo-state", "--out", out, *files]) == 0
    assert json.loads(capsys.readouterr().out)["f_s"] > 0.95


def test_exact_mode(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["simulate", "--exact", "--out", out]) == 0
    assert (tmp_path / "probabilities_RR.csv").exists()
    capsys.readouterr()
    assert main(["tomo-state", "--exact", "--out", out]) == 0
    assert json.loads(capsys.readouterr().out)["f_s"] == pytest.approx(1.0, abs=1e-9)


def test_tomo_state_without_data(tmp_path):
    assert main(["tomo-state", "--out", str(tmp_path)]) == 3


def test_reconstruction_failure(tmp_path):
    table = tmp_path / "zeros.csv"
    table.write_text("setting_q1,setting_q4,detector_pair,count\nH,H,D1D4,0\n")
    assert main(["tomo-state", "--out", str(tmp_path), str(table)]) == 4


def test_simulation_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["simulate", "--out", str(d), "--seed", "5", "--counts", "1e6"]) == 0
    for f in a.glob("counts_*"):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_full_pipeline_and_report(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", noise={"epr_visibility": 0.982, "mz_visibility_12": 0.85,
                                                     "mz_visibility_3": 0.85}, output_dir=str(tmp_path / "run"))
    assert main(["tomo-process", "--config", str(cfg), "--workers", "2"]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "run")]) == 0
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    for key in ("f_s_rr", "f_s_hh", "f_s_hv", "f_s_vh", "f_s_vv", "f_p", "f_bar", "witness_rr_entangled", "config"):
        assert key in summary
    assert len(summary["states"]) == 16
    first = (tmp_path / "run" / "chi.json").read_bytes()
    assert main(["tomo-process", "--config", str(cfg)]) == 0
    assert (tmp_path / "run" / "chi.json").read_bytes() == first


def test_custom_input_config(tmp_path, capsys):
    s = 0.5
    cfg = write_config(tmp_path / "cfg.json", input_label="custom", exact=True, output_dir=str(tmp_path),
                       amplitudes=[[s, 0], [0, s], [s, 0], [0, s]])
    assert main(["simulate", "--config", str(cfg)]) == 0
    capsys.readouterr()
    assert main(["tomo-state", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["f_s"] == pytest.approx(1.0, abs=1e-9)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert RunConfig.load(None).output_dir == tmp_path / "env"
    monkeypatch.delenv(OUTPUT_DIR_ENV)
    assert RunConfig.load(None).output_dir.name == "runs"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gate_teleport", "verify", "--inputs", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"]
