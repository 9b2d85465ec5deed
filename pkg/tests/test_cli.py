import csv

import pytest
import yaml

from wkneading.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, yaml.safe_load(out) if out.strip() else None, err


def _csv_rows(path):
    lines = path.read_text().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


def test_validate(capsys):
    code, rep, _ = run(capsys, "validate", "tent")
    assert code == 0 and rep["status"] == "valid"


def test_validate_bad_file(capsys, tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("interval: [0, 1]\ncuts: [0.7, 0.3]\nbranches: [{slope: 1, intercept: 0}]\n")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    report = yaml.safe_load(err)
    assert report["error"] == "config" and "cuts" in report["message"]


def test_kneading_csv(capsys, tmp_path):
    code, rep, _ = run(capsys, "kneading", "tent", "-N", "8", "--out", str(tmp_path))
    assert code == 0
    assert rep["det_R"][:3] == [1, -1, -1]
    header, rows = _csv_rows(tmp_path / "det.csv")
    assert header.startswith("# det v1")
    assert [r["coeff"] for r in rows[:3]] == ["1", "-1", "-1"]
    assert (tmp_path / "theta_1_0.csv").exists()


def test_pressure_appendix_c_m100(capsys, tmp_path):
    code, rep, _ = run(capsys, "pressure", "appendix_c", "--param", "M=100", "--out", str(tmp_path))
    assert code == 0
    assert rep["t_star"] == pytest.approx(0.5, abs=1e-10)
    assert rep["pressure"] == pytest.approx(0.693147, abs=1e-6)
    assert rep["det_B_first_zero"] == pytest.approx(2 / 101, abs=1e-9)
    assert any("spurious" in w for w in rep["warnings"])
    header, rows = _csv_rows(tmp_path / "scan.csv")
    assert header.startswith("# scan v1") and len(rows) > 100


def test_zeta(capsys, tmp_path):
    code, rep, _ = run(capsys, "zeta", "tent", "--upto", "10", "--out", str(tmp_path))
    assert code == 0
    assert rep["N_n"][10] == 1023
    _, rows = _csv_rows(tmp_path / "nn.csv")
    assert rows[0] == {"n": "1", "N_n": "1"}


def test_check_tent(capsys):
    code, rep, _ = run(capsys, "check", "tent")
    assert code == 0 and rep["pass"]
    names = [c["check"] for c in rep["checks"]]
    assert "main kneading identity" in names and "F R - R'" in names
    assert all("max_residual" in c for c in rep["checks"])


def test_semiconj(capsys, tmp_path):
    code, rep, _ = run(capsys, "semiconj", "tent", "--t", "0.3", "--samples", "100",
                       "--out", str(tmp_path))
    assert code == 0 and rep["pass"]
    header, rows = _csv_rows(tmp_path / "phi.csv")
    assert header == "# phi v1: x,dir,value"
    assert len(rows) == 100


def test_semiconj_tail_failure_is_reported(capsys):
    code, _, err = run(capsys, "semiconj", "tent", "--t", "0.49", "--lap-n", "32")
    assert code == 1
    assert "increase N" in yaml.safe_load(err)["message"]


def test_model_critical(capsys, tmp_path):
    code, rep, _ = run(capsys, "model", "zero_weight", "--critical", "--out", str(tmp_path))
    assert code == 0
    assert rep["surviving"] == [0, 2]
    _, rows = _csv_rows(tmp_path / "model.csv")
    assert [r["degenerate"] for r in rows] == ["False", "True", "False"]


def test_cylinders(capsys, tmp_path):
    code, rep, _ = run(capsys, "cylinders", "tent", "--depth", "3", "--out", str(tmp_path))
    assert code == 0 and rep["count"] == [2, 4, 8]
    assert (tmp_path / "cylinders.csv").exists()


def test_emit_plots(capsys, tmp_path):
    code, rep, _ = run(capsys, "emit-plots", "discont_3_2", "--t", "0.2", "--points", "40",
                       "--out", str(tmp_path))
    assert code == 0
    for name in rep["files"]:
        assert (tmp_path / name).exists()


def test_output_is_deterministic(capsys):
    first = run(capsys, "check", "golden", "--seed", "3")
    second = run(capsys, "check", "golden", "--seed", "3")
    assert first == second
