"""CLI contract: exit codes, CSV/JSON schemas, determinism, round trips."""

import csv
import io
import json
import re

from mpmath import mp

import pv5lab
from pv5lab.cli import run
from pv5lab.report import SCHEMA, load_report

ROW_KEYS = ["id", "tier", "n", "t", "z", "residual", "pass"]


def _run(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_moments_trivial_row(capsys):
    code, out, _ = _run(capsys, "moments", "--alpha", "0", "--k2", "-1",
                        "--t", "0", "--n-max", "1", "--bits", "128",
                        "--rel-tol", "1e-18")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["j", "mu_j"]
    assert abs(mp.mpf(rows[1][1]) - 2) < mp.mpf("1e-15")
    assert mp.mpf(rows[2][1]) == 0  # odd moment exact zero


def test_recurrence_and_ladder_tables(capsys, tmp_path):
    code, out, _ = _run(capsys, "recurrence", "--alpha", "1", "--k2", "-1",
                        "--t", "0", "--n-max", "2", "--bits", "128",
                        "--rel-tol", "1e-18")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "h_n", "beta_n", "p_n"]
    assert abs(mp.mpf(rows[2][2]) - mp.mpf(1) / 5) < mp.mpf("1e-12")

    out_csv = tmp_path / "ladder.csv"
    code, _, _ = _run(capsys, "ladder", "--alpha", "1", "--k2", "-1", "--t", "0",
                      "--n-max", "1", "--bits", "128", "--rel-tol", "1e-18",
                      "--out-csv", str(out_csv))
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["n", "R_n", "r_n", "a_n", "b_n"]
    assert abs(mp.mpf(rows[1][3]) - 3) < mp.mpf("1e-12")


def test_verify_required_suite_exit_zero(capsys, tmp_path):
    out_json = tmp_path / "report.json"
    code, _, err = _run(capsys, "verify", "--alpha", "1", "--k2", "0.25",
                        "--t", "0.5", "--n-max", "3", "--bits", "160",
                        "--rel-tol", "1e-25", "--suite", "required",
                        "--z-count", "4", "--out-json", str(out_json))
    assert code == 0, err
    doc = json.loads(out_json.read_text())
    assert doc["schema"] == SCHEMA
    assert doc["summary"]["required_pass"] is True
    assert doc["checks"], "no checks emitted"
    for row in doc["checks"]:
        assert list(row.keys()) == ROW_KEYS


def test_verify_k2_zero_diagnostic_exits_two(capsys):
    code, _, err = _run(capsys, "verify", "--alpha", "1", "--k2", "0",
                        "--t", "0.5", "--n-max", "3", "--bits", "160",
                        "--rel-tol", "1e-25", "--suite", "diagnostic")
    assert code == 2
    # the offending checks are named
    assert "PV_PHI" in err and "BETA_EXPR" in err


def test_verify_conflicting_t_flags_exit_two(capsys):
    code, _, err = _run(capsys, "verify", "--alpha", "1", "--k2", "0.25",
                        "--t", "0.5", "--t-start", "0.1", "--t-stop", "1",
                        "--t-count", "3")
    assert code == 2


def test_verify_rejects_bad_params(capsys):
    code, _, err = _run(capsys, "verify", "--alpha", "1", "--k2", "1.5",
                        "--t", "0.5")
    assert code == 2
    assert "k2" in err


def test_verify_determinism_modulo_timestamp(capsys, tmp_path):
    argv = ["verify", "--alpha", "1", "--k2", "0.25", "--t", "0.5",
            "--n-max", "3", "--bits", "160", "--rel-tol", "1e-25",
            "--suite", "all", "--z-count", "3", "--seed", "11"]
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert _run(capsys, *argv, "--out-json", str(p1))[0] == 0
    assert _run(capsys, *argv, "--out-json", str(p2))[0] == 0
    pat = re.compile(rb'"timestamp": "[^"]*"')
    b1 = pat.sub(b'"timestamp": "X"', p1.read_bytes())
    b2 = pat.sub(b'"timestamp": "X"', p2.read_bytes())
    assert b1 == b2


def test_report_roundtrip_preserves_residuals(capsys, tmp_path):
    out_json = tmp_path / "report.json"
    argv = ["verify", "--alpha", "1", "--k2", "-0.5", "--t", "0.5",
            "--n-max", "2", "--bits", "160", "--rel-tol", "1e-25",
            "--suite", "required", "--z-count", "2",
            "--out-json", str(out_json)]
    assert _run(capsys, *argv)[0] == 0
    doc1 = load_report(out_json, bits=160)
    doc2 = load_report(out_json, bits=160)
    v1 = [r.get("residual_value") for r in doc1["checks"]]
    v2 = [r.get("residual_value") for r in doc2["checks"]]
    assert v1 == v2 and any(v is not None for v in v1)


def test_verify_csv_table(capsys, tmp_path):
    out_csv = tmp_path / "checks.csv"
    argv = ["verify", "--alpha", "1", "--k2", "-0.5", "--t", "0.5",
            "--n-max", "2", "--bits", "160", "--rel-tol", "1e-25",
            "--suite", "required", "--z-count", "2", "--out-csv", str(out_csv)]
    assert _run(capsys, *argv)[0] == 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ROW_KEYS
    assert len(rows) > 1


def test_pv_residual_trajectory_schema(capsys, tmp_path):
    out_csv = tmp_path / "pv.csv"
    code, _, err = _run(capsys, "pv-residual", "--alpha", "1", "--k2", "-0.5",
                        "--n", "1", "--n-max", "2", "--bits", "160",
                        "--rel-tol", "1e-25", "--t-start", "0.4", "--t-stop", "0.6",
                        "--t-count", "2", "--t-spacing", "linear",
                        "--out-csv", str(out_csv))
    assert code == 0, err
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "R_n", "r_n", "beta_n", "phi_n", "pv_residual"]
    assert len(rows) == 3
    for row in rows[1:]:
        assert all(mp.isfinite(mp.mpf(cell)) for cell in row)


def test_ode_trajectory_csv(capsys, tmp_path):
    out_csv = tmp_path / "traj.csv"
    code, _, err = _run(capsys, "ode", "--alpha", "1", "--k2", "0.04",
                        "--n", "2", "--t0", "0.5", "--t1", "0.52",
                        "--n-max", "3", "--bits", "160", "--rel-tol", "1e-25",
                        "--samples", "4", "--out-csv", str(out_csv))
    assert code == 0, err
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "R_n", "r_n", "beta_n", "phi_n", "pv_residual"]
    assert len(rows) == 5


def test_ode_singularity_exit_three(capsys, tmp_path):
    code, _, err = _run(capsys, "ode", "--alpha", "1", "--k2", "0.04",
                        "--n", "2", "--t0", "0.5", "--t1", "1.0",
                        "--n-max", "3", "--bits", "160", "--rel-tol", "1e-25",
                        "--out-csv", str(tmp_path / "t.csv"))
    assert code == 3
    assert "numerical failure" in err


def test_log_grid_requires_positive_start(capsys):
    code, _, err = _run(capsys, "verify", "--alpha", "1", "--k2", "0.25",
                        "--t-start", "0", "--t-stop", "1", "--t-count", "3",
                        "--t-spacing", "log")
    assert code == 2


def test_pv5_threads_validation(capsys, monkeypatch):
    monkeypatch.setenv("PV5_THREADS", "zero")
    code, _, err = _run(capsys, "moments", "--alpha", "0", "--k2", "-1",
                        "--t", "0", "--n-max", "0", "--bits", "128",
                        "--rel-tol", "1e-18")
    assert code == 2
    monkeypatch.setenv("PV5_THREADS", "2")
    code, _, _ = _run(capsys, "moments", "--alpha", "0", "--k2", "-1",
                      "--t", "0", "--n-max", "0", "--bits", "128",
                      "--rel-tol", "1e-18")
    assert code == 0
