import json
import os
import subprocess
import sys

import pytest

from dirwalk.cli import run


def call(args, capsys):
    code = run(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip(text):
    doc = json.loads(text)
    doc.pop("timestamp")
    return doc


def test_limit_pass_and_csv(tmp_path, capsys):
    csv_path = tmp_path / "rows.csv"
    code, out, _ = call(
        ["limit", "--ensemble", "cyclic", "--d", "3", "--replicates", "3000", "--seed", "7", "--csv", str(csv_path)],
        capsys,
    )
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["converged"] == 3000
    assert doc["config"]["seed"] == 7 and "threads" not in doc["config"]
    assert max(abs(x - 2) for x in doc["t_hat"]) < 0.3
    lines = csv_path.read_bytes().decode().split("\r\n")
    assert lines[0] == "c1,c2,c3" and len(lines) == 3002


def test_limit_identity_reports_non_convergence(tmp_path, capsys):
    path = tmp_path / "identity.json"
    path.write_text(json.dumps([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    code, out, _ = call(["limit", "--ensemble", f"file:{path}", "--replicates", "20", "--max-n", "200"], capsys)
    doc = json.loads(out)
    assert code == 1 and doc["converged"] == 0 and not doc["pass"]


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"ensemble": "leader", "d": 3, "replicates": 2000, "seed": 1}))
    code, out, _ = call(["limit", "--config", str(cfg), "--seed", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["config"]["seed"] == 2 and doc["config"]["ensemble"] == "leader"


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("DIRWALK_SEED", "99")
    _, out, _ = call(["sample", "--ensemble", "cyclic", "--d", "2", "--n", "1"], capsys)
    assert json.loads(out)["config"]["seed"] == 99


def test_check_verdicts(capsys):
    code, out, _ = call(["check", "--ensemble", "cyclic", "--d", "3", "--samples", "20000", "--trials", "2000"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["m_star"] == 2 and doc["c1"]["pass"]
    code, out, _ = call(
        ["check", "--ensemble", "dirichlet", "--A", "[[2,0],[1,1]]", "--t", "2,2", "--samples", "20000", "--trials", "500"],
        capsys,
    )
    assert code == 1 and not json.loads(out)["c1"]["pass"]


def test_pushforward_commands(capsys):
    code, out, _ = call(["pushforward", "--A", "[[1,2],[3,1]]", "--t", "3,4", "--s", "4,3", "--samples", "50000"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["agree"]
    code, out, _ = call(
        ["pushforward", "--A", "[[1,1,1],[1,1,1]]", "--t", "3,3", "--s", "2,2,2", "--samples", "50000"], capsys
    )
    assert code == 0
    code, _, err = call(["pushforward", "--A", "[[1,2],[3,1]]", "--t", "3,4", "--s", "4,4"], capsys)
    assert code == 2 and "SumMismatch" in err


def test_apps(capsys):
    code, out, _ = call(["apps", "exchange", "--ensemble", "cyclic", "--d", "3", "--t", "2,2,2"], capsys)
    assert code == 0
    code, out, _ = call(["apps", "polling", "--ensemble", "cyclic", "--d", "3", "--r", "1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["beta"] == [1.0, 2.0, 1.0]
    code, out, _ = call(["apps", "simplices", "--ensemble", "dirichlet", "--A", "ones2x2", "--runs", "5000"], capsys)
    doc = json.loads(out)
    assert code == 0 and max(abs(x - 2) for x in doc["t_hat"]) < 0.2


@pytest.mark.parametrize(
    "args",
    [
        ["limit"],
        ["limit", "--ensemble", "cyclic"],
        ["limit", "--ensemble", "nope", "--d", "3"],
        ["limit", "--ensemble", "dirichlet", "--A", "ones2"],
        ["check", "--ensemble", "cyclic", "--d", "3", "--t", "1,x"],
        ["apps", "polling", "--ensemble", "cyclic", "--d", "3", "--r", "9"],
        ["bogus"],
        ["limit", "--config", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_two(args, capsys):
    code, _, _ = call(args, capsys)
    assert code == 2


def test_report_is_deterministic(capsys):
    args = ["apps", "polling", "--ensemble", "cyclic", "--d", "3", "--samples", "3000", "--seed", "5"]
    _, a, _ = call(args, capsys)
    _, b, _ = call(args, capsys)
    assert strip(a) == strip(b)


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "dirwalk", "sample", "--ensemble", "leader", "--d", "3", "--n", "2"],
        capture_output=True,
        text=True,
        env=dict(os.environ),
    )
    assert out.returncode == 0
    assert len(json.loads(out.stdout)["draws"]) == 2
