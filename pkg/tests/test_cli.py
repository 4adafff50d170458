import io
import json
import subprocess
import sys

import pytest

from sfproot import __version__
from sfproot.cli import EXIT_COUNTEREXAMPLE, EXIT_ERROR, EXIT_OK, main, run


def call(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


def test_tables_unsieved():
    code, out = call("tables", "unsieved", "--alpha", "0.96", "--n-max", "200")
    assert code == EXIT_OK
    assert "a=10 b=25" in out.splitlines()


def test_tables_sieved():
    code, out = call("tables", "sieved", "--alpha", "0.90", "--n-max", "200")
    assert code == EXIT_OK and "{13}" in out.splitlines()
    code, out = call("tables", "sieved", "--alpha", "0.91", "--n-max", "200")
    assert code == EXIT_OK and "none" in out.splitlines()


def test_tables_csv():
    code, out = call("tables", "sieved", "--alpha", "0.90", "--n-max", "200", "--format", "csv", "--no-thresholds")
    lines = out.strip().splitlines()
    assert lines[0] == "alpha,stage,n,lower,dispatched,s,delta,threshold"
    row13 = next(line for line in lines if line.startswith("0.9,sieved,13,"))
    assert row13.split(",")[4] == "0"


def test_bounds_command():
    code, out = call("bounds", "--alpha", "0.9", "--p", "2.5e15", "--omega", "13")
    assert code == EXIT_OK
    vals = dict(line.split("=", 1) for line in out.splitlines())
    assert float(vals["c"]) == pytest.approx(0.2914, abs=5e-5)
    assert float(vals["G"]) < 0
    assert vals["p"] == "2500000000000000"
    assert call("bounds", "--alpha", "0.9", "--p", "2.5e15", "--term", "sf-lower") == (EXIT_OK, "0.0000147\n")
    code, out = call("bounds", "--alpha", "0.9", "--p", "2.5e15", "--n", "13", "--s", "10", "--term", "Gs")
    assert code == EXIT_OK and "sieving_primes=7,11,13,17,19,23,29,31,37,41" in out


def test_bounds_errors():
    assert call("bounds", "--alpha", "0.9", "--p", "50")[0] == EXIT_ERROR
    assert call("bounds", "--alpha", "0.9", "--p", "2.5555e2")[0] == EXIT_ERROR
    assert call("bounds", "--alpha", "0.9", "--p", "2.5e15", "--term", "G")[0] == EXIT_ERROR
    assert call("bounds", "--alpha", "0.5", "--p", "2.5e15")[0] == EXIT_ERROR
    assert call("bounds", "--alpha", "0.9", "--p", "abc")[0] == EXIT_ERROR


def test_verify_small():
    assert call("verify-small", "--limit", "7", "--alpha", "0.5")[0] == EXIT_COUNTEREXAMPLE
    assert call("verify-small", "--limit", "3", "--alpha", "0.631")[0] == EXIT_OK
    code, out = call("verify-small", "--limit", "7", "--alpha", "0.9", "-v")
    assert code == EXIT_OK and "p=7 g=3" in out
    assert call("verify-small", "--limit", "7", "--alpha", "1.5")[0] == EXIT_ERROR


def test_tree_command(tmp_path):
    report = tmp_path / "r.json"
    code, out = call("tree", "--alpha", "0.9", "--n", "4", "--upper-cap", "2e6",
                     "--set", "covered_below=1e6", "--set", "range_limit=50", "--report", str(report))
    assert code == EXIT_OK
    d = json.loads(report.read_text())
    assert d["alpha"] == 0.9 and d["config"]["covered_below"] == 10**6
    assert d["runs"][0]["counterexamples"] == []
    assert d["manifest"]["argv"][0] == "tree"
    assert "nodes_created=" in out


def test_tree_csv_and_stdout():
    code, out = call("tree", "--alpha", "0.9", "--n", "4", "--upper-cap", "1.1e6", "--set", "covered_below=1e6")
    assert code == EXIT_OK and json.loads(out)["runs"][0]["n"] == 4
    code, out = call("tree", "--alpha", "0.9", "--n", "3-4", "--upper-cap", "1.1e6",
                     "--set", "covered_below=1e6", "--format", "csv")
    assert out.splitlines()[0].startswith("n,nodes_created")
    assert len(out.splitlines()) == 3


def test_usage_errors():
    assert call("tree", "--alpha", "0.9", "--n", "x")[0] == EXIT_ERROR
    assert call("tree", "--alpha", "0.9", "--n", "4", "--threads", "0")[0] == EXIT_ERROR
    assert call("tables", "unsieved", "--set", "nope=1")[0] == EXIT_ERROR
    assert call("tables", "unsieved", "--set", "alpha")[0] == EXIT_ERROR
    assert call("nonsense")[0] == EXIT_ERROR
    assert call("tables", "unsieved", "--alpha", "0.9", "--n-max", "10")[0] == EXIT_ERROR
    assert call("--version")[0] == EXIT_OK


def test_env_override(monkeypatch):
    monkeypatch.setenv("SFPR_ALPHA", "0.96")
    assert "a=10 b=25" in run(["tables", "unsieved", "--n-max", "200", "--no-thresholds"])
    # the flag wins over the environment
    assert "a=8 b=36" in run(["tables", "unsieved", "--alpha", "0.9", "--n-max", "200", "--no-thresholds"])


def test_manifest_replay(tmp_path):
    man = tmp_path / "m.json"
    argv = ["tables", "sieved", "--alpha", "0.9", "--n-max", "200", "--manifest", str(man)]
    first = run(argv)
    data = json.loads(man.read_text())
    assert data["artifact_version"] == __version__
    assert data["config"]["alpha"] == 0.9
    assert "--manifest" not in data["argv"]
    assert run(["replay", str(man)]) == first


def test_replay_uses_stored_config(tmp_path, monkeypatch):
    man = tmp_path / "m.json"
    first = run(["tables", "unsieved", "--alpha", "0.96", "--n-max", "200", "--manifest", str(man)])
    monkeypatch.setenv("SFPR_COVERED_BELOW", "1e20")
    assert run(["replay", str(man)]) == first
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert call("replay", str(bad))[0] == EXIT_ERROR


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sfproot", "verify-small", "--limit", "3", "--alpha", "0.631"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("OK")
