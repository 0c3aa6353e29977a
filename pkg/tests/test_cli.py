import csv
import io
import json
import subprocess
import sys

import pytest

from qfinite.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_text(capsys):
    code, out, _ = run(capsys, "compute", "--identity", "r1", "--side", "lhs", "--n", "3", "--format", "text")
    assert code == 0
    assert out == "1 + q^2 - (z + z^-1)*q^3\n"


def test_compute_json_schema(capsys):
    code, out, _ = run(capsys, "compute", "--identity", "r2", "--side", "rhs", "--n", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["identity"] == "r2" and doc["n"] == 2 and doc["side"] == "rhs"
    assert doc["terms"] == [[0, 0, "1"], [0, 1, "1"], [-1, 2, "-1"], [0, 2, "1"], [1, 2, "-1"], [0, 4, "1"]]


def test_compute_csv(capsys):
    code, out, _ = run(capsys, "compute", "--identity", "r1partner", "--n", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["identity", "n", "side", "z_exp", "q_exp", "coeff"]
    assert rows[1:] == [["r1partner", "1", "lhs", "0", "0", "1"], ["r1partner", "1", "lhs", "-1", "1", "-1"]]


def test_env_format_and_flag_precedence(capsys, monkeypatch):
    monkeypatch.setenv("QFINITE_FORMAT", "json")
    code, out, _ = run(capsys, "compute", "--identity", "r1", "--n", "2")
    assert code == 0 and json.loads(out)["terms"] == [[0, 0, "1"], [0, 2, "1"]]
    code, out, _ = run(capsys, "compute", "--identity", "r1", "--n", "2", "--format", "text")
    assert out == "1 + q^2\n"
    monkeypatch.setenv("QFINITE_FORMAT", "yaml")
    code, _, err = run(capsys, "compute", "--identity", "r1", "--n", "2")
    assert code == 2 and "QFINITE_FORMAT" in err


def test_epsilon_and_arrf3(capsys):
    code, out, _ = run(capsys, "compute", "--identity", "r1", "--side", "epsilon", "--n", "0")
    assert (code, out) == (0, "1\n")
    code, out, _ = run(capsys, "compute", "--identity", "arrf3", "--side", "rhs", "--n", "1")
    assert (code, out) == (0, "1 + z*q\n")
    code, _, _ = run(capsys, "compute", "--identity", "arrf1", "--n", "1")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["compute", "--identity", "bogus", "--n", "3"],
    ["compute", "--identity", "r1"],
    ["compute", "--identity", "r1", "--n", "-1"],
    ["verify", "--max-n", "201"],
    ["series", "--check", "nope"],
    ["guess", "--identity", "r1", "--fit", "4:30"],
    ["guess", "--identity", "r1", "--order", "4", "--fit", "4:30", "--holdout", "31:40"],
    ["guess", "--identity", "r1", "--fit", "4:30", "--holdout", "20:40"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--identity", "r1", "--max-n", "12")
    assert code == 0
    assert out == "r1: pass (n = 0..12)\n"
    code, out, _ = run(capsys, "verify", "--identity", "arrf1", "--max-n", "4", "--format", "json")
    assert code == 0 and json.loads(out)[0]["status"] == "pass"


def test_verify_warns_above_60(capsys, monkeypatch):
    import qfinite.cli as cli

    calls = []
    monkeypatch.setattr(cli, "verify_identity", lambda ident, n: calls.append(n) or _Passing(ident, n))
    code, _, err = run(capsys, "verify", "--identity", "r2", "--max-n", "61")
    assert code == 0 and calls == [61]
    assert "warning" in err


class _Passing:
    def __init__(self, ident, n):
        self.ident, self.n = ident, n
        self.passed = True

    def to_dict(self):
        return {"identity": self.ident.value, "n_min": 0, "n_max": self.n, "status": "pass"}


def test_verify_mismatch_exit_code(capsys, monkeypatch):
    import qfinite.cli as cli
    from qfinite.identities import VerificationReport
    from qfinite.laurent import q

    def failing(ident, n):
        r = VerificationReport(ident, range(0, n + 1))
        r.fail(2, q**3, "lhs != rhs")
        return r

    monkeypatch.setattr(cli, "verify_identity", failing)
    code, out, _ = run(capsys, "verify", "--identity", "r1", "--max-n", "5")
    assert code == 1
    assert "first failure at n=2 (lhs != rhs): q^3" in out


def test_series(capsys):
    code, out, _ = run(capsys, "series", "--identity", "r1", "--order", "30", "--check", "jtp")
    assert code == 0 and out == "r1 jtp: pass (order 30)\n"
    code, out, _ = run(capsys, "series", "--identity", "r2", "--check", "limit", "--n", "12", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc[0]["status"] == "pass" and doc[0]["order"] >= 1
    code, out, _ = run(capsys, "series", "--check", "rr", "--order", "20")
    assert code == 0 and out.count("pass") == 3
    code, _, _ = run(capsys, "series", "--identity", "arrf3", "--check", "jtp")
    assert code == 2


def test_guess(capsys):
    argv = ["guess", "--identity", "r1partner", "--fit", "4:20", "--holdout", "21:28", "--format", "json"]
    code, out, _ = run(capsys, *argv)
    doc = json.loads(out)
    assert code == 0 and doc["certificate"] is True and len(doc["survivors"]) == 1
    code, out, _ = run(capsys, "guess", "--identity", "r1", "--order", "1", "--q-deg", "4", "--Q-deg", "1",
                       "--fit", "4:20", "--holdout", "21:25")
    assert code == 1 and "survivors: 0" in out


def test_determinism_and_output_file(capsys, tmp_path):
    argv = ["compute", "--identity", "r2", "--n", "9", "--format", "csv"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, *argv, "--output", str(target))
    assert code == 0 and out == ""
    assert target.read_text() == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qfinite", "compute", "--identity", "bogus", "--n", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "qfinite", "compute", "--identity", "r1", "--n", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "1 + q^2 - (z + z^-1)*q^3\n"
