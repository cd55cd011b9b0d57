import json
import subprocess
import sys
from importlib import resources

import pytest

from heislab.cli import run
from heislab.formats import read_function, read_set, write_set
from heislab.lattice import LatticePoint, LatticeSet

DELTA = str(resources.files("heislab") / "data" / "delta.sfn")


def cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_classify(capsys):
    assert cli(capsys, "classify", "--k", 1, "--lambda", 0.6, "--p", 1.25, "--q", 2)[:2] == (0, "bounded_k1\n")
    code, out, _ = cli(capsys, "classify", "--k", 1, "--lambda", 0.7, "--p", 1, "--q", "1.1111111111", "--verbose")
    assert code == 0 and out.startswith("unbounded\ndeficit ")


def test_count_divisor(capsys):
    assert cli(capsys, "count", "--kind", "divisor", "--n", 12)[:2] == (0, "6\n")


def test_count_kinds(capsys, tmp_path):
    assert cli(capsys, "count", "--kind", "r2k", "--l", 5)[1] == "8\n"
    assert cli(capsys, "count", "--kind", "gauss", "--L", 25)[1].splitlines()[0] == "count 80"
    assert cli(capsys, "count", "--kind", "quadric", "--c", 2, "--band", "1,2", "--method", "brute")[1] == "16\n"
    s = tmp_path / "e.set"
    write_set(LatticeSet(1, [LatticePoint((0, 0), -2)]), s)
    assert cli(capsys, "count", "--kind", "Stilde", "--set", s, "--j", 0)[1] == "12\n"
    assert cli(capsys, "count", "--kind", "Stilde", "--set", s, "--j", 0, "--method", "pairs")[1] == "12\n"
    assert cli(capsys, "count", "--kind", "S", "--set", s, "--j", 0, "--y", "0,0,0")[0] == 0
    f = tmp_path / "f.set"
    write_set(LatticeSet(2, [LatticePoint((1, 0, 0, 0), 0)]), f)
    assert cli(capsys, "count", "--kind", "N2", "--x", "0,0,0,0,0", "--set", f, "--eset", f, "--j", 0)[1] == "0\n"
    assert cli(capsys, "count", "--kind", "N1", "--x", "1,0,0,0,0", "--set", f, "--j", 0)[0] == 0


def test_apply_delta_file(capsys, tmp_path):
    out = tmp_path / "out.sfn"
    code, _, _ = cli(capsys, "apply", "--input", DELTA, "--lambda", 0.5, "--mode", "full", "--box", "2,1", "--out", out)
    assert code == 0
    f = read_function(out)
    assert f[LatticePoint((1, 0), 0)] == 1.0
    assert f[LatticePoint((1, 0), 1)] == 0.0


def test_apply_stdout_and_json(capsys, tmp_path):
    code, out, _ = cli(capsys, "apply", "--input", DELTA, "--lambda", 0.5, "--mode", "dyadic", "--j", 0)
    assert code == 0 and len(out.splitlines()) == 8 and out.splitlines()[0].endswith(" 1")
    js = tmp_path / "o.json"
    cli(capsys, "apply", "--input", DELTA, "--lambda", 0.5, "--mode", "adjoint", "--j", 1, "--out", js)
    assert json.loads(js.read_text())["k"] == 1


def test_round_trip_through_cli(capsys, tmp_path):
    out = tmp_path / "o.sfn"
    cli(capsys, "apply", "--input", DELTA, "--lambda", 0.37, "--box", "3,2", "--out", out)
    f = read_function(out)
    again = tmp_path / "again.sfn"
    out2 = tmp_path / "o2.sfn"
    again.write_text(out.read_text())
    cli(capsys, "apply", "--input", DELTA, "--lambda", 0.37, "--box", "3,2", "--out", out2)
    assert read_function(out2) == f == read_function(again)


def test_norm(capsys, tmp_path):
    assert cli(capsys, "norm", "--input", DELTA, "--type", "lp", "--p", 3)[1] == "1\n"
    assert cli(capsys, "norm", "--input", DELTA, "--type", "weak", "--p", "inf")[1] == "1\n"
    assert cli(capsys, "norm", "--input", DELTA, "--type", "lorentz", "--p", 2)[0] == 2


def test_christ(capsys, tmp_path):
    s = tmp_path / "e.set"
    write_set(LatticeSet(1, [LatticePoint.origin(1)]), s)
    trace = tmp_path / "trace.json"
    code, out, _ = cli(capsys, "christ", "--set", s, "--alpha", 0.75, "--lambda", 0.3333333333333333, "--j", 0,
                       "--rmax", 1, "--trace", trace, "--verify")
    assert code == 0
    lines = out.splitlines()
    assert lines[1].split() == ["0.75", "0", "1", "8", "8", "6", "true"]
    assert lines[2].split() == ["0.75", "1", "1", "8", "8", "1.5", "true"]
    assert "verify sandwich=true" in out
    assert json.loads(trace.read_text())["levels"][1]["E"] == [{"n": [0, 0], "t": 0}]
    code, _, err = cli(capsys, "christ", "--set", s, "--alpha", 2, "--lambda", 0.5, "--j", 0)
    assert code == 1 and "EmptyInputError" in err
    assert cli(capsys, "christ", "--set", s, "--alpha-sweep", "--lambda", 0.5, "--j", 0)[0] == 0


def test_growth_and_manifest_replay(capsys, tmp_path):
    csv = tmp_path / "g.csv"
    man = tmp_path / "m.json"
    code, out, _ = cli(capsys, "growth", "--jmin", 0, "--jmax", 2, "--set-size", 30, "--box", 4, "--seed", 9,
                       "--csv", csv, "--manifest", man)
    assert code == 0 and out.startswith("slope ")
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("# seed=9") and lines[1] == "j,count,E_size,log2_ratio"
    m = json.loads(man.read_text())
    assert m["seed"] == 9 and m["subcommand"] == "growth" and str(csv) in m["outputs"]
    first = csv.read_bytes()
    csv.write_text("tampered\n")
    code, out, _ = cli(capsys, "replay", man)
    assert code == 0 and "replay ok" in out
    assert csv.read_bytes() == first


def test_replay_detects_changed_input(capsys, tmp_path):
    s = tmp_path / "e.set"
    write_set(LatticeSet(1, [LatticePoint((0, 0), -2)]), s)
    man = tmp_path / "m.json"
    assert cli(capsys, "count", "--kind", "Stilde", "--set", s, "--j", 0, "--manifest", man)[0] == 0
    assert json.loads(man.read_text())["inputs"][str(s)]
    write_set(LatticeSet(1, [LatticePoint((0, 0), 0)]), s)
    code, _, err = cli(capsys, "replay", man)
    assert code == 1 and "changed" in err


def test_sharpness(capsys, tmp_path):
    csv = tmp_path / "s.csv"
    js = tmp_path / "s.json"
    code, out, _ = cli(capsys, "sharpness", "--experiment", "box", "--lambda", 0.5, "--p", 2, "--q", 4,
                       "--tmax-list", "10,20,40", "--epsilon", 0.05, "--csv", csv, "--json", js)
    assert code == 0 and "classification" in out
    assert csv.read_text().splitlines()[1] == "t_max,f_norm,Tf_norm,ratio"
    assert len(json.loads(js.read_text())["rows"]) == 3
    code, out, _ = cli(capsys, "sharpness", "--experiment", "delta", "--lambda", 0.6, "--q", 2, "--R-list", "1")
    assert out.splitlines()[:2] == ["R,partial_sum", "1,4"] and out.endswith("verdict convergent\n")
    code, _, err = cli(capsys, "sharpness", "--experiment", "box", "--lambda", 0.5, "--p", 2, "--q", 4,
                       "--tmax-list", "0")
    assert code == 1 and "EmptyInputError" in err


def test_usage_errors(capsys):
    assert cli(capsys, "bogus")[0] == 2
    assert cli(capsys, "classify", "--k", 1, "--lambda", 0.5, "--p", 2, "--q", 3, "--nope")[0] == 2
    assert cli(capsys, "count", "--kind", "divisor")[0] == 2
    assert cli(capsys, "apply", "--input", DELTA, "--lambda", 0.5)[0] == 2  # full mode without --box
    assert cli(capsys, "count", "--kind", "quadric", "--c", 2, "--band", "1,2", "--method", "lines")[0] == 2


def test_computational_errors(capsys, tmp_path, monkeypatch):
    code, _, err = cli(capsys, "count", "--kind", "divisor", "--n", 0)
    assert code == 1 and "ValueError" in err
    bad = tmp_path / "bad.sfn"
    bad.write_text("k 1\n1 2\n")
    code, _, err = cli(capsys, "norm", "--input", bad, "--p", 2)
    assert code == 1 and "FormatError" in err
    monkeypatch.setenv("HEISLAB_BUDGET", "10")
    code, _, err = cli(capsys, "apply", "--input", DELTA, "--lambda", 0.5, "--box", "5,5")
    assert code == 1 and "BudgetExceededError" in err and "HEISLAB_BUDGET" in err


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "heislab.cli", "count", "--kind", "divisor", "--n", "97"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "2\n"
    res = subprocess.run([sys.executable, "-m", "heislab.cli", "--bad"], capture_output=True, text=True)
    assert res.returncode == 2


def test_set_file_round_trip(tmp_path):
    s = LatticeSet(1, [LatticePoint((3, -1), 7), LatticePoint((0, 0), 0)])
    for name in ("s.set", "s.json"):
        write_set(s, tmp_path / name)
        assert read_set(tmp_path / name) == s


@pytest.mark.parametrize("flag", ["--version"])
def test_version(capsys, flag):
    assert run([flag]) == 0
    assert "heislab" in capsys.readouterr().out
