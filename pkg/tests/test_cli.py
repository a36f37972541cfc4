import json
import subprocess
import sys
from pathlib import Path

import pytest

from relcluster.cli import main

ROOT = Path(__file__).resolve().parents[1]
SPECS = sorted((ROOT / "specs").glob("*.spec"))

GOOD = """\
ambient A = A(x, y)
ideal I in A = x^2, x*y
ideal J in A = x
blowup B = A at I
query saturate I : J
query blowup B
"""

QUERY_ERROR = """\
ambient A = A(x, y)
ideal X in A = x
ideal C in A = y
ideal Z in A = y - 1
blowup B = X at C
query strict B : Z
query gb X
"""


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="t.spec"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_exit_codes(tmp_path, capsys):
    code, out, _ = run(["run", write(tmp_path, GOOD)], capsys)
    assert code == 0
    report = json.loads(out)
    assert [r["status"] for r in report["results"]] == ["ok", "ok"]
    assert report["results"][0]["result"] == {"exponent": 2, "ideal": ["1"]}

    code, out, _ = run(["run", write(tmp_path, QUERY_ERROR)], capsys)
    assert code == 2
    statuses = [r["status"] for r in json.loads(out)["results"]]
    assert statuses == ["error", "ok"]

    path = write(tmp_path, "ambient P = P(u, v)\nquery image nope\n")
    code, out, err = run(["run", path], capsys)
    assert code == 1 and out == ""
    assert err.strip() == f"{path}:2:13: undeclared name 'nope'"

    code, _, err = run(["run", str(tmp_path / "missing.spec")], capsys)
    assert code == 1 and "cannot read" in err


def test_parse_error_positions(tmp_path, capsys):
    path = write(tmp_path, "ambient A = A(x, y)\nideal I in A = x +* y\n")
    code, _, err = run(["run", path], capsys)
    assert code == 1 and err.startswith(f"{path}:2:")


def test_empty_query_list(tmp_path, capsys):
    code, out, _ = run(["run", write(tmp_path, "ambient A = A(x)\n")], capsys)
    assert code == 0 and json.loads(out)["results"] == []


def test_report_is_deterministic(tmp_path, capsys):
    spec = str(ROOT / "specs" / "ex3.spec")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["run", spec, "--out", str(a)], capsys)[0] == 0
    assert run(["run", spec, "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["schema"] == "relcluster-report/1"
    assert "E1*(a - a2) - E0*(b - b2)" in report["results"][0]["result"]["rees"]
    assert all("seconds" not in r for r in report["results"])


def test_timings_are_opt_in(tmp_path, capsys):
    code, out, _ = run(["run", write(tmp_path, GOOD), "--timings"], capsys)
    assert code == 0 and all("seconds" in r for r in json.loads(out)["results"])


@pytest.mark.parametrize("spec", SPECS, ids=[p.stem for p in SPECS])
def test_shipped_specs_run_and_round_trip(spec, tmp_path, capsys):
    code, out, _ = run(["fmt", str(spec)], capsys)
    assert code == 0
    once = write(tmp_path, out, "once.spec")
    code, twice, _ = run(["fmt", once], capsys)
    assert code == 0 and twice == out
    code, _, _ = run(["run", str(spec), "--out", str(tmp_path / "r.json")], capsys)
    assert code == 0


def test_prime_field_is_labelled_heuristic(tmp_path, capsys):
    code, out, _ = run(["run", write(tmp_path, GOOD), "--field", "Fp:32003"], capsys)
    assert code == 0
    fld = json.loads(out)["field"]
    assert fld["characteristic"] == 32003 and "heuristic" in fld["note"]
    code, _, err = run(["run", write(tmp_path, GOOD), "--field", "Fp:12"], capsys)
    assert code == 1


def test_text_output_honours_no_color(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    code, out, _ = run(["run", write(tmp_path, QUERY_ERROR), "--text"], capsys)
    assert code == 2
    assert "\033[" not in out and "[error] query strict B : Z" in out


@pytest.mark.parametrize("example", ["ex1", "ex2", "ex3"])
def test_repro_examples_pass(example, capsys):
    code, out, _ = run(["repro", example, "--json"], capsys)
    report = json.loads(out)
    assert code == 0, report
    assert report["status"] == "PASS"


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "relcluster", "run", write(tmp_path, GOOD), "--text"],
                          capture_output=True, text=True, env={"NO_COLOR": "1", "PATH": ""})
    assert proc.returncode == 0 and "[ok] query blowup B" in proc.stdout
