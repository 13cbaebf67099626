import csv
import io
import json
import re

import pytest

from helpers import CLI_ACCEPTANCE_COMMANDS, run_cli
from nsvf.cli import run


def _run(argv):
    buf = io.StringIO()
    return run(argv, buf), buf.getvalue()


@pytest.mark.parametrize("args", CLI_ACCEPTANCE_COMMANDS, ids=lambda a: a[0])
def test_bit_identical_reruns(args, tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first = run_cli(args, tmp_path / "a")
    second = run_cli(args, tmp_path / "b")
    assert first[0] == 0
    assert first == second


def test_classify_table_and_json(tmp_path):
    code, text = _run(["classify", "paper-ex1", "--xrange", "-1", "1", "--json", str(tmp_path / "c.json")])
    assert code == 0
    assert [ln.split()[0] for ln in text.splitlines() if ln[:1].isalpha() and "kind" not in ln][:4] == [
        "sewing", "escaping", "sliding", "sewing"]
    data = json.loads((tmp_path / "c.json").read_text())
    assert [iv["kind"] for iv in data["intervals"]] == ["sewing", "escaping", "sliding", "sewing"]
    inner = [b["x"] for b in data["boundaries"]][1:-1] if len(data["boundaries"]) == 5 else \
        [b["x"] for b in data["boundaries"]]
    assert [round(x, 9) for x in inner] == [-0.707106781, 0.0, 0.707106781]


def test_integrate_csv():
    code, text = _run(["integrate", "paper-ex1", "--x0", "-1", "--y0", "0", "--tmax", "9", "--policy", "prefer-y"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["t", "x", "y", "regime", "branch"]
    assert {r["regime"] for r in rows} <= {"X", "Y", "S", "R"}
    back = [float(r["t"]) for r in rows if abs(float(r["x"]) + 1) <= 1e-9 and abs(float(r["y"])) <= 1e-9]
    assert any(abs(t - 3.0) <= 1e-6 for t in back) and any(abs(t - 6.0) <= 1e-6 for t in back)
    assert float(rows[-1]["t"]) == 9.0


def test_integrate_enumerate_has_branch_column():
    code, text = _run(["integrate", "paper-ex1", "--x0", "0", "--y0", "0", "--tmax", "3", "--policy", "enumerate",
                       "--max-depth", "1"])
    assert code == 0
    assert {r["branch"] for r in csv.DictReader(io.StringIO(text))} == {"Y", "S"}


def test_limitset_json():
    code, text = _run(["limitset", "crossing-cycle", "--x0", "0.1", "--y0", "0.1", "--tmax", "200"])
    assert code == 0
    data = json.loads(text)
    assert [r["kind"] for r in data["reports"]] == ["pseudo-cycle"]
    assert abs(data["reports"][0]["support"]["period"] - 6.283185307179586) <= 1e-4


def test_minimal_check_json():
    code, text = _run(["minimal-check", "paper-ex1", "--region", "Lambda", "--samples", "4"])
    assert code == 0
    assert json.loads(text)["verdict"] == "pass"


def test_portrait_svg(tmp_path):
    out = tmp_path / "p.svg"
    assert _run(["portrait", "paper-ex1", "--out", str(out), "--grid", "3"])[0] == 0
    svg = out.read_text()
    assert 'viewBox="0 0 1000 1000"' in svg
    for colour in ("#2ca02c", "#ff7f0e", "#444444"):
        assert colour in svg
    assert not re.search(r"<dc:date>", svg)


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    for cmd in ("classify", "integrate", "limitset", "minimal-check", "portrait"):
        assert run([cmd, "--help"]) == 0
    assert "--max-branches" in capsys.readouterr().out


@pytest.mark.parametrize("argv,code", [
    ([], 1),
    (["frobnicate"], 1),
    (["classify", "paper-ex1"], 1),
    (["integrate", "paper-ex1", "--x0", "0", "--y0", "1", "--tmax", "-1"], 1),
    (["classify", "no-such-system", "--xrange", "0", "1"], 2),
    (["minimal-check", "paper-ex1", "--region", "x ; 1"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv, io.StringIO()) == code


def test_bad_system_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("X = (1, 2 +)\nY = (1, 0)\nf = y\n")
    assert run(["classify", str(bad), "--xrange", "0", "1"], io.StringIO()) == 2


def test_numerical_failure_exit_code(tmp_path):
    sysfile = tmp_path / "blowup.txt"
    sysfile.write_text("X = (1, 1/x)\nY = (1, 1/x)\nf = y + 9\n")
    assert run(["integrate", str(sysfile), "--x0", "0", "--y0", "0", "--tmax", "2"], io.StringIO()) == 3
