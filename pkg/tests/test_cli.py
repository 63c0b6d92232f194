import json
import math
import subprocess
import sys

import pytest

from hitlab.cli import main
from hitlab.hit import make_left_right


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_tiling_json_is_deterministic(capsys):
    a = run(capsys, "tiling", "-p", "7", "-q", "3", "-l", "2")
    b = run(capsys, "tiling", "-p", "7", "-q", "3", "-l", "2")
    assert a[0] == 0 and a == b
    data = json.loads(a[1])
    assert len(data["vertices"]) == 61


def test_tiling_files(tmp_path, capsys):
    out, svg = tmp_path / "t.json", tmp_path / "t.svg"
    code, text = run(capsys, "tiling", "-p", "7", "-q", "3", "-l", "1", "-o", str(out), "--svg", str(svg))
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["p"] == 7
    assert svg.read_text().startswith("<svg")
    code, text = run(capsys, "entropy", "--tiling", str(out), "--family", "left_right:3", "--region", "0:3",
                     "--format", "csv")
    assert code == 0
    assert text.splitlines() == ["start,length,entropy,graph_length", "0,3,6.0,3"]


@pytest.mark.parametrize("argv", [
    ["tiling", "-p", "4", "-q", "4"],
    ["tiling", "--pql", "7,3,1"],
    ["entropy", "--pql", "7,3,1"],
    ["entropy", "--pql", "7,3,1", "--family", "star:4:1"],
    ["corr", "--n", "7", "--xi", "1"],
    ["nogo", "--case", "two-uniform", "--n", "3"],
    ["verify", "--family", "bogus:3"],
    ["nosuchcommand"],
])
def test_bad_input_exits_2_with_json(capsys, argv):
    code, text = run(capsys, *argv)
    assert code == 2
    assert "error" in json.loads(text)


def test_verify_exit_codes(tmp_path, capsys):
    code, text = run(capsys, "verify", "--family", "left_right:3")
    assert code == 0 and json.loads(text)["passed"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(make_left_right(3).with_B((0, 1)).to_json()))
    code, text = run(capsys, "verify", "--spec", str(bad))
    data = json.loads(text)
    assert code == 1 and not data["passed"]
    assert not data["checks"]["ABA_face_ccw"]["passed"]


def test_entropy_fit(capsys):
    code, text = run(capsys, "entropy", "--pql", "7,3,1", "--family", "left_right:3")
    fit = json.loads(text)["fit"]
    assert fit["slope"] == pytest.approx(2) and fit["max_residual"] < 1e-9


def test_corr(capsys):
    code, text = run(capsys, "corr", "--n", "20", "--xi", "2", "--m", "3")
    d = json.loads(text)
    assert code == 0 and d["k"] == pytest.approx(d["k_direct"], rel=1e-12)


def test_geometry_commands(capsys):
    code, text = run(capsys, "length", "--family", "left_right:3")
    assert json.loads(text)["c_A"] == pytest.approx(9 * math.sqrt(2) / 16)
    code, text = run(capsys, "area", "--family", "left_right:3")
    d = json.loads(text)
    assert d["flag"] and d["vertex_area"] == pytest.approx(9 * math.sqrt(2) / 16 + 3 * math.sqrt(30) / 8)
    code, text = run(capsys, "angle", "--family", "left_right:3", "--pql", "7,3,1")
    d = json.loads(text)
    assert d["alpha"] == pytest.approx(math.pi / 3)


def test_nogo_two_uniform_seed7(capsys):
    code, text = run(capsys, "nogo", "--case", "two-uniform", "--n", "4", "--seed", "7")
    d = json.loads(text)
    assert code == 0 and d["certified"] and d["min_deviation"] > 0
    assert d["min_deviation"] == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("case", ["evenbly", "bipartitions", "geomeasure"])
def test_nogo_cases(capsys, case):
    code, text = run(capsys, "nogo", "--case", case, "--samples", "5")
    assert code == 0
    json.loads(text)


def test_paper_constants(capsys):
    code, text = run(capsys, "report", "--suite", "paper-constants")
    rows = json.loads(text)["rows"]
    assert code == 0 and rows and all(r["pass"] for r in rows)


def test_config_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nseed = 7\nn = 4\n")
    a = run(capsys, "--config", str(cfg), "nogo", "--case", "two-uniform")
    b = run(capsys, "nogo", "--case", "two-uniform", "--n", "4", "--seed", "7")
    assert a == b
    cfg.write_text("colour = red\n")
    code, text = run(capsys, "--config", str(cfg), "corr", "--n", "4", "--xi", "1")
    assert code == 2 and "colour" in json.loads(text)["error"]


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "hitlab.cli", "corr", "--n", "10", "--xi", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["linear_in_n"]
