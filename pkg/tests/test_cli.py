import csv
import json
import xml.etree.ElementTree as ET

import pytest

from tameopt.cli import EXIT_FAIL, EXIT_OK, EXIT_PARSE, main
from tameopt.solvers import DEFAULT_LASSO


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def read(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config-digest=")
    return list(csv.reader(lines[1:]))


def test_lasso_compare_outputs(tmp_path, capsys):
    code, out = run(tmp_path, "lasso-compare", "--seed", "7")
    assert code == EXIT_OK
    for m in ("ssm", "prox", "nsbfgs"):
        assert (out / f"lasso_{m}.csv").exists()
    summary = {r[0]: r for r in read(out / "lasso_summary.csv")[1:]}
    assert summary["prox"][5] != "never" and summary["ssm"][5] == "never"
    root = ET.parse(out / "lasso_paths.svg").getroot()
    assert root.tag.endswith("svg")
    assert "prox" in capsys.readouterr().out


def test_methods_filter(tmp_path):
    code, out = run(tmp_path, "lasso-compare", "--methods", "prox")
    assert code == EXIT_OK
    assert sorted(p.name for p in out.glob("lasso_*.csv")) == ["lasso_prox.csv", "lasso_summary.csv"]


def test_instance_file_and_errors(tmp_path, capsys):
    good = tmp_path / "inst.json"
    good.write_text(json.dumps(DEFAULT_LASSO.to_dict()))
    assert run(tmp_path, "lasso-compare", "--instance", str(good), "--methods", "prox")[0] == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text('{"A": [[1, 0]], "b": ')
    code, _ = run(tmp_path, "lasso-compare", "--instance", str(bad))
    assert code == EXIT_PARSE
    assert "input error" in capsys.readouterr().err
    assert run(tmp_path, "lasso-compare", "--instance", str(tmp_path / "missing.json"))[0] == EXIT_PARSE
    assert run(tmp_path, "lasso-compare", "--methods", "adam")[0] == EXIT_PARSE


def test_relu_activity_cli(tmp_path):
    code, out = run(tmp_path, "relu-activity", "--depths", "1,2", "--widths", "1", "--samples", "500",
                    "--precision", "f32")
    assert code == EXIT_OK
    rows = read(out / "relu_activity.csv")
    assert rows[0] == ["depth", "width", "samples", "hits", "probability", "ci_lo", "ci_hi"]
    assert len(rows) == 3
    assert run(tmp_path, "relu-activity", "--samples", "0")[0] == EXIT_PARSE
    assert run(tmp_path, "relu-activity", "--widths", "0", "--samples", "5")[0] == EXIT_PARSE


def test_f32_only_for_relu(tmp_path):
    assert run(tmp_path, "saset", "(0,1)", "--precision", "f32")[0] == EXIT_PARSE


def test_momsos_cli(tmp_path):
    prog = tmp_path / "p.json"
    prog.write_text(json.dumps({"n": 1, "objective": [[1.0, [4]], [-1.0, [2]]], "ball": 1.0}))
    code, out = run(tmp_path, "momsos", "--program", str(prog), "--d-max", "3", "--grid-points", "10000")
    assert code == EXIT_OK
    rows = read(out / "momsos_bounds.csv")
    assert [r[0] for r in rows[1:]] == ["2", "3"]
    assert float(rows[1][1]) == pytest.approx(-0.25, abs=1e-4)
    rep = json.loads((out / "momsos_result.json").read_text())
    assert rep["monotone"] and rep["below_grid"]
    assert run(tmp_path, "momsos", "--program", str(prog), "--d-max", "1")[0] == EXIT_PARSE
    assert run(tmp_path, "momsos")[0] == EXIT_PARSE


def test_monotone_cli(tmp_path):
    code, out = run(tmp_path, "monotone", "--poly=0,-3,0,1")
    assert code == EXIT_OK
    rows = read(out / "monotone.csv")
    assert [r[2] for r in rows[1:]] == ["increasing", "decreasing", "increasing"]
    assert [r[0] for r in rows[1:]] == ["-3", "-1", "1"]
    pw = tmp_path / "relu.json"
    pw.write_text('{"breakpoints": [0], "pieces": [[], [0, 1]]}')
    code, out = run(tmp_path, "monotone", "--piecewise", str(pw), "--interval", "-1", "1", name="pw")
    assert code == EXIT_OK and [r[2] for r in read(out / "monotone.csv")[1:]] == ["constant", "increasing"]
    assert run(tmp_path, "monotone", "--poly", "1,x")[0] == EXIT_PARSE
    assert run(tmp_path, "monotone", "--poly", "1,2", "--interval", "1", "1")[0] == EXIT_PARSE


def test_saset_cli(tmp_path, capsys):
    code, out = run(tmp_path, "saset", "(0,1) | {1} | (1,2)", "--difference", "{1/2}", "--union", "{5}")
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip().splitlines()[-1] == "(0,0.5) | (0.5,2) | {5}"
    rows = read(out / "saset.csv")
    assert [r[0] for r in rows[1:]] == ["interval", "interval", "point"]
    code, _ = run(tmp_path, "saset", "--solve=-2,0,1", "--relation", "<=", "--complement")
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip().splitlines()[-1].startswith("(-inf,-1.41421356")
    assert run(tmp_path, "saset", "(1,0)")[0] == EXIT_PARSE
    assert run(tmp_path, "saset")[0] == EXIT_PARSE


def test_clarke_cli(tmp_path, capsys):
    code, out = run(tmp_path, "clarke", "(sum (relu (var 0)) (scale -0.5 (relu (scale -1 (var 0)))))",
                    "--point", "0")
    assert code == EXIT_OK
    rows = read(out / "clarke.csv")
    gens = sorted(float(r[1]) for r in rows[1:] if r[0] == "generator")
    assert gens == [0.5, 1.0]
    assert [r for r in rows if r[0] == "min_norm"][0][1] == "0.5"
    rec = json.loads((out / "clarke_hull.json").read_text())
    assert rec["flag"] == "exact"
    assert run(tmp_path, "clarke", "(relu (var 0)", "--point", "0")[0] == EXIT_PARSE
    assert run(tmp_path, "clarke", "(relu (var 0))", "--point", "0,1")[0] == EXIT_PARSE


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 11, "overrides": {"depths": "1", "widths": "2", "samples": 50}}))
    code, out = run(tmp_path, "relu-activity", "--config", str(cfg), "--samples", "60")
    assert code == EXIT_OK
    head = (out / "relu_activity.csv").read_text().splitlines()[0]
    conf = json.loads(head.split(" config=", 1)[1])
    assert conf["seed"] == 11 and conf["overrides"]["samples"] == 60 and conf["overrides"]["widths"] == "2"
    bad = tmp_path / "bad.json"
    bad.write_text('{"speed": 1}')
    assert run(tmp_path, "relu-activity", "--config", str(bad))[0] == EXIT_PARSE


@pytest.mark.parametrize("argv", [
    ["lasso-compare", "--iters", "300"],
    ["relu-activity", "--depths", "2,4", "--widths", "1,2", "--samples", "3000", "--precision", "f32"],
    ["monotone", "--poly=1,-2,0,0,1"],
    ["saset", "(0,3)", "--intersect", "(1,5)"],
    ["clarke", "(abs (sum (var 0 2) (var 1 2)))", "--point", "0,0"],
])
def test_outputs_are_byte_identical_across_runs_and_threads(tmp_path, argv):
    _, a = run(tmp_path, *argv, "--seed", "3", name="a")
    _, b = run(tmp_path, *argv, "--seed", "3", name="b")
    _, c = run(tmp_path, *argv, "--seed", "3", "--threads", "4", name="c")
    names = sorted(p.name for p in a.glob("*.csv"))
    assert names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes() == (c / n).read_bytes()


def test_suite_filter(tmp_path, capsys):
    code, out = run(tmp_path, "suite", "--filter", "momsos")
    assert code == EXIT_OK
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert lines and all(ln.split()[1].startswith("momsos.") for ln in lines)
    assert run(tmp_path, "suite", "--filter", "nothing")[0] == EXIT_PARSE


def test_fault_injection_fails_suite(tmp_path, capsys, monkeypatch):
    import tameopt.solvers.prox as prox

    real = prox.soft_threshold
    monkeypatch.setattr(prox, "soft_threshold", lambda v, tau: real(v, -tau))
    code, _ = run(tmp_path, "suite", "--filter", "solvers")
    out = capsys.readouterr().out
    assert code == EXIT_FAIL
    assert "FAIL solvers.nonexpansiveness" in out
    assert "failed: solvers.nonexpansiveness" in out


def test_full_suite_passes(tmp_path, capsys):
    code, out = run(tmp_path, "suite")
    assert code == EXIT_OK
    rows = read(out / "suite.csv")
    assert rows[0] == ["property", "status", "detail"]
    assert all(r[1] == "pass" for r in rows[1:])
    assert len(rows) - 1 == sum(1 for ln in capsys.readouterr().out.splitlines() if ln.startswith("PASS"))
