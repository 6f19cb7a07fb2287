import json
import subprocess
import sys
from pathlib import Path

import pytest

from reflex.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_lattice_info_text(capsys):
    code, out, _ = run(capsys, "lattice", "info", "2U+D20")
    assert code == 0
    assert "length 2, exponent 2" in out


def test_lattice_info_json(capsys):
    code, doc = run_json(capsys, "lattice", "info", "E8")
    assert code == 0
    assert doc["det"] == 1 and doc["roots"] == 240 and doc["maximal"]


def test_lattice_between(capsys):
    code, doc = run_json(capsys, "lattice", "between", "A3(2)", "A3'(2)", "--maximal")
    assert code == 0
    assert [x["label"] for x in doc["lattices"]] == ["3A1"]


def test_lattice_overlattices(capsys):
    code, doc = run_json(capsys, "lattice", "overlattices", "D8")
    assert code == 0
    assert any(r.get("label") == "E8" and r["index"] == 2 for r in doc["overlattices"])


def test_rootsys_info(capsys):
    code, doc = run_json(capsys, "rootsys", "info", "E8")
    assert code == 0 and doc["sum_rule"]
    code, out, _ = run(capsys, "rootsys", "info", "E8")
    assert "<rho,rho> = 620" in out


def test_fake_check_pass(capsys):
    code, out, _ = run(capsys, "fake", "check", str(DATA / "example7.json"))
    assert code == 0
    assert "eqB: -14 (pass)" in out


def test_fake_check_json(capsys):
    code, doc = run_json(capsys, "fake", "check", str(DATA / "example7.json"), "--lattice", "2E8+D4")
    assert code == 0 and doc["admissible"] and doc["eqB_lhs"] == "-14"
    code, _, err = run(capsys, "fake", "check", str(DATA / "example7.json"), "--lattice", "D4")
    assert code == 2 and "rank mismatch" in err


def test_fake_check_bad_weight(capsys):
    code, out, _ = run(capsys, "fake", "check", str(DATA / "bad_weight.json"))
    assert code == 1
    assert "eqA: fail" in out


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "fake", "check", str(tmp_path / "nope.json"))
    assert code == 2 and "error" in err


def test_malformed_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"a0": 1, "k": 24, "components": [{"family": "Q", "rank": 2}]}')
    assert run(capsys, "fake", "check", str(bad))[0] == 2
    assert run(capsys, "lattice", "info", "E9")[0] == 2


@pytest.mark.parametrize("argv", [[], ["lattice"], ["fake", "check"], ["reproduce", "th-l99"],
                                  ["lattice", "info", "E8", "--format", "xml"]])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_theta(capsys, tmp_path):
    f = tmp_path / "sys.json"
    f.write_text(json.dumps({"a0": 1, "k": 12, "components": []}))
    code, doc = run_json(capsys, "fake", "theta", str(f), "--prec", "3")
    assert code == 0 and doc["leading_exponent"] == "1"


def test_pp_check_and_lift(capsys):
    code, doc = run_json(capsys, "pp", "check", str(DATA / "pp_4A1.json"))
    assert code == 0 and doc["reflective_shape"]["pass"]
    code, doc = run_json(capsys, "pp", "lift", str(DATA / "pp_4A1.json"), "--to", "D4")
    assert code == 0 and doc["reflective_shape"]["pass"]
    assert run(capsys, "pp", "lift", str(DATA / "pp_4A1.json"), "--to", "E8")[0] == 2


def test_solve(capsys):
    code, doc = run_json(capsys, "solve", "--spec", str(DATA / "spec_rank2.json"))
    assert code == 0
    assert doc["admissible_lattices"] == ["2A1", "A2"]


def test_config_caps(capsys, tmp_path):
    cfg = tmp_path / "caps.ini"
    cfg.write_text("candidate_cap = 5\n")
    code, _, err = run(capsys, "solve", "--spec", str(DATA / "spec_rank2.json"), "--config", str(cfg))
    assert code == 2 and "cap" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reflex.cli", "lattice", "info", "A2"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "det 3" in proc.stdout


def test_fake_examples(capsys):
    code, doc = run_json(capsys, "fake", "examples")
    assert code == 0
    flagged = [r["name"] for r in doc["examples"] if r["status"] != "consistent"]
    assert flagged == ["Delta10"]
