import json
from pathlib import Path

from grigcalc.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def test_element_commands(capsys):
    assert run(capsys, "element", "trivial", "b c d", "--group", "grigorchuk") == (0, "true", "")
    assert run(capsys, "element", "section", "b", "--vertex", "0")[:2] == (0, "a")
    assert run(capsys, "element", "order", "a c")[:2] == (0, "8")
    assert run(capsys, "element", "eval", "a", "--vertex", "00")[:2] == (0, "10")


def test_element_json(capsys):
    code, out, _ = run(capsys, "element", "portrait", "a", "--depth", "2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "element portrait"
    assert doc["result"]["root"] == [1, 0] and doc["result"]["0"] == [0, 1]


def test_ggs_group_flag(capsys):
    assert run(capsys, "element", "order", "a", "--group", "ggs:3:1,2")[:2] == (0, "3")


def test_exit_codes(capsys):
    assert run(capsys, "element", "trivial", "a q")[0] == 2
    assert run(capsys, "element", "order", "a b", "--cap", "4")[0] == 3
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "subgroup", "orbits", "--spec", "/nonexistent.sub", "--level", "2")[0] == 2


def test_subgroup_commands(capsys):
    assert run(capsys, "subgroup", "transitive", "--spec", str(SPECS / "WL.sub"), "--max-level", "8")[:2] == (
        0, "transitive at levels 1..8")
    assert run(capsys, "subgroup", "index", "--spec", str(SPECS / "B.sub"), "--level", "4")[:2] == (0, "8")
    code, out, _ = run(capsys, "subgroup", "orbits", "--spec", str(SPECS / "WP.sub"), "--level", "3")
    assert code == 0 and out.splitlines()[0] == "2 orbits"


def test_classify_wp(capsys):
    assert run(capsys, "subgroup", "classify", "--spec", str(SPECS / "WP.sub"))[:2] == (0, "block-structure-side")


def test_lattice_over_b(capsys):
    code, out, _ = run(capsys, "subgroup", "lattice-over-b", "--json")
    doc = json.loads(out)["result"]
    assert code == 0 and sorted(doc["indices"]) == [1, 2, 2, 2, 4, 4, 4, 4, 4, 8]


def test_verify_only_ggs(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "ggs", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["failed"] == 0
    assert all("ggs" in c["name"] for c in doc["checks"])
    assert all(c["command"].startswith("grigcalc verify-paper --only") for c in doc["checks"])


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "identity.baba")
    assert code == 1 and "repro: grigcalc verify-paper --only" in out


def test_flipped_convention_caught_first(capsys, monkeypatch):
    import grigcalc.core as core
    monkeypatch.setattr(core, "RIGHT_TO_LEFT", False)
    code, out, _ = run(capsys, "verify-paper", "--only", "convention,identities", "--json")
    checks = json.loads(out)["checks"]
    assert code == 1
    assert checks[0]["name"] == "convention.ggs-anchor" and checks[0]["status"] == "fail"
