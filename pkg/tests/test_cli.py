import json
import subprocess
import sys

import pytest

from algcalc import corpus
from algcalc.cli import main
from algcalc.problem import (BUNDLED, DefinitionError, bundled_fixture, dump_definition, load_definition,
                             parse_definition)
from algcalc.runner import RunReport, SelectionError, emit_report, report_to_dict, run_checks


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "algcalc", *args], capture_output=True, text=True)


# --- loading ---

def test_load_tr3():
    d = load_definition(bundled_fixture("tr3.json"))
    A = d.algebroid
    assert (A.n, A.p) == (3, 3)
    assert all(A.anchor[i][a] == (1 if i == a else 0) for i in range(3) for a in range(3))
    assert all(not v for plane in A.structure for row in plane for v in row)
    assert d.digest.startswith("sha256:")


def test_load_so3_matches_levi_civita():
    d = load_definition(bundled_fixture("so3.json"))
    assert d.algebroid.n == 1 and d.algebroid.p == 3
    assert d.algebroid == corpus.so3()


def test_load_other_fixtures():
    assert load_definition(bundled_fixture("anchored.json")).algebroid == corpus.anchored()
    assert load_definition(bundled_fixture("so3_action.json")).algebroid == corpus.so3_action()
    assert load_definition(bundled_fixture("rational.json")).algebroid == corpus.rational()
    h = load_definition(bundled_fixture("heisenberg.json"))
    assert "contact" in h.subbundles and "contact_form" in h.forms


def test_truncated_file_reports_position(tmp_path):
    text = bundled_fixture("tr3.json").read_text()
    bad = tmp_path / "bad.json"
    bad.write_text(text[: len(text) // 2])
    with pytest.raises(DefinitionError, match=r"line \d+, column \d+"):
        load_definition(bad)


BASE = {"coords": ["x1", "x2"], "rank": 2, "anchor": [["1", "0"], ["0", "1"]], "structure": []}


@pytest.mark.parametrize("patch,match", [
    ({"anchor": [["1", "0"]]}, "anchor must have n=2 rows"),
    ({"anchor": [["1"], ["0"]]}, "p=2 entries"),
    ({"anchor": [["y", "0"], ["0", "1"]]}, "unknown identifier"),
    ({"structure": [{"lower": [2, 1], "upper": 1, "value": "1"}]}, "antisymmetry violation"),
    ({"structure": [{"lower": [1, 2], "upper": 1, "value": "1"}, {"lower": [1, 2], "upper": 1, "value": "2"}]},
     "duplicate"),
    ({"coords": ["x1", "x1"]}, "duplicate coordinate"),
    ({"subbundles": {"e": [["1"]]}}, "p=2 components"),
    ({"forms": {"w": {"degree": 2, "terms": [{"indices": [2, 1], "coeff": "1"}]}}}, "strictly increasing"),
    ({"bogus": 1}, "unknown keys"),
])
def test_definition_errors(patch, match):
    doc = dict(BASE, **patch)
    with pytest.raises(DefinitionError, match=match):
        parse_definition(json.dumps(doc))


@pytest.mark.parametrize("name", BUNDLED)
def test_round_trip(name):
    d = load_definition(bundled_fixture(name))
    again = parse_definition(json.dumps(dump_definition(d)))
    assert again == d


# --- running ---

def test_run_tr3_axioms_and_mc():
    d = load_definition(bundled_fixture("tr3.json"))
    rep = run_checks(d, ["maurer-cartan", "axioms"], seed=123)
    assert rep.passed
    assert [name for name, _ in rep.checks] == ["axioms", "maurer-cartan"]


def test_run_heisenberg_equivalence():
    d = load_definition(bundled_fixture("heisenberg.json"))
    rep = run_checks(d, ["equivalence:contact"], seed=0)
    assert rep.passed
    (_, check), = rep.checks
    assert check.details["verdicts"] == {"involutive": "fail", "cartan": "fail", "eds": "fail"}


def test_run_so3_axioms():
    d = load_definition(bundled_fixture("so3.json"))
    assert run_checks(d, ["axioms"], seed=9).passed


def test_selection_errors():
    d = load_definition(bundled_fixture("heisenberg.json"))
    with pytest.raises(SelectionError, match="unknown check"):
        run_checks(d, ["nonsense"])
    with pytest.raises(SelectionError, match="unknown subbundle"):
        run_checks(d, ["cartan:nope"])


def test_empty_selection_is_vacuous_pass():
    d = load_definition(bundled_fixture("tr3.json"))
    rep = run_checks(d, [], seed=0)
    doc = report_to_dict(rep)
    assert doc["checks"] == [] and doc["overall"] == "pass"


def test_text_report_lines():
    d = load_definition(bundled_fixture("tr3.json"))
    text = emit_report(run_checks(d, ["axioms"]), "text")
    assert "PASS axioms" in text.splitlines()
    assert "overall: PASS (1/1 checks passed)" in text


def test_json_report_witnesses():
    d = load_definition(bundled_fixture("broken_anchor.json"))
    doc = json.loads(emit_report(run_checks(d, ["axioms"]), "json"))
    assert doc["overall"] == "fail"
    ws = doc["checks"][0]["witnesses"]
    assert {"indices": [1, 2, 1], "residual": "1", "label": "anchor compatibility"} in ws


def test_text_and_json_carry_the_same_witnesses():
    d = load_definition(bundled_fixture("heisenberg.json"))
    rep = run_checks(d, ["cartan:contact", "involutive:contact"])
    doc = json.loads(emit_report(rep, "json"))
    text = emit_report(rep, "text")
    for c in doc["checks"]:
        assert f"{c['verdict'].upper()} {c['name']}" in text
        for w in c["witnesses"]:
            assert f"({', '.join(map(str, w['indices']))}): {w['residual']}" in text


# --- exit codes ---

def test_exit_codes(tmp_path):
    assert main(["check", "--input", "tr3.json", "--only", "axioms"]) == 0
    assert main(["check", "--input", "broken_anchor.json", "--only", "axioms"]) == 1
    assert main(["check", "--input", str(tmp_path / "missing.json")]) == 2
    assert main(["check", "--input", "tr3.json", "--only", "wat"]) == 2
    assert main(["validate", "--input", "heisenberg.json"]) == 0
    with pytest.raises(SystemExit) as info:
        main(["check"])
    assert info.value.code == 2


def test_subprocess_end_to_end(tmp_path):
    out = tmp_path / "r.json"
    proc = run_cli("check", "--input", str(bundled_fixture("heisenberg.json")), "--only",
                   "equivalence:contact", "--format", "json", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(out.read_text())
    assert doc["checks"][0]["details"]["verdicts"] == {"cartan": "fail", "eds": "fail", "involutive": "fail"}
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    proc = run_cli("validate", "--input", str(bad))
    assert proc.returncode == 2 and "parse error" in proc.stderr


def test_determinism_modulo_timing():
    d = load_definition(bundled_fixture("so3_action.json"))
    docs = []
    for _ in range(2):
        doc = json.loads(emit_report(run_checks(d, None, seed=42, samples=5), "json"))
        doc.pop("timing")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]
