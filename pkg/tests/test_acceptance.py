"""Exit criteria. Each test records one PASS/FAIL line shown in the terminal summary.

All comparisons are exact canonical-form equalities (zero tolerance).
"""
import json
import os
import random
import shutil
import subprocess
import sys
import time
from itertools import combinations

import pytest

from algcalc import corpus
from algcalc.algebroid import bracket, check_anchor_compatibility, check_antisymmetry, check_jacobi, tangent_algebroid
from algcalc.calculus import (IDENTITIES, DifferentialForm, apply_form, coframe, coordinate_differential,
                              ext_deriv, maurer_cartan_check, random_form, verify_calculus_identities, wedge)
from algcalc.eds import (GeneratedIdeal, eds_closure_check, expand_certificate, ideal_membership,
                         membership_certificate, vanishes_on_ids)
from algcalc.ids import cartan_decomposition, cartan_test, involutive_bracket_test
from algcalc.problem import BUNDLED, bundled_fixture, load_definition

from conftest import ACCEPTANCE_LINES

SAMPLES = 50
MEMBERS = 50
CORPUS_SIZE = 20


@pytest.fixture
def record(request):
    state = {"detail": ""}
    start = time.perf_counter()
    yield state
    failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
    took = time.perf_counter() - start
    ACCEPTANCE_LINES.append(f"{'FAIL' if failed else 'PASS'} {request.node.name}: {state['detail']} ({took:.1f}s)")


def _fixture_algebroids():
    algs = dict(corpus.validated_algebroids())
    for name in BUNDLED:
        if name != "broken_anchor.json":
            algs[name] = load_definition(bundled_fixture(name)).algebroid
    return algs


def test_criterion_1_axioms(record):
    for A in [tangent_algebroid(n) for n in (1, 2, 3)] + [corpus.so3()]:
        for check in (check_antisymmetry, check_anchor_compatibility, check_jacobi):
            rep = check(A)
            assert rep.passed, (A, rep.name, rep.witnesses)
    broken = corpus.broken_anchor()
    rep = check_anchor_compatibility(broken)
    assert not rep.passed
    residuals = {w.indices: w.residual for w in rep.witnesses}
    assert residuals[(1, 2, 1)] == broken.cs.one()
    record["detail"] = "TR^1..3 and so(3) clean; broken anchor residual 1 at (1,2,1)"


def test_criterion_2_calculus_identities(record):
    algs = corpus.validated_algebroids()
    for name, A in algs.items():
        rep = verify_calculus_identities(A, samples=SAMPLES, seed=2024)
        assert rep.passed, (name, rep.witnesses[:3])
        assert all(n >= SAMPLES for n in rep.details["samples"].values())
    record["detail"] = f"{len(IDENTITIES)} identities x {SAMPLES} samples x {len(algs)} algebroids, exact"


def test_criterion_3_maurer_cartan(record):
    algs = _fixture_algebroids()
    for name, A in algs.items():
        assert maurer_cartan_check(A).passed, name
        for a in range(A.p):
            d = ext_deriv(A, coframe(A, a))
            for b, c in combinations(range(A.p), 2):
                assert d.coeff((b, c)) == -A.structure[a][b][c]
        for i in range(A.n):
            assert ext_deriv(A, DifferentialForm.scalar(A.cs.var(i + 1), A.p)) == coordinate_differential(A, i)
    s = corpus.so3()
    t = [coframe(s, a) for a in range(3)]
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        assert ext_deriv(s, t[a]) == -wedge(t[b], t[c])
    record["detail"] = f"{len(algs)} fixtures; so(3) d t^1 = -t^2^t^3 and cyclic"


def test_criterion_4_frobenius_agreement(record):
    instances = corpus.frobenius_corpus(seed=0, random_count=CORPUS_SIZE - 4)
    assert len(instances) >= CORPUS_SIZE
    by_name = dict((label, (A, E)) for label, A, E in instances)
    disagreements, involutive = [], 0
    for label, A, E in instances:
        verdicts = {involutive_bracket_test(A, E).verdict, cartan_test(A, E).verdict,
                    eds_closure_check(A, E).verdict}
        if len(verdicts) != 1:
            disagreements.append(label)
        involutive += verdicts == {"pass"}
    assert disagreements == []
    A, E = by_name["tr3/plane"]
    assert involutive_bracket_test(A, E).passed
    A, E = by_name["tr3/contact"]
    rep = cartan_test(A, E)
    assert [(w.indices, w.residual) for w in rep.witnesses] == [((3, 1, 2), -A.cs.one())]
    # a single generator always brackets into its own span, so span{t_1} is involutive
    A, E = by_name["so3/span_t1"]
    assert involutive_bracket_test(A, E).verdict == cartan_test(A, E).verdict == "pass"
    A, E = by_name["so3/span_t1_t2"]
    assert involutive_bracket_test(A, E).verdict == "fail"
    record["detail"] = (f"{len(instances)} instances, {involutive} involutive, "
                        f"{len(instances) - involutive} not, 0 disagreements")


def test_criterion_5_a_block_identity(record):
    instances = corpus.frobenius_corpus(seed=0, random_count=CORPUS_SIZE - 4)
    checked = 0
    for label, A, E in instances:
        dec = cartan_decomposition(A, E)
        cf = dec.coframe
        for alpha in range(E.r, A.p):
            a_block = dec.a_block(alpha)
            for b, c in combinations(range(E.r), 2):
                want = -apply_form(cf.coforms[alpha], bracket(A, E.generators[b], E.generators[c]))
                assert a_block.get((b, c), A.cs.zero()) == want, (label, alpha, b, c)
                checked += 1
    record["detail"] = f"{checked} coefficients on {len(instances)} instances"


def test_criterion_6_ideal_laws(record):
    instances = [(label, A, E) for label, A, E in corpus.frobenius_corpus(seed=0, random_count=CORPUS_SIZE - 4)
                 if E.r < A.p]
    rng = random.Random(6)
    members = 0
    while members < MEMBERS:
        label, A, E = instances[rng.randrange(len(instances))]
        I = GeneratedIdeal.of(A, E)
        q = rng.randint(1, A.p)
        w = None
        for g in I.generators:
            term = wedge(random_form(A, rng, q - 1, 1, 2), g)
            w = term if w is None else w + term
        if w.is_zero:
            continue
        cert = membership_certificate(I, w)
        assert cert is not None, label
        assert expand_certificate(I, cert) == w, label
        eta = random_form(A, rng, rng.randint(0, A.p - q), 1, 2)
        assert wedge(eta, w).is_zero or ideal_membership(I, wedge(eta, w)), label
        assert vanishes_on_ids(w, E), label
        members += 1
    record["detail"] = f"{members} certified members re-expand, absorb wedges, vanish on E"


def _cli(cwd):
    exe = shutil.which("algcalc")
    cmd = [exe] if exe else [sys.executable, "-m", "algcalc"]
    args = ["check", "--input", "heisenberg.json", "--only", "equivalence:contact", "--format", "json"]
    return subprocess.run(cmd + args, capture_output=True, text=True, cwd=cwd, env=dict(os.environ))


def test_criterion_7_cli_end_to_end(record, tmp_path):
    shutil.copy(bundled_fixture("heisenberg.json"), tmp_path / "heisenberg.json")
    docs = []
    for _ in range(2):
        proc = _cli(tmp_path)
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        (check,) = doc["checks"]
        assert check["verdict"] == "pass"
        assert check["details"]["verdicts"] == {"involutive": "fail", "cartan": "fail", "eds": "fail"}
        doc.pop("timing")
        docs.append(json.dumps(doc, sort_keys=True))
    assert docs[0] == docs[1]
    record["detail"] = "exit 0, three agreeing fail verdicts, identical json across runs"
