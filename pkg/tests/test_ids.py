import random
from itertools import combinations

import pytest

from algcalc import corpus
from algcalc.algebroid import Section, bracket, tangent_algebroid
from algcalc.calculus import apply_form, ext_deriv, random_form, wedge
from algcalc.ids import (RankDeficiencyError, SubbundleSpec, annihilator, cartan_decomposition, cartan_test,
                         decompose_two_form, extend_frame, in_span, in_span_by_rank, involutive_bracket_test)
from algcalc.linalg import inverse, nullspace, rank, transpose

CORPUS = corpus.frobenius_corpus(seed=1, random_count=10)


def coeffs(form, p):
    return [form.coeff((a,)) for a in range(p)]


# --- annihilator ---

def test_annihilator_coordinate_plane(tr3, plane):
    ann = annihilator(tr3, plane)
    assert [coeffs(th, 3) for th in ann] == [[0, 0, 1]]


def test_annihilator_contact(tr3, contact):
    ann = annihilator(tr3, contact)
    x2 = tr3.cs.var(2)
    assert [coeffs(th, 3) for th in ann] == [[-x2, 0, 1]]


def test_annihilator_full_rank_is_empty(so3):
    E = SubbundleSpec(tuple(so3.frame(a) for a in range(3)))
    assert len(annihilator(so3, E)) == 0


def test_annihilator_clears_denominators(tr3):
    E = SubbundleSpec((tr3.section(1, 0, "1/x2"), tr3.section(0, 1, "x1/(x2+1)")))
    ann = annihilator(tr3, E)
    assert all(c.is_polynomial for th in ann for c in coeffs(th, 3))
    for th in ann:
        assert all(not apply_form(th, s) for s in E.generators)


def test_rank_deficiency_rejected(tr3):
    s = tr3.section(1, "x1", 0)
    E = SubbundleSpec((s, s.scale(tr3.cs.parse("x2 + 1"))))
    with pytest.raises(RankDeficiencyError):
        annihilator(tr3, E)


# --- frame extension ---

def test_extend_frame_already_adapted(tr3):
    cf = extend_frame(tr3, SubbundleSpec((tr3.section(1, 0, 0),)))
    assert cf.frame[1:] == (tr3.frame(1), tr3.frame(2))
    assert [coeffs(th, 3) for th in cf.coforms] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_extend_frame_contact(tr3, contact):
    cf = extend_frame(tr3, contact)
    x2 = tr3.cs.var(2)
    tail = coeffs(cf.tail[0], 3)
    # proportional to (-x2, 0, 1)
    assert tail[0] * 1 == tail[2] * (-x2) and tail[1] == 0


def test_extend_frame_square_case(tr3):
    gens = (tr3.section(1, "x1", 0), tr3.section(0, 1, "x2"), tr3.section(0, 0, 1))
    cf = extend_frame(tr3, SubbundleSpec(gens))
    M = [list(s) for s in gens]
    assert [coeffs(th, 3) for th in cf.coforms] == transpose(inverse(M))


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_adapted_coframe_duality(label, A, E):
    cf = extend_frame(A, E)
    for u in range(A.p):
        for v in range(A.p):
            assert apply_form(cf.coforms[u], cf.frame[v]) == (1 if u == v else 0)
    ann = annihilator(A, E)
    # tail and annihilator span the same module
    assert rank([coeffs(th, A.p) for th in cf.tail] + [coeffs(th, A.p) for th in ann]) == A.p - E.r


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_annihilator_kills_generators(label, A, E):
    for th in annihilator(A, E):
        for s in E.generators:
            assert apply_form(th, s).is_zero


def test_nullspace_normalization():
    A = tangent_algebroid(3)
    cs = A.cs
    rows = [[cs.parse("2*x1"), cs.parse("4*x1*x2"), cs.parse("6*x1")]]
    basis = nullspace(rows, 3, cs)
    for v, f in zip(basis, (1, 2)):
        assert v[f].num.LC == 1
        assert all(e.is_polynomial for e in v)


# --- bracket test ---

def test_bracket_test_examples(tr3, plane, contact, so3):
    assert involutive_bracket_test(tr3, plane).passed
    rep = involutive_bracket_test(tr3, contact)
    assert not rep.passed
    assert bracket(tr3, *contact.generators) == tr3.section(0, 0, 1)
    assert [(w.indices, w.residual) for w in rep.witnesses] == [((1, 2, 3), tr3.cs.one())]
    for A in corpus.validated_algebroids().values():
        s = A.section(*(A.cs.random_poly(random.Random(A.p), 2, 3) for _ in range(A.p)))
        if not s.is_zero:
            assert involutive_bracket_test(A, SubbundleSpec((s,))).passed


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_membership_paths_agree(label, A, E):
    ann = annihilator(A, E)
    rng = random.Random(label)
    candidates = [bracket(A, a, b) for a, b in combinations(E.generators, 2)]
    candidates += [A.section(*(A.cs.random_poly(rng) for _ in range(A.p)))]
    combo = None
    for g in E.generators:
        term = g.scale(A.cs.random_poly(rng, 1, 2))
        combo = term if combo is None else combo + term
    candidates.append(combo)
    for s in candidates:
        assert in_span(ann, s) == in_span_by_rank(E, s)


# --- decomposition / Cartan ---

def test_decompose_basis_and_zero(tr3, contact):
    cf = extend_frame(tr3, contact)
    dec = decompose_two_form(tr3, cf, wedge(cf.coforms[0], cf.coforms[1]))
    assert dec.coeffs == {(0, 1): tr3.cs.one()}
    zero = wedge(cf.coforms[0], cf.coforms[0])
    assert decompose_two_form(tr3, cf, zero).coeffs == {}
    with pytest.raises(ValueError):
        decompose_two_form(tr3, cf, cf.coforms[0])


def test_decompose_contact_a_block(tr3, contact):
    cf = extend_frame(tr3, contact)
    dec = decompose_two_form(tr3, cf, ext_deriv(tr3, cf.coforms[2]))
    assert dec.block("A") == {(0, 1): -tr3.cs.one()}


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_decomposition_reconstructs(label, A, E):
    cf = extend_frame(A, E)
    rng = random.Random(label)
    for _ in range(3):
        w = random_form(A, rng, 2) if A.p >= 2 else None
        if w is None:
            continue
        assert decompose_two_form(A, cf, w).reconstruct(cf) == w


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_a_block_is_minus_bracket_pairing(label, A, E):
    dec = cartan_decomposition(A, E)
    cf = dec.coframe
    for alpha in range(E.r, A.p):
        a_block = dec.a_block(alpha)
        for b, c in combinations(range(E.r), 2):
            want = -apply_form(cf.coforms[alpha], bracket(A, E.generators[b], E.generators[c]))
            assert a_block.get((b, c), A.cs.zero()) == want


def test_cartan_examples(tr3, plane, contact, so3):
    rep = cartan_test(tr3, plane)
    assert rep.passed
    dec = rep.details["decomposition"]
    assert all(om.is_zero for row in dec.omegas.values() for om in row.values())
    rep = cartan_test(tr3, contact)
    assert [(w.indices, w.residual) for w in rep.witnesses] == [((3, 1, 2), -tr3.cs.one())]
    for E in (SubbundleSpec((so3.frame(0),)), SubbundleSpec((so3.frame(0), so3.frame(1)))):
        assert cartan_test(so3, E).verdict == involutive_bracket_test(so3, E).verdict


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_cartan_agrees_with_bracket_test(label, A, E):
    assert cartan_test(A, E).verdict == involutive_bracket_test(A, E).verdict


@pytest.mark.parametrize("label,A,E", CORPUS, ids=[c[0] for c in CORPUS])
def test_verdicts_invariant_under_rescaling(label, A, E):
    rng = random.Random(label)
    f = A.cs.random_poly(rng, 2, 3)
    if f.is_zero:
        f = A.cs.parse(f"{A.cs.names[0]} + 1")
    k = rng.randrange(E.r)
    gens = list(E.generators)
    gens[k] = gens[k].scale(f)
    F = SubbundleSpec(tuple(gens))
    assert involutive_bracket_test(A, F).verdict == involutive_bracket_test(A, E).verdict
    before = cartan_decomposition(A, E)
    after = cartan_decomposition(A, F)
    for alpha in range(E.r, A.p):
        assert set(before.a_block(alpha)) == set(after.a_block(alpha))


def test_omega_witnesses_reconstruct_differential():
    A = corpus.so3_action()
    E = corpus.level_set_subbundle(A, A.cs.parse("x1^2 + x2^2 + x3^2 + x1*x2"))
    E = E if E is not None else SubbundleSpec((A.frame(0),))
    rep = cartan_test(A, E)
    dec = rep.details["decomposition"]
    if rep.passed:
        for alpha in dec.parts:
            assert dec.reconstruct_with_omegas(alpha) == dec.differentials[alpha]
