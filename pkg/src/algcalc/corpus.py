"""Reference algebroids and seeded random subbundles for cross-checking.

Kernels of ``d g`` are always involutive (the anchor is a bracket morphism),
so they give involutive instances with nontrivial polynomial generators;
random polynomial sections of rank >= 2 are generically non-involutive.
"""
from __future__ import annotations

import random
from itertools import permutations

from algcalc.algebroid import LieAlgebroid, Section, lie_algebra, tangent_algebroid
from algcalc.calculus import DifferentialForm, ext_deriv
from algcalc.expr import CoordinateSystem, ScalarExpr
from algcalc.ids import SubbundleSpec
from algcalc.linalg import nullspace, rank


def levi_civita(p: int = 3) -> list:
    """eps[c][a][b] = sign of (a, b, c) for p = 3."""
    eps = [[[0] * p for _ in range(p)] for _ in range(p)]
    for a, b, c in permutations(range(3)):
        eps[c][a][b] = 1 if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1
    return eps


def so3() -> LieAlgebroid:
    return lie_algebra(levi_civita())


def so3_action() -> LieAlgebroid:
    """so(3) acting on R^3 by rotations."""
    cs = CoordinateSystem(["x1", "x2", "x3"])
    P = cs.parse
    anchor = [[P("0"), P("x3"), P("-x2")], [P("-x3"), P("0"), P("x1")], [P("x2"), P("-x1"), P("0")]]
    return LieAlgebroid.from_brackets(cs, anchor, {(1, 2): [0, 0, -1], (2, 3): [-1, 0, 0], (1, 3): [0, 1, 0]})


def anchored() -> LieAlgebroid:
    cs = CoordinateSystem(["x1"])
    return LieAlgebroid(cs, [[cs.var(1)]], [[[cs.zero()]]])


def rational() -> LieAlgebroid:
    cs = CoordinateSystem(["x1", "x2"])
    anchor = [[cs.one(), cs.zero()], [cs.zero(), cs.var(1)]]
    return LieAlgebroid.from_brackets(cs, anchor, {(1, 2): [0, cs.parse("1/x1")]})


def broken_anchor() -> LieAlgebroid:
    cs = CoordinateSystem(["x1"])
    zero = cs.zero()
    return LieAlgebroid(cs, [[cs.one(), cs.var(1)]], [[[zero] * 2 for _ in range(2)] for _ in range(2)])


def validated_algebroids() -> dict[str, LieAlgebroid]:
    return {
        "tr1": tangent_algebroid(1),
        "tr2": tangent_algebroid(2),
        "tr3": tangent_algebroid(3),
        "tr4": tangent_algebroid(4),
        "so3": so3(),
        "so3_action": so3_action(),
        "anchored": anchored(),
        "rational": rational(),
    }


def level_set_subbundle(A: LieAlgebroid, g: ScalarExpr) -> SubbundleSpec | None:
    """The sections killed by d g, or None when d g vanishes identically."""
    dg = ext_deriv(A, DifferentialForm.scalar(g, A.p))
    row = [dg.coeff((a,)) for a in range(A.p)]
    if all(not c for c in row):
        return None
    gens = nullspace([row], A.p, A.cs)
    return SubbundleSpec(tuple(Section(tuple(v)) for v in gens), "level-set")


def random_subbundle(A: LieAlgebroid, rng: random.Random, r: int, degree: int = 1,
                     tries: int = 20) -> SubbundleSpec:
    for _ in range(tries):
        gens = tuple(Section(tuple(A.cs.random_poly(rng, degree, 3) for _ in range(A.p))) for _ in range(r))
        if rank([list(s.components) for s in gens]) == r:
            return SubbundleSpec(gens, "random")
    raise RuntimeError("could not draw a full-rank subbundle")


def recombine(E: SubbundleSpec, rng: random.Random) -> SubbundleSpec:
    """Same distribution, new generators: a random polynomial change of basis."""
    cs = E.generators[0][0].cs
    for _ in range(20):
        M = [[cs.random_poly(rng, 1, 2) for _ in range(E.r)] for _ in range(E.r)]
        if rank(M) == E.r:
            break
    else:
        raise RuntimeError("could not draw an invertible recombination")
    gens = []
    for row in M:
        s = None
        for coeff, g in zip(row, E.generators):
            term = g.scale(coeff)
            s = term if s is None else s + term
        gens.append(s)
    return SubbundleSpec(tuple(gens), E.name + "+mixed")


def frobenius_corpus(seed: int = 0, random_count: int = 16) -> list[tuple[str, LieAlgebroid, SubbundleSpec]]:
    """Named instances plus ``random_count`` seeded random ones."""
    tr3 = tangent_algebroid(3)
    s = so3()
    sec = tr3.section
    out = [
        ("tr3/plane", tr3, SubbundleSpec((sec(1, 0, 0), sec(0, 1, 0)), "plane")),
        ("tr3/contact", tr3, SubbundleSpec((sec(0, 1, 0), sec(1, 0, "x2")), "contact")),
        ("so3/span_t1", s, SubbundleSpec((s.frame(0),), "span_t1")),
        ("so3/span_t1_t2", s, SubbundleSpec((s.frame(0), s.frame(1)), "span_t1_t2")),
        ("so3_action/pair", so3_action(), SubbundleSpec((so3_action().frame(0), so3_action().frame(1)), "pair")),
    ]
    rng = random.Random(seed)
    pool = [(name, A) for name, A in validated_algebroids().items() if A.p >= 2]
    k = 0
    while k < random_count:
        name, A = pool[rng.randrange(len(pool))]
        kind = k % 3
        if kind == 0:
            E = level_set_subbundle(A, A.cs.random_poly(rng, 2, 3))
            if E is None:
                continue
        elif kind == 1:
            if A.p < 3:
                continue
            E = random_subbundle(A, rng, rng.randint(2, A.p - 1))
        else:
            base = level_set_subbundle(A, A.cs.random_poly(rng, 2, 3))
            if base is None:
                continue
            E = recombine(base, rng)
        out.append((f"{name}/{E.name}#{k}", A, E))
        k += 1
    return out
