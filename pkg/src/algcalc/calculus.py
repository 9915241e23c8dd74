"""Exterior algebra of a Lie algebroid in the fixed coframe ``t^1..t^p``.

Forms store coefficients on strictly increasing 0-based index tuples.  The
wedge uses the determinant convention (no 1/q! factors), so
``(t^1 ^ t^2)(t_1, t_2) = 1`` and a 2-form's coefficient on ``(b, c)`` is its
value on ``(t_b, t_c)``.
"""
from __future__ import annotations

import random
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from algcalc.algebroid import (CheckReport, LieAlgebroid, Section, Witness, anchor_apply,
                               apply_vector_field, bracket)
from algcalc.expr import CoordinateSystem, ScalarExpr

__all__ = [
    "DifferentialForm",
    "wedge",
    "apply_form",
    "interior",
    "lie_derivative",
    "ext_deriv",
    "maurer_cartan_check",
    "verify_calculus_identities",
    "coframe",
    "coordinate_differential",
    "random_section",
    "random_form",
    "IDENTITIES",
]


def sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


class DifferentialForm:
    """A q-form ``sum_I c_I t^I`` over increasing multi-indices I."""

    __slots__ = ("cs", "p", "degree", "coeffs")

    def __init__(self, cs: CoordinateSystem, p: int, degree: int,
                 coeffs: Mapping[tuple[int, ...], ScalarExpr] | None = None):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.cs = cs
        self.p = p
        self.degree = degree
        clean = {}
        for key, val in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"index {key} does not match degree {degree}")
            if any(not 0 <= k < p for k in key) or any(key[i] >= key[i + 1] for i in range(len(key) - 1)):
                raise ValueError(f"index {key} is not strictly increasing in 0..{p - 1}")
            if not isinstance(val, ScalarExpr):
                val = cs.const(val)
            if val:
                clean[key] = val
        self.coeffs = clean

    @classmethod
    def scalar(cls, f: ScalarExpr, p: int) -> "DifferentialForm":
        return cls(f.cs, p, 0, {(): f})

    @classmethod
    def zero(cls, cs: CoordinateSystem, p: int, degree: int) -> "DifferentialForm":
        return cls(cs, p, degree, {})

    @classmethod
    def from_terms(cls, cs: CoordinateSystem, p: int, degree: int,
                   terms: Iterable[tuple[Sequence[int], ScalarExpr]]) -> "DifferentialForm":
        """Accumulate terms on arbitrary (not necessarily sorted) 0-based tuples."""
        acc: dict[tuple[int, ...], ScalarExpr] = {}
        for idx, val in terms:
            s, key = sort_sign(idx)
            if s == 0 or not val:
                continue
            val = val if s > 0 else -val
            acc[key] = acc[key] + val if key in acc else val
        return cls(cs, p, degree, acc)

    def coeff(self, key: Sequence[int]) -> ScalarExpr:
        return self.coeffs.get(tuple(key), self.cs.zero())

    def frame_value(self, idx: Sequence[int]) -> ScalarExpr:
        """Value on the frame sections ``(t_idx[0], ..., t_idx[q-1])``."""
        s, key = sort_sign(idx)
        if s == 0:
            return self.cs.zero()
        c = self.coeffs.get(key)
        if c is None:
            return self.cs.zero()
        return c if s > 0 else -c

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def _same(self, other: "DifferentialForm") -> None:
        if not isinstance(other, DifferentialForm):
            raise TypeError(f"expected a DifferentialForm, got {type(other).__name__}")
        if other.p != self.p or other.cs != self.cs:
            raise ValueError("forms belong to different algebroids")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._same(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return DifferentialForm(self.cs, self.p, self.degree, out)

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm(self.cs, self.p, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, f: ScalarExpr) -> "DifferentialForm":
        if not f:
            return DifferentialForm.zero(self.cs, self.p, self.degree)
        return DifferentialForm(self.cs, self.p, self.degree, {k: f * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (self.p == other.p and self.cs == other.cs and self.degree == other.degree
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.p, self.degree, frozenset(self.coeffs.items())))

    def __str__(self):
        if not self.coeffs:
            return "0"
        if self.degree == 0:
            return str(self.coeffs[()])
        parts = []
        for key in sorted(self.coeffs):
            basis = "^".join(f"t{k + 1}" for k in key)
            parts.append(f"({self.coeffs[key]})*{basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DifferentialForm(degree={self.degree}, {self})"


def coframe(A: LieAlgebroid, a: int) -> DifferentialForm:
    """The coframe 1-form t^a (0-based)."""
    return DifferentialForm(A.cs, A.p, 1, {(a,): A.cs.one()})


def coordinate_differential(A: LieAlgebroid, i: int) -> DifferentialForm:
    """sum_a rho^i_a t^a, the expected value of d x^i (0-based i)."""
    return DifferentialForm(A.cs, A.p, 1, {(a,): A.anchor[i][a] for a in range(A.p)})


def form_from_sequence(A: LieAlgebroid, coeffs: Sequence[ScalarExpr]) -> DifferentialForm:
    """The 1-form sum_a coeffs[a] t^a."""
    return DifferentialForm(A.cs, A.p, 1, {(a,): c for a, c in enumerate(coeffs)})


def wedge(omega: DifferentialForm, theta: DifferentialForm) -> DifferentialForm:
    if omega.p != theta.p or omega.cs != theta.cs:
        raise ValueError("forms belong to different algebroids")
    deg = omega.degree + theta.degree
    if deg > omega.p:
        return DifferentialForm.zero(omega.cs, omega.p, deg)
    terms = []
    for I, a in omega.coeffs.items():
        for J, b in theta.coeffs.items():
            if set(I) & set(J):
                continue
            terms.append((I + J, a * b))
    return DifferentialForm.from_terms(omega.cs, omega.p, deg, terms)


def _form_on_sections(omega: DifferentialForm, sections: Sequence[Section]) -> ScalarExpr:
    # multilinear expansion over section components, skipping zero components
    acc = omega.cs.zero()
    supports = [[(g, s[g]) for g in range(omega.p) if s[g]] for s in sections]

    def rec(j: int, idx: list[int], prod: ScalarExpr | None):
        nonlocal acc
        if j == len(sections):
            v = omega.frame_value(idx)
            if v:
                acc = acc + (v if prod is None else v * prod)
            return
        for g, c in supports[j]:
            if g in idx:
                continue
            idx.append(g)
            rec(j + 1, idx, c if prod is None else prod * c)
            idx.pop()

    rec(0, [], None)
    return acc


def apply_form(omega: DifferentialForm, *sections: Section) -> ScalarExpr:
    """omega(z_1, ..., z_q) as an alternating multilinear evaluation."""
    if len(sections) != omega.degree:
        raise ValueError(f"a {omega.degree}-form takes {omega.degree} sections, got {len(sections)}")
    for s in sections:
        if len(s) != omega.p:
            raise ValueError(f"section has {len(s)} components, expected {omega.p}")
    if omega.degree == 0:
        return omega.coeff(())
    return _form_on_sections(omega, sections)


def interior(z: Section, omega: DifferentialForm) -> DifferentialForm:
    """i_z omega; zero on 0-forms."""
    q = omega.degree
    if q == 0:
        return DifferentialForm.zero(omega.cs, omega.p, 0)
    terms = []
    for key, c in omega.coeffs.items():
        for pos, g in enumerate(key):
            if z[g]:
                rest = key[:pos] + key[pos + 1:]
                v = z[g] * c
                terms.append((rest, v if pos % 2 == 0 else -v))
    return DifferentialForm.from_terms(omega.cs, omega.p, q - 1, terms)


def _replace_slot(omega: DifferentialForm, key: tuple[int, ...], pos: int, s: Section) -> ScalarExpr:
    # omega(t_k0, ..., s at pos, ..., t_kq)
    acc = omega.cs.zero()
    idx = list(key)
    for g in range(omega.p):
        if s[g]:
            idx[pos] = g
            v = omega.frame_value(idx)
            if v:
                acc = acc + s[g] * v
    return acc


def lie_derivative(A: LieAlgebroid, z: Section, omega: DifferentialForm) -> DifferentialForm:
    """Covariant Lie derivative, evaluated from its defining formula on frame tuples."""
    q = omega.degree
    if q == 0:
        return DifferentialForm.scalar(anchor_apply(A, z, omega.coeff(())), A.p)
    frame_brackets = [bracket(A, z, A.frame(b)) for b in range(A.p)]
    coeffs = {}
    for key in combinations(range(A.p), q):
        val = anchor_apply(A, z, omega.coeff(key))
        for pos, b in enumerate(key):
            val = val - _replace_slot(omega, key, pos, frame_brackets[b])
        coeffs[key] = val
    return DifferentialForm(A.cs, A.p, q, coeffs)


def ext_deriv(A: LieAlgebroid, omega: DifferentialForm) -> DifferentialForm:
    """d^F via the invariant alternating-sum formula on increasing frame tuples.

    On frame sections the first sum reduces to anchor derivatives of the
    coefficients and the second to contractions with the structure functions.
    """
    q = omega.degree
    if q >= A.p:
        return DifferentialForm.zero(A.cs, A.p, q + 1)
    anchor_fields = [[A.anchor[i][a] for i in range(A.n)] for a in range(A.p)]
    coeffs = {}
    for key in combinations(range(A.p), q + 1):
        val = A.cs.zero()
        for i, k in enumerate(key):
            c = omega.coeff(key[:i] + key[i + 1:])
            if c:
                d = apply_vector_field(anchor_fields[k], c)
                if d:
                    val = val + d if i % 2 == 0 else val - d
        for i, j in combinations(range(q + 1), 2):
            rest = key[:i] + key[i + 1:j] + key[j + 1:]
            sign = 1 if (i + j) % 2 == 0 else -1
            for g in range(A.p):
                L = A.structure[g][key[i]][key[j]]
                if L:
                    v = omega.frame_value((g,) + rest)
                    if v:
                        val = val + L * v if sign > 0 else val - L * v
        coeffs[key] = val
    return DifferentialForm(A.cs, A.p, q + 1, coeffs)


def mc_expected_coframe(A: LieAlgebroid, a: int) -> DifferentialForm:
    """-1/2 L^a_bc t^b ^ t^c, i.e. coefficient -L^a_bc on each increasing (b, c)."""
    return DifferentialForm(A.cs, A.p, 2, {(b, c): -A.structure[a][b][c]
                                           for b, c in combinations(range(A.p), 2)})


def maurer_cartan_check(A: LieAlgebroid) -> CheckReport:
    """Compare d t^a and d x^i against the structure equations.

    Witness indices: ("t", a, b, c) for the coframe equations and ("x", i, a)
    for the coordinate equations, all 1-based.
    """
    witnesses = []
    for a in range(A.p):
        diff = ext_deriv(A, coframe(A, a)) - mc_expected_coframe(A, a)
        for key, r in sorted(diff.coeffs.items()):
            witnesses.append(Witness(("t", a + 1) + tuple(k + 1 for k in key), r, "coframe equation"))
    for i in range(A.n):
        x = DifferentialForm.scalar(A.cs.var(i + 1), A.p)
        diff = ext_deriv(A, x) - coordinate_differential(A, i)
        for key, r in sorted(diff.coeffs.items()):
            witnesses.append(Witness(("x", i + 1) + tuple(k + 1 for k in key), r, "coordinate equation"))
    return CheckReport("maurer-cartan", witnesses)


# --- random inputs --------------------------------------------------------

def random_section(A: LieAlgebroid, rng: random.Random, degree: int = 2, terms: int = 2) -> Section:
    return Section(tuple(A.cs.random_poly(rng, degree, terms) for _ in range(A.p)))


def random_form(A: LieAlgebroid, rng: random.Random, degree: int | None = None,
                poly_degree: int = 2, terms: int = 2) -> DifferentialForm:
    """Random form of the given degree (default: uniform in 0..min(p, 4))."""
    if degree is None:
        degree = rng.randint(0, min(A.p, 4))
    coeffs = {key: A.cs.random_poly(rng, poly_degree, terms)
              for key in combinations(range(A.p), degree)}
    return DifferentialForm(A.cs, A.p, degree, coeffs)


# --- identity verification -------------------------------------------------

def _lie_leibniz(A, z, v, w, t):
    lhs = lie_derivative(A, z, wedge(w, t))
    return lhs - (wedge(lie_derivative(A, z, w), t) + wedge(w, lie_derivative(A, z, t)))


def _interior_leibniz(A, z, v, w, t):
    lhs = interior(z, wedge(w, t))
    # i_z of a 0-form is zero and has no degree-(q-1) representative
    if w.degree > 0:
        lhs = lhs - wedge(interior(z, w), t)
    if t.degree > 0:
        second = wedge(w, interior(z, t))
        lhs = lhs + second if w.degree % 2 else lhs - second
    return lhs


def _lie_interior_commutator(A, z, v, w, t):
    # L_v i_z - i_z L_v = i_[v,z]; with [z,v] in the last slot the sign flips
    if w.degree == 0:
        return lie_derivative(A, v, interior(z, w)) - interior(z, lie_derivative(A, v, w))
    return (lie_derivative(A, v, interior(z, w)) - interior(z, lie_derivative(A, v, w))
            - interior(bracket(A, v, z), w))


def _cartan_formula(A, z, v, w, t):
    rhs = interior(z, ext_deriv(A, w))
    if w.degree > 0:
        rhs = rhs + ext_deriv(A, interior(z, w))
    return lie_derivative(A, z, w) - rhs


def _d_leibniz(A, z, v, w, t):
    second = wedge(w, ext_deriv(A, t))
    if w.degree % 2:
        second = -second
    return ext_deriv(A, wedge(w, t)) - (wedge(ext_deriv(A, w), t) + second)


def _lie_d_commute(A, z, v, w, t):
    return lie_derivative(A, z, ext_deriv(A, w)) - ext_deriv(A, lie_derivative(A, z, w))


def _d_squared(A, z, v, w, t):
    return ext_deriv(A, ext_deriv(A, w))


IDENTITIES: dict[str, Callable] = {
    "lie_leibniz": _lie_leibniz,
    "interior_leibniz": _interior_leibniz,
    "lie_interior_commutator": _lie_interior_commutator,
    "cartan_formula": _cartan_formula,
    "d_leibniz": _d_leibniz,
    "lie_d_commute": _lie_d_commute,
    "d_squared": _d_squared,
}


def _sample_pair_degrees(A: LieAlgebroid, rng: random.Random) -> tuple[int, int]:
    cap = min(A.p, 4)
    q = rng.randint(0, cap)
    r = rng.randint(0, max(0, cap - q))
    return q, r


def verify_calculus_identities(A: LieAlgebroid, samples: int = 50, seed: int = 0,
                               identities: Iterable[str] | None = None) -> CheckReport:
    """Check every calculus identity symbolically on ``samples`` random inputs each.

    Inputs derive entirely from ``seed``.  Witness indices are
    (sample, *coefficient index), 1-based; the label names the identity.
    """
    names = list(identities) if identities is not None else list(IDENTITIES)
    witnesses = []
    counts = {}
    for name in names:
        fn = IDENTITIES[name]
        rng = random.Random(f"{seed}:{name}")
        for s in range(samples):
            q, r = _sample_pair_degrees(A, rng)
            z = random_section(A, rng)
            v = random_section(A, rng)
            w = random_form(A, rng, q)
            t = random_form(A, rng, r)
            residual = fn(A, z, v, w, t)
            for key, val in sorted(residual.coeffs.items()):
                witnesses.append(Witness((s + 1,) + tuple(k + 1 for k in key), val, name))
        counts[name] = samples
    return CheckReport("calculus-identities", witnesses, {"samples": counts, "seed": seed})
