"""Interior differential systems: subbundles spanned by sections.

Two independent involutivity decisions live here: the direct bracket test
(is every ``[S_a, S_b]`` back in the span?) and the Cartan test (does the
``Theta^b ^ Theta^c`` block of every ``d Theta^alpha`` vanish in an adapted
coframe?).  All index conventions in reports are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from algcalc.algebroid import CheckReport, LieAlgebroid, Section, Witness, bracket
from algcalc.calculus import DifferentialForm, apply_form, ext_deriv, form_from_sequence, wedge
from algcalc.linalg import fraction_free_echelon, inverse, nullspace, rank, transpose

__all__ = [
    "RankDeficiencyError",
    "SubbundleSpec",
    "AnnihilatorBasis",
    "AdaptedCoframe",
    "TwoFormDecomposition",
    "CartanDecomposition",
    "annihilator",
    "extend_frame",
    "in_span",
    "in_span_by_rank",
    "involutive_bracket_test",
    "decompose_two_form",
    "cartan_decomposition",
    "cartan_test",
]


class RankDeficiencyError(ValueError):
    """Generators are linearly dependent over the function field."""


@dataclass(frozen=True)
class SubbundleSpec:
    generators: tuple[Section, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise ValueError("a subbundle needs at least one generator")
        p = len(self.generators[0])
        if any(len(s) != p for s in self.generators):
            raise ValueError("generators have unequal lengths")

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def p(self) -> int:
        return len(self.generators[0])

    def matrix(self):
        return [list(s.components) for s in self.generators]

    def check_rank(self) -> None:
        k = rank(self.matrix())
        if k != self.r:
            raise RankDeficiencyError(f"{self.r} generators span a rank-{k} module")


@dataclass(frozen=True)
class AnnihilatorBasis:
    coforms: tuple[DifferentialForm, ...]

    def __len__(self):
        return len(self.coforms)

    def __iter__(self):
        return iter(self.coforms)

    def __getitem__(self, i):
        return self.coforms[i]


@dataclass(frozen=True)
class AdaptedCoframe:
    """Frame ``S_1..S_p`` extending the generators and its dual coframe."""

    frame: tuple[Section, ...]
    coforms: tuple[DifferentialForm, ...]
    r: int

    @property
    def p(self) -> int:
        return len(self.frame)

    @property
    def tail(self) -> tuple[DifferentialForm, ...]:
        return self.coforms[self.r:]


def _check(A: LieAlgebroid, E: SubbundleSpec) -> None:
    if E.p != A.p:
        raise ValueError(f"subbundle generators have {E.p} components, algebroid rank is {A.p}")
    E.check_rank()


def annihilator(A: LieAlgebroid, E: SubbundleSpec) -> AnnihilatorBasis:
    """1-forms spanning the annihilator of E, with polynomial coefficients."""
    _check(A, E)
    vecs = nullspace(E.matrix(), A.p, A.cs)
    return AnnihilatorBasis(tuple(form_from_sequence(A, v) for v in vecs))


def extend_frame(A: LieAlgebroid, E: SubbundleSpec) -> AdaptedCoframe:
    """Complete the generators with the frame sections of the non-pivot columns.

    The pivot columns of the generator matrix (chosen left to right) are the
    ones E already covers; appending ``t_f`` for every other column ``f``
    yields a frame.  The coframe is the inverse transpose of the frame matrix.
    """
    _check(A, E)
    _, pivots = fraction_free_echelon(E.matrix())
    free = [c for c in range(A.p) if c not in pivots]
    frame = list(E.generators) + [A.frame(f) for f in free]
    if len(frame) != A.p:
        raise RankDeficiencyError("no generic completion of the generators to a frame")
    M = [list(s.components) for s in frame]
    C = transpose(inverse(M))
    coforms = tuple(form_from_sequence(A, row) for row in C)
    return AdaptedCoframe(tuple(frame), coforms, E.r)


def in_span_by_rank(E: SubbundleSpec, s: Section) -> bool:
    """Membership via the rank of the stacked (r+1) x p matrix."""
    return rank(E.matrix() + [list(s.components)]) == E.r


def in_span(ann: AnnihilatorBasis, s: Section) -> bool:
    """Membership via pairing with the annihilator."""
    return all(not apply_form(theta, s) for theta in ann)


def involutive_bracket_test(A: LieAlgebroid, E: SubbundleSpec) -> CheckReport:
    """Is the span of the generators closed under the bracket?

    Witnesses are ``(a, b, alpha)`` with residual ``Theta^alpha([S_a, S_b])``,
    alpha numbering the annihilator forms from r+1.
    """
    ann = annihilator(A, E)
    witnesses = []
    for a, b in combinations(range(E.r), 2):
        br = bracket(A, E.generators[a], E.generators[b])
        for k, theta in enumerate(ann):
            v = apply_form(theta, br)
            if v:
                witnesses.append(Witness((a + 1, b + 1, E.r + k + 1), v))
    return CheckReport("involutive", witnesses)


@dataclass(frozen=True)
class TwoFormDecomposition:
    """Coefficients of a 2-form on ``Theta^u ^ Theta^v`` (u < v, 0-based)."""

    r: int
    coeffs: dict

    def block(self, kind: str) -> dict:
        r = self.r
        sel = {"A": lambda u, v: v < r, "B": lambda u, v: u < r <= v, "C": lambda u, v: u >= r}[kind]
        return {k: c for k, c in self.coeffs.items() if sel(*k)}

    def reconstruct(self, cf: AdaptedCoframe) -> DifferentialForm:
        p = cf.p
        cs = cf.frame[0][0].cs
        out = DifferentialForm.zero(cs, p, 2)
        for (u, v), c in self.coeffs.items():
            out = out + wedge(cf.coforms[u], cf.coforms[v]).scale(c)
        return out


def decompose_two_form(A: LieAlgebroid, cf: AdaptedCoframe, omega: DifferentialForm) -> TwoFormDecomposition:
    """Express a 2-form in the adapted basis; the (u, v) coefficient is omega(S_u, S_v)."""
    if omega.degree != 2:
        raise ValueError(f"expected a 2-form, got degree {omega.degree}")
    coeffs = {}
    for u, v in combinations(range(cf.p), 2):
        c = apply_form(omega, cf.frame[u], cf.frame[v])
        if c:
            coeffs[(u, v)] = c
    return TwoFormDecomposition(cf.r, coeffs)


@dataclass(frozen=True)
class CartanDecomposition:
    """A/B/C blocks of ``d Theta^alpha`` for each annihilator index alpha (0-based, >= r).

    ``omegas[alpha][gamma]`` is the candidate 1-form
    ``B^alpha_{b gamma} Theta^b + 1/2 C^alpha_{beta gamma} Theta^beta``.
    """

    coframe: AdaptedCoframe
    differentials: dict
    parts: dict
    omegas: dict = field(default_factory=dict)

    def a_block(self, alpha: int) -> dict:
        return self.parts[alpha].block("A")

    def b_block(self, alpha: int) -> dict:
        return self.parts[alpha].block("B")

    def c_block(self, alpha: int) -> dict:
        return self.parts[alpha].block("C")

    def reconstruct_with_omegas(self, alpha: int) -> DifferentialForm:
        """sum_gamma Omega^alpha_gamma ^ Theta^gamma."""
        cf = self.coframe
        cs = cf.frame[0][0].cs
        out = DifferentialForm.zero(cs, cf.p, 2)
        for gamma, om in self.omegas[alpha].items():
            out = out + wedge(om, cf.coforms[gamma])
        return out


def cartan_decomposition(A: LieAlgebroid, E: SubbundleSpec) -> CartanDecomposition:
    cf = extend_frame(A, E)
    r, p = cf.r, cf.p
    cs = A.cs
    half = cs.const(Fraction(1, 2))
    diffs, parts, omegas = {}, {}, {}
    for alpha in range(r, p):
        d = ext_deriv(A, cf.coforms[alpha])
        dec = decompose_two_form(A, cf, d)
        diffs[alpha], parts[alpha] = d, dec
        om = {}
        for gamma in range(r, p):
            form = DifferentialForm.zero(cs, p, 1)
            for b in range(r):
                B = dec.coeffs.get((b, gamma))
                if B:
                    form = form + cf.coforms[b].scale(B)
            for beta in range(r, p):
                if beta == gamma:
                    continue
                C = dec.coeffs.get((beta, gamma)) if beta < gamma else dec.coeffs.get((gamma, beta))
                if C:
                    C = C if beta < gamma else -C
                    form = form + cf.coforms[beta].scale(half * C)
            om[gamma] = form
        omegas[alpha] = om
    return CartanDecomposition(cf, diffs, parts, omegas)


def cartan_test(A: LieAlgebroid, E: SubbundleSpec) -> CheckReport:
    """Involutive iff every A-block coefficient of every d Theta^alpha vanishes.

    On failure the witnesses are ``(alpha, b, c)`` with residual ``A^alpha_bc``.
    On success the report carries the Omega 1-forms, and the reconstruction
    ``d Theta^alpha = sum_gamma Omega^alpha_gamma ^ Theta^gamma`` is asserted.
    """
    dec = cartan_decomposition(A, E)
    witnesses = []
    for alpha in sorted(dec.parts):
        for (b, c), val in sorted(dec.a_block(alpha).items()):
            witnesses.append(Witness((alpha + 1, b + 1, c + 1), val))
    if not witnesses:
        for alpha in dec.parts:
            if dec.reconstruct_with_omegas(alpha) != dec.differentials[alpha]:
                raise AssertionError(f"Omega reconstruction failed for alpha={alpha + 1}")
    return CheckReport("cartan", witnesses, {"decomposition": dec})
