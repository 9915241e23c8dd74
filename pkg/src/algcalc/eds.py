"""Exterior differential systems generated by an annihilator.

The ideal is kept intensionally as its 1-form generators ``G^{r+1}..G^p``.
Membership is the top-wedge criterion ``omega ^ G^{r+1} ^ ... ^ G^p == 0``,
exact for pointwise independent generators; certificates come from
decomposing ``omega`` in a coframe that ends with the generators.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from algcalc.algebroid import CheckReport, LieAlgebroid, Section, Witness
from algcalc.calculus import DifferentialForm, apply_form, ext_deriv, wedge
from algcalc.ids import (AnnihilatorBasis, SubbundleSpec, annihilator, cartan_test,
                         involutive_bracket_test)
from algcalc.linalg import fraction_free_echelon, inverse

__all__ = [
    "GeneratedIdeal",
    "ideal_membership",
    "membership_certificate",
    "expand_certificate",
    "top_wedge",
    "eds_closure_check",
    "vanishes_on_ids",
    "vanishing_report",
    "eds_involutivity_equivalence",
]


@dataclass(frozen=True)
class GeneratedIdeal:
    generators: AnnihilatorBasis
    ambient: LieAlgebroid

    @classmethod
    def of(cls, A: LieAlgebroid, E: SubbundleSpec) -> "GeneratedIdeal":
        return cls(annihilator(A, E), A)

    @property
    def codim(self) -> int:
        return len(self.generators)

    @property
    def r(self) -> int:
        return self.ambient.p - self.codim


def top_wedge(I: GeneratedIdeal, omega: DifferentialForm) -> DifferentialForm:
    out = omega
    for g in I.generators:
        out = wedge(out, g)
    return out


def _check_degree(omega: DifferentialForm) -> None:
    if omega.degree < 1:
        raise ValueError("membership of 0-forms is not defined: the ideal contains no nonzero functions")


def ideal_membership(I: GeneratedIdeal, omega: DifferentialForm) -> bool:
    _check_degree(omega)
    return top_wedge(I, omega).is_zero


def _complementary_coframe(I: GeneratedIdeal):
    # coframe rows [t^f for non-pivot f] + generators, and its dual frame
    A = I.ambient
    rows = [[g.coeff((a,)) for a in range(A.p)] for g in I.generators]
    _, pivots = fraction_free_echelon(rows) if rows else ([], [])
    free = [c for c in range(A.p) if c not in pivots]
    zero, one = A.cs.zero(), A.cs.one()
    coframe_rows = [[one if a == f else zero for a in range(A.p)] for f in free] + rows
    inv = inverse(coframe_rows)
    frame = [Section(tuple(inv[a][v] for a in range(A.p))) for v in range(A.p)]
    coforms = [DifferentialForm(A.cs, A.p, 1, {(a,): c for a, c in enumerate(row)})
               for row in coframe_rows]
    return coforms, frame


def membership_certificate(I: GeneratedIdeal, omega: DifferentialForm) -> dict[int, DifferentialForm] | None:
    """Forms ``Omega_k`` (k indexes the generators) with ``omega = sum_k Omega_k ^ G_k``.

    Returns None when omega is not in the ideal.
    """
    _check_degree(omega)
    A = I.ambient
    r = I.r
    coforms, frame = _complementary_coframe(I)
    q = omega.degree
    cert = {k: DifferentialForm.zero(A.cs, A.p, q - 1) for k in range(I.codim)}
    for U in combinations(range(A.p), q):
        c = apply_form(omega, *(frame[u] for u in U))
        if not c:
            continue
        last = U[-1]
        if last < r:
            return None
        head = DifferentialForm.scalar(c, A.p)
        for u in U[:-1]:
            head = wedge(head, coforms[u])
        cert[last - r] = cert[last - r] + head
    return cert


def expand_certificate(I: GeneratedIdeal, cert: dict[int, DifferentialForm]) -> DifferentialForm:
    forms = [wedge(om, I.generators[k]) for k, om in sorted(cert.items())]
    out = forms[0]
    for f in forms[1:]:
        out = out + f
    return out


def eds_closure_check(A: LieAlgebroid, E: SubbundleSpec) -> CheckReport:
    """d I is contained in I, checked on the generators.

    Witnesses are ``(alpha, *top-wedge index)`` with the nonzero top-wedge
    coefficient of ``d G^alpha``.
    """
    I = GeneratedIdeal.of(A, E)
    witnesses = []
    for k, g in enumerate(I.generators):
        tw = top_wedge(I, ext_deriv(A, g))
        for key, val in sorted(tw.coeffs.items()):
            witnesses.append(Witness((I.r + k + 1,) + tuple(i + 1 for i in key), val))
    return CheckReport("eds", witnesses)


def vanishing_report(omega: DifferentialForm, E: SubbundleSpec) -> CheckReport:
    """Evaluate omega on every increasing tuple of generators; witnesses are the nonzero values."""
    k = omega.degree
    if k < 1:
        raise ValueError("vanishing of a 0-form on sections is vacuous")
    witnesses = []
    if k <= E.r:
        for tup in combinations(range(E.r), k):
            v = apply_form(omega, *(E.generators[a] for a in tup))
            if v:
                witnesses.append(Witness(tuple(a + 1 for a in tup), v))
    return CheckReport("vanishes", witnesses)


def vanishes_on_ids(omega: DifferentialForm, E: SubbundleSpec) -> bool:
    """True iff omega(u_1..u_k) = 0 for all sections u_i of E.

    Forms of degree k > r vanish by alternation and return True.
    """
    return vanishing_report(omega, E).passed


def eds_involutivity_equivalence(A: LieAlgebroid, E: SubbundleSpec) -> CheckReport:
    """Run the bracket, Cartan and closure tests; pass iff their verdicts agree."""
    reports = {
        "involutive": involutive_bracket_test(A, E),
        "cartan": cartan_test(A, E),
        "eds": eds_closure_check(A, E),
    }
    verdicts = {name: rep.verdict for name, rep in reports.items()}
    witnesses = []
    if len(set(verdicts.values())) > 1:
        label = "verdicts disagree: " + ", ".join(f"{k}={v}" for k, v in verdicts.items())
        witnesses.append(Witness(tuple(verdicts.values()), A.cs.one(), label))
    return CheckReport("equivalence", witnesses, {"verdicts": verdicts, "reports": reports})
