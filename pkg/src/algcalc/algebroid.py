"""Lie algebroids over a single chart in a fixed frame.

A :class:`LieAlgebroid` is the data ``(n, p, anchor, structure)``: the anchor
matrix ``anchor[i][a]`` sends the frame section ``t_a`` to the vector field
``sum_i anchor[i][a] d/dx^i`` and ``structure[c][a][b]`` is the coefficient of
``t_c`` in ``[t_a, t_b]``.  Indices are 0-based in code and 1-based in every
user-facing place (witnesses, reports, definition files).

The axioms are *checked*, never enforced: a broken algebroid is still a
value so that it can be diagnosed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

from algcalc.expr import CoordinateSystem, ScalarExpr

__all__ = [
    "LieAlgebroid",
    "Section",
    "Witness",
    "CheckReport",
    "anchor_apply",
    "bracket",
    "check_antisymmetry",
    "check_anchor_compatibility",
    "check_jacobi",
    "validate",
    "tangent_algebroid",
    "lie_algebra",
]


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Section:
    """A section ``z = z^a t_a``, stored by its frame components."""

    components: tuple[ScalarExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self):
        return len(self.components)

    def __getitem__(self, a):
        return self.components[a]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "Section") -> "Section":
        return Section(tuple(u + v for u, v in zip(self, other)))

    def __sub__(self, other: "Section") -> "Section":
        return Section(tuple(u - v for u, v in zip(self, other)))

    def __neg__(self) -> "Section":
        return Section(tuple(-u for u in self))

    def scale(self, f: ScalarExpr) -> "Section":
        return Section(tuple(f * u for u in self))

    @property
    def is_zero(self) -> bool:
        return all(u.is_zero for u in self)

    def __str__(self):
        return "(" + ", ".join(str(u) for u in self) + ")"


@dataclass(frozen=True)
class Witness:
    """One failing instance of an identity: 1-based indices and the nonzero residual."""

    indices: tuple
    residual: ScalarExpr
    label: str = ""

    def __post_init__(self):
        if self.residual.is_zero:
            raise ValueError("a witness residual must be nonzero")


@dataclass(frozen=True)
class CheckReport:
    name: str
    witnesses: tuple[Witness, ...] = ()
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "witnesses", tuple(self.witnesses))

    @property
    def passed(self) -> bool:
        return not self.witnesses

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self):
        return self.passed


class LieAlgebroid:
    def __init__(self, cs: CoordinateSystem, anchor: Sequence[Sequence[ScalarExpr]],
                 structure: Sequence[Sequence[Sequence[ScalarExpr]]]):
        self.cs = cs
        self.n = cs.n
        anchor = tuple(tuple(row) for row in anchor)
        if len(anchor) != self.n:
            raise DimensionError(f"anchor has {len(anchor)} rows, expected n={self.n}")
        p = len(anchor[0]) if anchor else 0
        if any(len(row) != p for row in anchor):
            raise DimensionError("anchor rows have unequal length")
        if p < 1:
            raise DimensionError("fibre rank must be at least 1")
        self.p = p
        structure = tuple(tuple(tuple(r) for r in plane) for plane in structure)
        if len(structure) != p or any(len(plane) != p or any(len(r) != p for r in plane)
                                      for plane in structure):
            raise DimensionError(f"structure must be a {p}x{p}x{p} array")
        self.anchor = anchor
        self.structure = structure

    @classmethod
    def from_brackets(cls, cs: CoordinateSystem, anchor, brackets: dict[tuple[int, int], Sequence]):
        """Build from 1-based ``{(a, b): components of [t_a, t_b]}`` with ``a < b``.

        The remaining entries are completed by antisymmetry.
        """
        p = len(anchor[0])
        zero = cs.zero()
        L = [[[zero] * p for _ in range(p)] for _ in range(p)]
        for (a, b), comps in brackets.items():
            if not a < b:
                raise ValueError(f"bracket keys must satisfy a < b, got {(a, b)}")
            for c, val in enumerate(comps):
                val = val if isinstance(val, ScalarExpr) else cs.const(val)
                L[c][a - 1][b - 1] = val
                L[c][b - 1][a - 1] = -val
        return cls(cs, anchor, L)

    def frame(self, a: int) -> Section:
        """The frame section t_a (0-based)."""
        zero, one = self.cs.zero(), self.cs.one()
        return Section(tuple(one if b == a else zero for b in range(self.p)))

    def section(self, *components) -> Section:
        comps = []
        for c in components:
            if isinstance(c, str):
                c = self.cs.parse(c)
            elif not isinstance(c, ScalarExpr):
                c = self.cs.const(c)
            comps.append(c)
        if len(comps) != self.p:
            raise DimensionError(f"section needs {self.p} components, got {len(comps)}")
        return Section(tuple(comps))

    def zero_section(self) -> Section:
        return Section((self.cs.zero(),) * self.p)

    def structure_at(self, c: int, a: int, b: int) -> ScalarExpr:
        return self.structure[c][a][b]

    def __eq__(self, other):
        return (isinstance(other, LieAlgebroid) and self.cs == other.cs
                and self.anchor == other.anchor and self.structure == other.structure)

    def __hash__(self):
        return hash((self.cs, self.anchor, self.structure))

    def __repr__(self):
        return f"LieAlgebroid(n={self.n}, p={self.p}, coords={list(self.cs.names)})"


def tangent_algebroid(n: int, names: Sequence[str] | None = None) -> LieAlgebroid:
    """TR^n: identity anchor, zero structure functions."""
    cs = CoordinateSystem(names or [f"x{i + 1}" for i in range(n)])
    zero, one = cs.zero(), cs.one()
    anchor = [[one if i == a else zero for a in range(n)] for i in range(n)]
    L = [[[zero] * n for _ in range(n)] for _ in range(n)]
    return LieAlgebroid(cs, anchor, L)


def lie_algebra(constants, names: Sequence[str] = ("x1",)) -> LieAlgebroid:
    """Zero-anchor algebroid whose structure functions are the given constants.

    ``constants[c][a][b]`` is the coefficient of t_c in [t_a, t_b] (0-based).
    """
    cs = CoordinateSystem(names)
    p = len(constants)
    anchor = [[cs.zero()] * p for _ in range(cs.n)]
    L = [[[cs.const(constants[c][a][b]) for b in range(p)] for a in range(p)] for c in range(p)]
    return LieAlgebroid(cs, anchor, L)


def _check_section(A: LieAlgebroid, z: Section) -> None:
    if len(z) != A.p:
        raise DimensionError(f"section has {len(z)} components, algebroid rank is {A.p}")


def anchor_vector_field(A: LieAlgebroid, z: Section) -> list[ScalarExpr]:
    """Components of the vector field rho(z) in the coordinate basis."""
    _check_section(A, z)
    out = []
    for i in range(A.n):
        acc = A.cs.zero()
        for a in range(A.p):
            if z[a] and A.anchor[i][a]:
                acc = acc + A.anchor[i][a] * z[a]
        out.append(acc)
    return out


def apply_vector_field(field: Sequence[ScalarExpr], f: ScalarExpr) -> ScalarExpr:
    acc = f.cs.zero()
    if f.is_constant:
        return acc
    for i, v in enumerate(field):
        if v:
            d = f.diff(i + 1)
            if d:
                acc = acc + v * d
    return acc


def anchor_apply(A: LieAlgebroid, z: Section, f: ScalarExpr) -> ScalarExpr:
    """rho(z)(f) = sum_{i,a} rho^i_a z^a df/dx^i."""
    return apply_vector_field(anchor_vector_field(A, z), f)


def bracket(A: LieAlgebroid, u: Section, v: Section) -> Section:
    """[u, v]^c = u^a v^b L^c_ab + rho(u)(v^c) - rho(v)(u^c)."""
    _check_section(A, u)
    _check_section(A, v)
    ru = anchor_vector_field(A, u)
    rv = anchor_vector_field(A, v)
    out = []
    for c in range(A.p):
        acc = apply_vector_field(ru, v[c]) - apply_vector_field(rv, u[c])
        plane = A.structure[c]
        for a in range(A.p):
            if not u[a]:
                continue
            for b in range(A.p):
                if v[b] and plane[a][b]:
                    acc = acc + u[a] * v[b] * plane[a][b]
        out.append(acc)
    return Section(tuple(out))


def check_antisymmetry(A: LieAlgebroid) -> CheckReport:
    witnesses = []
    for a in range(A.p):
        for b in range(a, A.p):
            for c in range(A.p):
                r = A.structure[c][a][b] + A.structure[c][b][a]
                if r:
                    witnesses.append(Witness((a + 1, b + 1, c + 1), r))
    return CheckReport("antisymmetry", witnesses)


def check_anchor_compatibility(A: LieAlgebroid) -> CheckReport:
    """L^c_ab rho^k_c = rho^i_a d rho^k_b/dx^i - rho^j_b d rho^k_a/dx^j for all (a, b, k).

    A witness residual is RHS - LHS.
    """
    witnesses = []
    cols = [[A.anchor[i][a] for i in range(A.n)] for a in range(A.p)]
    for a in range(A.p):
        for b in range(A.p):
            if a == b:
                continue
            for k in range(A.n):
                lhs = A.cs.zero()
                for c in range(A.p):
                    if A.structure[c][a][b] and A.anchor[k][c]:
                        lhs = lhs + A.structure[c][a][b] * A.anchor[k][c]
                rhs = (apply_vector_field(cols[a], A.anchor[k][b])
                       - apply_vector_field(cols[b], A.anchor[k][a]))
                r = rhs - lhs
                if r:
                    witnesses.append(Witness((a + 1, b + 1, k + 1), r))
    return CheckReport("anchor_compatibility", witnesses)


def check_jacobi(A: LieAlgebroid) -> CheckReport:
    """Cyclic sum of [t_a, [t_b, t_c]] over frame triples a < b < c.

    Witness indices are (a, b, c, component).
    """
    witnesses = []
    for a, b, c in combinations(range(A.p), 3):
        ta, tb, tc = A.frame(a), A.frame(b), A.frame(c)
        total = (bracket(A, ta, bracket(A, tb, tc))
                 + bracket(A, tb, bracket(A, tc, ta))
                 + bracket(A, tc, bracket(A, ta, tb)))
        for g, r in enumerate(total):
            if r:
                witnesses.append(Witness((a + 1, b + 1, c + 1, g + 1), r))
    return CheckReport("jacobi", witnesses)


def validate(A: LieAlgebroid) -> CheckReport:
    """Conjunction of antisymmetry, anchor compatibility and Jacobi."""
    parts = [check_antisymmetry(A), check_anchor_compatibility(A), check_jacobi(A)]
    witnesses = []
    for rep in parts:
        label = rep.name.replace("_", " ")
        witnesses.extend(Witness(w.indices, w.residual, label) for w in rep.witnesses)
    failed = [rep.name.replace("_", " ") for rep in parts if not rep.passed]
    return CheckReport("axioms", witnesses,
                       {"checks": {rep.name: rep.verdict for rep in parts}, "failed": failed})
