"""Exact rational functions in the base coordinates.

Every :class:`ScalarExpr` is kept in canonical form: numerator and
denominator are coprime polynomials over QQ and the denominator's leading
coefficient (graded lex, ``x1 > x2 > ...``) is 1.  Two expressions are equal
as rational functions iff their canonical forms are identical, so ``==`` is
a decision procedure.

Polynomial arithmetic and the multivariate gcd are delegated to sympy's
sparse ``PolyRing``; nothing here ever touches floating point.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

__all__ = [
    "Coordinate",
    "CoordinateSystem",
    "ScalarExpr",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "PoleError",
    "parse_expr",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "partial",
    "is_zero",
    "eval_at",
]

Number = Union[int, Fraction]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text!r}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class PoleError(ZeroDivisionError):
    """The denominator vanishes at the evaluation point."""


@dataclass(frozen=True)
class Coordinate:
    index: int
    name: str


class CoordinateSystem:
    """The chart: an ordered list of coordinate names and its polynomial ring."""

    def __init__(self, names: Sequence[str]):
        names = list(names)
        if not names:
            raise ValueError("at least one coordinate is required")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for name in names:
            if not _is_identifier(name):
                raise ValueError(f"invalid coordinate name {name!r}")
        self.coords = tuple(Coordinate(i + 1, nm) for i, nm in enumerate(names))
        self.names = tuple(names)
        self.ring = PolyRing(",".join(names), QQ, grlex)

    @property
    def n(self) -> int:
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, CoordinateSystem) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"CoordinateSystem({list(self.names)!r})"

    # constructors

    def const(self, value: Number) -> "ScalarExpr":
        c = Fraction(value)
        return ScalarExpr._raw(self, self.ring(QQ(c.numerator, c.denominator)), self.ring.one)

    def zero(self) -> "ScalarExpr":
        return ScalarExpr._raw(self, self.ring.zero, self.ring.one)

    def one(self) -> "ScalarExpr":
        return ScalarExpr._raw(self, self.ring.one, self.ring.one)

    def var(self, i: int) -> "ScalarExpr":
        """The coordinate function x^i (1-based)."""
        self._check_index(i)
        return ScalarExpr._raw(self, self.ring.gens[i - 1], self.ring.one)

    def poly(self, p: PolyElement) -> "ScalarExpr":
        return ScalarExpr._raw(self, p, self.ring.one)

    def frac(self, num: PolyElement, den: PolyElement) -> "ScalarExpr":
        return ScalarExpr._make(self, num, den)

    def parse(self, text: str) -> "ScalarExpr":
        return parse_expr(text, self)

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate index {i} out of range 1..{self.n}")

    def random_poly(self, rng: random.Random, degree: int = 2, terms: int = 3,
                    coeff_range: int = 3) -> "ScalarExpr":
        """A random polynomial with small integer coefficients (may be zero)."""
        R = self.ring
        p = R.zero
        for _ in range(terms):
            c = rng.randint(-coeff_range, coeff_range)
            mono = R.one
            for _ in range(rng.randint(0, degree)):
                mono *= R.gens[rng.randrange(self.n)]
            p += c * mono
        return self.poly(p)


def _is_identifier(name: str) -> bool:
    return bool(name) and (name[0].isalpha() or name[0] == "_") and all(
        ch.isalnum() or ch == "_" for ch in name)


class ScalarExpr:
    """A canonical rational function ``num/den`` over a :class:`CoordinateSystem`."""

    __slots__ = ("cs", "num", "den", "__dict__")

    def __init__(self, *args, **kwargs):
        raise TypeError("use CoordinateSystem.const/var/parse to build expressions")

    @classmethod
    def _raw(cls, cs: CoordinateSystem, num: PolyElement, den: PolyElement) -> "ScalarExpr":
        # caller guarantees canonical form
        self = object.__new__(cls)
        self.cs = cs
        self.num = num
        self.den = den
        return self

    @classmethod
    def _make(cls, cs: CoordinateSystem, num: PolyElement, den: PolyElement) -> "ScalarExpr":
        if not den:
            raise ZeroDivisionError("division by zero expression")
        if not num:
            return cs.zero()
        if den.is_ground:
            c = den.LC
            return cls._raw(cs, num.quo_ground(c) if c != 1 else num, cs.ring.one)
        num, den = num.cancel(den)
        c = den.LC
        if c != 1:
            num = num.quo_ground(c)
            den = den.quo_ground(c)
        return cls._raw(cs, num, den)

    def _coerce(self, other) -> "ScalarExpr":
        if isinstance(other, ScalarExpr):
            if other.cs is not self.cs and other.cs != self.cs:
                raise ValueError("expressions live over different coordinate systems")
            return other
        if isinstance(other, (int, Fraction)):
            return self.cs.const(other)
        return NotImplemented

    # field operations

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return ScalarExpr._make(self.cs, self.num + other.num, self.den)
        return ScalarExpr._make(self.cs, self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr._raw(self.cs, -self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return self.cs.zero()
        if self.den == 1 and other.den == 1:
            return ScalarExpr._raw(self.cs, self.num * other.num, self.den)
        return ScalarExpr._make(self.cs, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise ZeroDivisionError("division by zero expression")
        return ScalarExpr._make(self.cs, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.cs.one() / self ** (-k)
        return ScalarExpr._raw(self.cs, self.num ** k, self.den ** k)

    # comparison

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.cs.const(other)
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return self.cs == other.cs and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.cs.names, self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_polynomial(self) -> bool:
        return self.den == 1

    @property
    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return _to_fraction(self.num.LC if self.num else QQ(0))

    # calculus

    def diff(self, i: int) -> "ScalarExpr":
        self.cs._check_index(i)
        x = self.cs.ring.gens[i - 1]
        dn = self.num.diff(x)
        if self.den == 1:
            return ScalarExpr._raw(self.cs, dn, self.den)
        dd = self.den.diff(x)
        return ScalarExpr._make(self.cs, dn * self.den - self.num * dd, self.den ** 2)

    def eval(self, point: Sequence[Number]) -> Fraction:
        if len(point) != self.cs.n:
            raise ValueError(f"point has {len(point)} entries, expected {self.cs.n}")
        vals = [QQ(Fraction(v).numerator, Fraction(v).denominator) for v in point]
        d = self.den(*vals) if self.cs.n > 1 else self.den(vals[0])
        if d == 0:
            raise PoleError(f"denominator of {self} vanishes at {tuple(point)}")
        nv = self.num(*vals) if self.cs.n > 1 else self.num(vals[0])
        return _to_fraction(nv) / _to_fraction(d)

    # printing

    @cached_property
    def _text(self) -> str:
        num = _poly_str(self.num, self.cs.names)
        if self.den == 1:
            return num
        den = _poly_str(self.den, self.cs.names)
        if len(self.num) > 1:
            num = f"({num})"
        if not _is_bare_power(self.den):
            den = f"({den})"
        return f"{num}/{den}"

    def __str__(self):
        return self._text

    def __repr__(self):
        return f"ScalarExpr({self._text!r})"


def _to_fraction(q) -> Fraction:
    return Fraction(int(QQ.numer(q)), int(QQ.denom(q)))


def _is_bare_power(p: PolyElement) -> bool:
    if len(p) != 1:
        return False
    (monom, coeff), = p.terms()
    return coeff == 1 and sum(1 for e in monom if e) == 1


def _monom_str(monom: tuple, names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _poly_str(p: PolyElement, names: Sequence[str]) -> str:
    if not p:
        return "0"
    out = []
    for k, (monom, coeff) in enumerate(p.terms()):
        c = _to_fraction(coeff)
        sign = "-" if c < 0 else "+"
        c = abs(c)
        m = _monom_str(monom, names)
        if not m:
            body = str(c)
        elif c == 1:
            body = m
        else:
            body = f"{c}*{m}"
        if k == 0:
            out.append(("-" if sign == "-" else "") + body)
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


# --- parser ---------------------------------------------------------------

class _Parser:
    """Recursive descent over the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' unsigned-integer)?
    base   := rational-literal | identifier | '(' expr ')' | '-' factor
    """

    def __init__(self, text: str, cs: CoordinateSystem):
        self.text = text
        self.cs = cs
        self.pos = 0
        self.lookup = {c.name: c.index for c in cs.coords}

    def error(self, msg: str, pos: int | None = None):
        raise ExprSyntaxError(msg, self.text, self.pos if pos is None else pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> ScalarExpr:
        if not self.peek():
            self.error("empty expression")
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> ScalarExpr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> ScalarExpr:
        e = self.factor()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            start = self.pos
            f = self.factor()
            if op == "*":
                e = e * f
            else:
                if f.is_zero:
                    self.error("division by zero", start)
                e = e / f
        return e

    def factor(self) -> ScalarExpr:
        b = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                self.error("expected unsigned integer exponent")
            b = b ** int(self.text[start:self.pos])
        return b

    def base(self) -> ScalarExpr:
        ch = self.peek()
        if not ch:
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return e
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch.isdigit() or ch == ".":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "."):
                self.pos += 1
            lit = self.text[start:self.pos]
            try:
                return self.cs.const(Fraction(lit))
            except ValueError:
                self.error(f"malformed number {lit!r}", start)
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name not in self.lookup:
                raise UnknownIdentifierError(f"unknown identifier {name!r}", self.text, start)
            return self.cs.var(self.lookup[name])
        self.error(f"unexpected {ch!r}")


def parse_expr(text: str, coords: CoordinateSystem | Sequence[str]) -> ScalarExpr:
    """Parse ``text`` into a canonical expression over ``coords``."""
    if not isinstance(coords, CoordinateSystem):
        coords = CoordinateSystem(list(coords))
    return _Parser(text, coords).parse()


# --- functional API -------------------------------------------------------

def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return a + b


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return a - b


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return a * b


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    return a / b


def neg(a: ScalarExpr) -> ScalarExpr:
    return -a


def partial(a: ScalarExpr, i: int) -> ScalarExpr:
    """Derivative with respect to the i-th coordinate (1-based)."""
    return a.diff(i)


def is_zero(a: ScalarExpr, rng: random.Random | None = None) -> bool:
    """Exact zero test.

    With ``rng`` a random point is tried first; a nonzero value there is
    conclusive, anything else falls back to the canonical form.
    """
    if rng is not None and a.num:
        point = [rng.randint(-1000, 1000) for _ in range(a.cs.n)]
        try:
            if a.eval(point) != 0:
                return False
        except PoleError:
            pass
    return not a.num


def eval_at(a: ScalarExpr, point: Iterable[Number]) -> Fraction:
    return a.eval(list(point))


def expr_sum(terms: Iterable[ScalarExpr], cs: CoordinateSystem) -> ScalarExpr:
    acc = cs.zero()
    for t in terms:
        acc = acc + t
    return acc
