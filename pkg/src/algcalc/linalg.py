"""Linear algebra over the field of rational functions.

Ranks are generic ranks: a pivot is any entry that is not the zero rational
function, so results hold off the (measure-zero) locus where some chosen
pivot vanishes.
"""
from __future__ import annotations

from typing import Sequence

from algcalc.expr import CoordinateSystem, ScalarExpr

Matrix = list[list[ScalarExpr]]


def clear_denominators(row: Sequence[ScalarExpr]) -> list[ScalarExpr]:
    """Scale ``row`` by the lcm of its denominators; entries become polynomials."""
    if not row:
        return []
    cs = row[0].cs
    m = cs.ring.one
    for e in row:
        if e and e.den != 1:
            m = m.lcm(e.den)
    if m == 1:
        return list(row)
    f = cs.poly(m)
    return [e * f for e in row]


def primitive(row: Sequence[ScalarExpr]) -> list[ScalarExpr]:
    """Polynomial row divided by the gcd of its entries."""
    row = clear_denominators(row)
    g = None
    for e in row:
        if e:
            g = e.num if g is None else g.gcd(e.num)
    if g is None or g.is_ground:
        return row
    gf = row[0].cs.poly(g)
    return [e / gf for e in row]


def fraction_free_echelon(rows: Sequence[Sequence[ScalarExpr]]) -> tuple[Matrix, list[int]]:
    """Bareiss elimination of denominator-cleared rows.

    Returns the echelon rows (polynomial entries) and the pivot columns, chosen
    left to right.
    """
    M = [clear_denominators(r) for r in rows]
    if not M:
        return [], []
    m, ncols = len(M), len(M[0])
    cs = M[0][0].cs
    prev = cs.one()
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if M[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        pivots.append(c)
        for i in range(r + 1, m):
            for j in range(c + 1, ncols):
                M[i][j] = (M[r][c] * M[i][j] - M[i][c] * M[r][j]) / prev
            M[i][c] = cs.zero()
        prev = M[r][c]
        r += 1
    return M, pivots


def rank(rows: Sequence[Sequence[ScalarExpr]]) -> int:
    return len(fraction_free_echelon(rows)[1])


def nullspace(rows: Sequence[Sequence[ScalarExpr]], ncols: int, cs: CoordinateSystem) -> list[list[ScalarExpr]]:
    """Basis of ``{v : rows . v = 0}``, one vector per non-pivot column.

    Each vector is polynomial and primitive, with the entry at its own free
    column monic (leading coefficient 1) and zeros at the other free columns.
    """
    E, pivots = fraction_free_echelon(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [cs.zero() for _ in range(ncols)]
        v[f] = cs.one()
        for k in reversed(range(len(pivots))):
            pc = pivots[k]
            acc = cs.zero()
            for j in range(pc + 1, ncols):
                if E[k][j] and v[j]:
                    acc = acc + E[k][j] * v[j]
            v[pc] = -acc / E[k][pc]
        v = primitive(v)
        lc = v[f].num.LC
        if lc != 1:
            scale = cs.poly(cs.ring(lc))
            v = [e / scale for e in v]
        basis.append(v)
    return basis


def inverse(M: Sequence[Sequence[ScalarExpr]]) -> Matrix:
    """Gauss-Jordan inverse of a square matrix over the function field."""
    n = len(M)
    cs = M[0][0].cs
    A = [list(row) + [cs.one() if i == j else cs.zero() for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular over the function field")
        A[c], A[piv] = A[piv], A[c]
        inv = cs.one() / A[c][c]
        A[c] = [e * inv if e else e for e in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b if b else a for a, b in zip(A[i], A[c])]
    return [row[n:] for row in A]


def transpose(M: Sequence[Sequence[ScalarExpr]]) -> Matrix:
    return [list(col) for col in zip(*M)]
