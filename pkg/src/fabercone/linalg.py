"""Exact rational linear algebra on plain Python lists.

Vectors are sequences of ``Fraction`` or ``int``.  Nothing here uses floats.
"""
from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = Sequence[Fraction]


def parse_rational(text) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` (q > 0) into a Fraction."""
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    s = text.strip()
    if "/" in s:
        num, _, den = s.partition("/")
        try:
            p, q = int(num), int(den)
        except ValueError:
            raise ValueError(f"not a rational: {text!r}") from None
        if q <= 0:
            raise ValueError(f"denominator must be positive: {text!r}")
        return Fraction(p, q)
    try:
        return Fraction(int(s))
    except ValueError:
        raise ValueError(f"not a rational: {text!r}") from None


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def dot(u: Iterable, v: Iterable):
    return sum((a * b for a, b in zip(u, v)), 0)


def clear_denominators(vec: Sequence) -> list[int]:
    """Scale ``vec`` by a positive rational to a primitive integer vector.

    The zero vector is returned unchanged (as ints).
    """
    fr = [Fraction(x) for x in vec]
    den = reduce(lcm, (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, ints, 0)
    if g > 1:
        ints = [x // g for x in ints]
    return ints


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Positive rescaling to a primitive integer vector (direction kept)."""
    return tuple(clear_denominators(vec))


def primitive_signed(vec: Sequence) -> tuple[int, ...]:
    """Primitive integer vector with first nonzero entry positive (for lines)."""
    ints = clear_denominators(vec)
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def rref(rows: Sequence[Sequence], ncols: int | None = None,
         col_order: Sequence[int] | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q.

    ``col_order`` fixes the order in which columns are tried as pivots.
    Returns the nonzero reduced rows and their pivot columns (in pivot order).
    """
    mat = [[Fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    order = range(ncols) if col_order is None else col_order
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == len(mat):
            break
        p = next((k for k in range(r, len(mat)) if mat[k][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        if piv != 1:
            mat[r] = [x / piv for x in mat[r]]
        pr = mat[r]
        for k in range(len(mat)):
            if k != r and mat[k][c] != 0:
                f = mat[k][c]
                mat[k] = [a - f * b for a, b in zip(mat[k], pr)]
        pivots.append(c)
        r += 1
    return mat[:r], pivots


def rank(rows: Sequence[Sequence], col_order: Sequence[int] | None = None) -> int:
    """Rank via fraction-free integer elimination."""
    mat = [list(clear_denominators(r)) for r in rows]
    mat = [r for r in mat if any(r)]
    if not mat:
        return 0
    ncols = len(mat[0])
    order = range(ncols) if col_order is None else col_order
    rk = 0
    for c in order:
        p = next((k for k in range(rk, len(mat)) if mat[k][c] != 0), None)
        if p is None:
            continue
        mat[rk], mat[p] = mat[p], mat[rk]
        pr = mat[rk]
        a = pr[c]
        for k in range(rk + 1, len(mat)):
            b = mat[k][c]
            if b:
                row = [a * x - b * y for x, y in zip(mat[k], pr)]
                g = reduce(gcd, row, 0)
                mat[k] = [x // g for x in row] if g > 1 else row
        rk += 1
        if rk == len(mat):
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : row . x = 0 for every row}, one vector per free column."""
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def canonical_subspace(vectors: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Canonical basis of a span: RREF rows scaled to signed primitive ints."""
    if not vectors:
        return []
    red, _ = rref(vectors, ncols)
    return [primitive_signed(r) for r in red]


def reduce_modulo(vec: Sequence, basis_rref: Sequence[Sequence], pivots: Sequence[int]) -> list[Fraction]:
    """Subtract multiples of RREF rows so ``vec`` vanishes on their pivot columns."""
    out = [Fraction(x) for x in vec]
    for row, p in zip(basis_rref, pivots):
        f = out[p]
        if f:
            out = [a - f * b for a, b in zip(out, row)]
    return out


def mat_vec(mat: Sequence[Sequence], vec: Sequence) -> list:
    return [dot(r, vec) for r in mat]


def transpose(mat: Sequence[Sequence]) -> list[list]:
    return [list(c) for c in zip(*mat)]
