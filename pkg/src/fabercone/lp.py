"""Exact phase-one simplex for cone feasibility.

Solves ``A z = b, z >= 0`` over Q with Bland's rule.  On infeasibility the
final dual solution is returned as a Farkas vector ``y`` with ``y.A <= 0``
column-wise and ``y.b > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class FeasibilityResult:
    feasible: bool
    solution: list[Fraction] | None = None
    farkas: list[Fraction] | None = None
    pivots: int = 0


def solve_feasibility(columns: Sequence[Sequence], b: Sequence) -> FeasibilityResult:
    """Decide whether ``b`` is a nonnegative combination of ``columns``.

    ``columns`` are the columns of A (each of length ``len(b)``).
    """
    m = len(b)
    nvar = len(columns)
    signs = [1 if Fraction(x) >= 0 else -1 for x in b]
    # rows of [A' | I], A' = diag(signs) A
    rows = []
    for i in range(m):
        s = signs[i]
        row = [s * Fraction(col[i]) for col in columns]
        row += [Fraction(1) if k == i else Fraction(0) for k in range(m)]
        rows.append(row)
    rhs = [abs(Fraction(x)) for x in b]
    width = nvar + m
    basis = [nvar + i for i in range(m)]
    # reduced costs for min sum(artificials)
    red = [Fraction(0)] * width
    for j in range(nvar):
        red[j] = -sum((r[j] for r in rows), Fraction(0))
    pivots = 0
    while True:
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or ratio == best and basis[i] < basis[leave]:
                    leave, best = i, ratio
        if leave is None:
            # cannot happen: the phase-one objective is bounded below by 0
            raise ArithmeticError("unbounded phase-one problem")
        pr = rows[leave]
        piv = pr[enter]
        if piv != 1:
            pr = [x / piv for x in pr]
            rows[leave] = pr
            rhs[leave] /= piv
        support = [j for j in range(width) if pr[j]]
        for i in range(m):
            if i != leave:
                row = rows[i]
                f = row[enter]
                if f:
                    for j in support:
                        row[j] -= f * pr[j]
                    rhs[i] -= f * rhs[leave]
        f = red[enter]
        if f:
            for j in support:
                red[j] -= f * pr[j]
        basis[leave] = enter
        pivots += 1
    obj = sum((rhs[i] for i in range(m) if basis[i] >= nvar), Fraction(0))
    if obj == 0:
        z = [Fraction(0)] * nvar
        for i, j in enumerate(basis):
            if j < nvar:
                z[j] = rhs[i]
        return FeasibilityResult(True, solution=z, pivots=pivots)
    # reduced cost of artificial i is 1 - y'_i
    y = [signs[i] * (1 - red[nvar + i]) for i in range(m)]
    return FeasibilityResult(False, farkas=y, pivots=pivots)
