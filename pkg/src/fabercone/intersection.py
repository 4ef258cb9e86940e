"""Pairing of divisor classes with one-dimensional strata.

Each stratum is recorded by its inequality form.  For some strata this is a
positive multiple of the actual intersection number (type 2 reads as b_irr),
which does not matter for any cone computation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .combinat import (BOUNDARY, DELTA_IRR, LAMBDA, PSI, ClassIndex, ModuliSig, StratumCurve,
                       class_indices, enumerate_strata, marks_of, stratum_covector)
from .cone import ConeH
from .divisor import DivisorClass, flag_divisor, lookup_b
from .errors import InvalidSignature
from .linalg import format_rational, rank

CHAR_ZERO_NOTE = "valid in characteristic 0"


@dataclass(frozen=True)
class LinearFunctional:
    sig: ModuliSig
    covector: dict[ClassIndex, int]
    provenance: StratumCurve | str

    def __call__(self, D: DivisorClass) -> Fraction:
        if D.sig != self.sig:
            raise InvalidSignature(f"functional on {self.sig} applied to a class on {D.sig}")
        return sum((c * D[k] for k, c in self.covector.items()), Fraction(0))

    def row(self, coords: Sequence[ClassIndex] | None = None) -> list[int]:
        coords = class_indices(self.sig) if coords is None else coords
        return [self.covector.get(c, 0) for c in coords]


def stratum_functional(x: StratumCurve) -> LinearFunctional:
    return LinearFunctional(x.sig, stratum_covector(x), x)


def strata_functionals(sig: ModuliSig) -> list[LinearFunctional]:
    return [stratum_functional(x) for x in enumerate_strata(sig)]


@dataclass
class FNefReport:
    verdict: bool
    violated: list[tuple[StratumCurve, Fraction]] = field(default_factory=list)
    tight: list[StratumCurve] = field(default_factory=list)
    tight_rank: int = 0

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "violated": [{"stratum": x.to_json(), "value": format_rational(v)} for x, v in self.violated],
            "tight": [x.to_json() for x in self.tight],
            "tight_rank": self.tight_rank,
        }


def is_f_nef(D: DivisorClass) -> FNefReport:
    """Evaluate D on every stratum; F-nef iff no value is negative."""
    violated, tight, tight_rows = [], [], []
    coords = class_indices(D.sig)
    for f in strata_functionals(D.sig):
        v = f(D)
        if v < 0:
            violated.append((f.provenance, v))
        elif v == 0:
            tight.append(f.provenance)
            tight_rows.append(f.row(coords))
    return FNefReport(not violated, violated, tight, rank(tight_rows) if tight_rows else 0)


def _unmarked_bs(D: DivisorClass) -> list[Fraction]:
    return [lookup_b(D, i, 0) for i in range(1, D.sig.g // 2 + 1)]


def _require_unmarked(D: DivisorClass) -> None:
    if D.sig.n != 0 or D.sig.g < 2:
        raise InvalidSignature("criterion applies to M_g with g >= 2 only")


def nef_criterion_61(D: DivisorClass) -> bool:
    """Sufficient nefness test on M_g (char 0): F-nef and every b_i is 0 or >= b_irr."""
    _require_unmarked(D)
    if not is_f_nef(D).verdict:
        return False
    return all(b == 0 or b >= D.b_irr for b in _unmarked_bs(D))


def effective_criterion_35(D: DivisorClass, strict: bool = False) -> bool:
    """a >= 0, g*a >= (8g+4)*b_irr and 2g*a >= (8g+4)*b_i for every i.

    With ``strict`` every inequality must hold strictly (the bigness clause).
    """
    _require_unmarked(D)
    g, a = D.sig.g, D.a
    lhs_rhs = [(a, 0), (g * a, (8 * g + 4) * D.b_irr)]
    lhs_rhs += [(2 * g * a, (8 * g + 4) * b) for b in _unmarked_bs(D)]
    if strict:
        return all(x > y for x, y in lhs_rhs)
    return all(x >= y for x, y in lhs_rhs)


@dataclass
class FlagReport:
    zero_on_T6: bool
    positive_on_rest: bool
    conditions_met: bool
    values: list[tuple[StratumCurve, Fraction]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "zero_on_T6": self.zero_on_T6,
            "positive_on_rest": self.positive_on_rest,
            "conditions_met": self.conditions_met,
            "values": [{"stratum": x.to_json(), "value": format_rational(v)} for x, v in self.values],
        }


def flag_conditions(g: int, n: int, a, birr) -> bool:
    a, birr = Fraction(a), Fraction(birr)
    return a > 12 * birr - (g + n - 1) and 2 * birr > Fraction(n + g, 2) ** 2


def verify_flag_divisor(g: int, n: int, a, birr) -> FlagReport:
    """Check the flag divisor vanishes on type-6 strata and is positive elsewhere."""
    D = flag_divisor(g, n, a, birr)
    values = [(f.provenance, f(D)) for f in strata_functionals(D.sig)]
    zero6 = all(v == 0 for x, v in values if x.kind == 6)
    pos = all(v > 0 for x, v in values if x.kind != 6)
    return FlagReport(zero6, pos, flag_conditions(g, n, a, birr), values)


# the Faber cone in b-coordinates ---------------------------------------------

def b_sign(idx: ClassIndex) -> int:
    """Sign relating the stored coefficient to the b-coordinate (a, b_irr, c_i, b_{i,S})."""
    return -1 if idx.kind in (DELTA_IRR, BOUNDARY) else 1


def b_label(idx: ClassIndex) -> str:
    if idx.kind == LAMBDA:
        return "a"
    if idx.kind == DELTA_IRR:
        return "b_irr"
    if idx.kind == PSI:
        return f"c_{idx.i}"
    return f"b_{idx.i},{{{','.join(map(str, marks_of(idx.mask)))}}}"


def faber_cone(sig: ModuliSig) -> tuple[list[ClassIndex], ConeH]:
    """F-nef cone as an H-cone over the b-coordinates of ``class_indices(sig)``."""
    coords = class_indices(sig)
    signs = [b_sign(c) for c in coords]
    rows = [tuple(s * x for s, x in zip(signs, f.row(coords))) for f in strata_functionals(sig)]
    return coords, ConeH(len(coords), tuple(rows))


def to_b_coordinates(D: DivisorClass) -> list[Fraction]:
    return [b_sign(c) * D[c] for c in class_indices(D.sig)]
