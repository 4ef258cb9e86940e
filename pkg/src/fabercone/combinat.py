"""Boundary class indexing and enumeration of one-dimensional strata.

Mark sets are bitmasks: mark ``k`` (1-based) is bit ``k - 1``.  A *leg* is a
pair ``(genus, mask)`` describing a fixed component attached to the moving
rational (or elliptic) piece of a stratum.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator

from .errors import InvalidSignature, NonexistentClass

log = logging.getLogger(__name__)

Leg = tuple[int, int]


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(marks) -> int:
    m = 0
    for k in marks:
        m |= 1 << (k - 1)
    return m


def marks_of(mask: int) -> list[int]:
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


@dataclass(frozen=True, order=True)
class ModuliSig:
    g: int
    n: int

    def __post_init__(self):
        if not isinstance(self.g, int) or not isinstance(self.n, int) or self.g < 0 or self.n < 0:
            raise InvalidSignature(f"g and n must be nonnegative integers, got ({self.g}, {self.n})")
        if 2 * self.g - 2 + self.n <= 0:
            raise InvalidSignature(f"M_{{{self.g},{self.n}}} is not stable (2g-2+n <= 0)")

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def dimension(self) -> int:
        return 3 * self.g - 3 + self.n

    def require_strata(self) -> None:
        if self.dimension < 1:
            raise InvalidSignature(f"M_{{{self.g},{self.n}}} has no one-dimensional strata")


# Variant tags double as the sort order of coordinates.
LAMBDA, DELTA_IRR, PSI, BOUNDARY = 0, 1, 2, 3
_KIND_NAMES = {LAMBDA: "lambda", DELTA_IRR: "delta_irr", PSI: "psi", BOUNDARY: "boundary"}


@dataclass(frozen=True, order=True)
class ClassIndex:
    """One of lambda, delta_irr, psi_i (``i`` = mark) or delta_{i,S} (``mask`` = S)."""

    kind: int
    i: int = 0
    mask: int = 0

    def __str__(self) -> str:
        if self.kind == LAMBDA:
            return "lambda"
        if self.kind == DELTA_IRR:
            return "delta_irr"
        if self.kind == PSI:
            return f"psi_{self.i}"
        return f"delta_{self.i},{{{','.join(map(str, marks_of(self.mask)))}}}"

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]


LAMBDA_INDEX = ClassIndex(LAMBDA)
DELTA_IRR_INDEX = ClassIndex(DELTA_IRR)


def psi(i: int) -> ClassIndex:
    return ClassIndex(PSI, i)


def boundary_exists(sig: ModuliSig, i: int, mask: int) -> bool:
    if not 0 <= i <= sig.g or mask & ~sig.full:
        return False
    size = popcount(mask)
    co = sig.n - size
    if sig.g == 0:
        return 2 <= size <= sig.n - 2
    if i == 0:
        return size >= 2
    if i == sig.g:
        return co >= 2
    return True


def canonical_pair(g: int, full: int, i: int, mask: int) -> tuple[int, int]:
    """Representative of {(i, S), (g - i, S^c)}: smaller genus, then smaller mask."""
    ci, cm = g - i, full & ~mask
    if 2 * i < g:
        return i, mask
    if 2 * i > g:
        return ci, cm
    return (i, mask) if mask <= cm else (ci, cm)


def canonical_index(sig: ModuliSig, i: int, mask: int) -> ClassIndex:
    """Canonical boundary index for delta_{i,S}; raises if the divisor does not exist."""
    if not 0 <= i <= sig.g:
        raise NonexistentClass(f"genus part {i} outside 0..{sig.g}")
    if mask & ~sig.full:
        raise NonexistentClass(f"mark set {marks_of(mask)} not contained in 1..{sig.n}")
    if not boundary_exists(sig, i, mask):
        raise NonexistentClass(f"delta_{{{i},{marks_of(mask)}}} does not exist on M_{{{sig.g},{sig.n}}}")
    ci, cm = canonical_pair(sig.g, sig.full, i, mask)
    return ClassIndex(BOUNDARY, ci, cm)


def boundary_indices(sig: ModuliSig) -> list[ClassIndex]:
    out = set()
    for i in range(sig.g // 2 + 1):
        for mask in range(sig.full + 1):
            if boundary_exists(sig, i, mask):
                out.add(canonical_index(sig, i, mask))
    return sorted(out)


def class_indices(sig: ModuliSig) -> list[ClassIndex]:
    """Coordinate order of the divisor space: lambda, delta_irr, psi_1..psi_n, boundary.

    lambda and delta_irr are absent in genus 0.
    """
    coords = []
    if sig.g >= 1:
        coords += [LAMBDA_INDEX, DELTA_IRR_INDEX]
    coords += [psi(k) for k in range(1, sig.n + 1)]
    return coords + boundary_indices(sig)


def b_term(sig: ModuliSig, i: int, mask: int) -> tuple[ClassIndex, int] | None:
    """The coordinate read by b_{i,I}, with the sign relating b to the stored coefficient.

    b_{0,{k}} is the psi_k coefficient; otherwise b is minus the boundary
    coefficient.  Terms whose divisor does not exist read as ``None`` (zero).
    """
    co = sig.full & ~mask
    if i == 0 and popcount(mask) == 1:
        return psi(marks_of(mask)[0]), 1
    if i == sig.g and popcount(co) == 1:
        return psi(marks_of(co)[0]), 1
    if not boundary_exists(sig, i, mask):
        return None
    return canonical_index(sig, i, mask), -1


@dataclass(frozen=True)
class StratumCurve:
    """A one-dimensional stratum class.

    ``kind`` is 1..6.  ``legs`` is empty for kinds 1 and 2, a single leg for
    3 and 4, a sorted pair for 5 and a sorted 4-multiset for 6.
    """

    sig: ModuliSig
    kind: int
    legs: tuple[Leg, ...] = ()
    sort_key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(tuple(leg) for leg in self.legs))
        if self.kind in (5, 6):
            object.__setattr__(self, "legs", tuple(sorted(self.legs)))
        object.__setattr__(self, "sort_key", (self.kind, self.legs))
        _check_stratum(self)

    def __lt__(self, other: "StratumCurve") -> bool:
        return self.sort_key < other.sort_key

    def relabel(self, perm: dict[int, int]) -> "StratumCurve":
        """Apply a permutation of marks (``perm[k]`` is the image of mark k)."""
        legs = tuple((i, permute_mask(m, perm)) for i, m in self.legs)
        return StratumCurve(self.sig, self.kind, legs)

    def to_json(self) -> dict:
        return {"type": self.kind, "legs": [{"i": i, "S": marks_of(m)} for i, m in self.legs]}

    @classmethod
    def from_json(cls, sig: ModuliSig, obj: dict) -> "StratumCurve":
        return cls(sig, int(obj["type"]), tuple((int(l["i"]), mask_of(l["S"])) for l in obj["legs"]))

    def __str__(self) -> str:
        legs = " ".join(f"({i},{{{','.join(map(str, marks_of(m)))}}})" for i, m in self.legs)
        return f"T{self.kind}" + (f" {legs}" if legs else "")


def permute_mask(mask: int, perm: dict[int, int]) -> int:
    return mask_of(perm.get(k, k) for k in marks_of(mask))


def _check_stratum(x: StratumCurve) -> None:
    g, full = x.sig.g, x.sig.full
    bad = InvalidSignature(f"invalid stratum {x.kind} {x.legs} on M_{{{g},{x.sig.n}}}")
    for i, m in x.legs:
        if i < 0 or m & ~full:
            raise bad
    if x.kind == 1:
        ok = g >= 1 and not x.legs
    elif x.kind == 2:
        ok = g >= 3 and not x.legs
    elif x.kind in (3, 4):
        ok = g >= 2 and len(x.legs) == 1 and x.legs[0][0] <= g - 2
        if ok and x.kind == 3:
            i, m = x.legs[0]
            ok = i + popcount(m) > 0
    elif x.kind == 5:
        ok = g >= 1 and len(x.legs) == 2
        if ok:
            (i, a), (j, b) = x.legs
            ok = (not a & b and i + j <= g - 1
                  and i + popcount(a) > 0 and j + popcount(b) > 0)
    elif x.kind == 6:
        ok = len(x.legs) == 4
        if ok:
            masks = [m for _, m in x.legs]
            union = 0
            for m in masks:
                ok = ok and not union & m
                union |= m
            ok = (ok and union == full and sum(i for i, _ in x.legs) == g
                  and all(i + popcount(m) > 0 for i, m in x.legs))
    else:
        ok = False
    if not ok:
        raise bad


def _positive_legs(sig: ModuliSig, max_genus: int) -> Iterator[Leg]:
    for i in range(max_genus + 1):
        for m in range(sig.full + 1):
            if i + popcount(m) > 0:
                yield i, m


def _set_partitions(items: list[int], max_blocks: int) -> Iterator[list[list[int]]]:
    """Unordered partitions of ``items`` into at most ``max_blocks`` nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, max_blocks):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        if len(part) < max_blocks:
            yield [[first]] + part


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def raw_strata(sig: ModuliSig) -> list[StratumCurve]:
    """Every parameter-canonical stratum permitted for ``sig``, before merging."""
    sig.require_strata()
    g, full = sig.g, sig.full
    out: list[StratumCurve] = []
    if g >= 1:
        out.append(StratumCurve(sig, 1))
    if g >= 3:
        out.append(StratumCurve(sig, 2))
    if g >= 2:
        for i in range(g - 1):
            for m in range(full + 1):
                if i + popcount(m) > 0:
                    out.append(StratumCurve(sig, 3, ((i, m),)))
        for i in range(g - 1):
            for m in range(full + 1):
                out.append(StratumCurve(sig, 4, ((i, m),)))
    if g >= 1:
        legs = list(_positive_legs(sig, g - 1))
        for a, b in itertools.combinations_with_replacement(legs, 2):
            if a[1] & b[1] or a[0] + b[0] > g - 1:
                continue
            out.append(StratumCurve(sig, 5, (a, b)))
    seen6 = set()
    for blocks in _set_partitions(list(range(1, sig.n + 1)), 4):
        masks = [mask_of(b) for b in blocks] + [0] * (4 - len(blocks))
        for genera in _compositions(g, 4):
            legs = tuple(sorted(zip(genera, masks)))
            if legs in seen6 or any(i + popcount(m) == 0 for i, m in legs):
                continue
            seen6.add(legs)
            out.append(StratumCurve(sig, 6, legs))
    out.sort()
    return out


def _add_term(cov: dict, sig: ModuliSig, i: int, mask: int, coeff: int) -> None:
    term = b_term(sig, i, mask)
    if term is None:
        return
    idx, sign = term
    cov[idx] = cov.get(idx, 0) + sign * coeff


def stratum_covector(x: StratumCurve) -> dict[ClassIndex, int]:
    """Integer covector on stored coefficients giving the stratum's inequality form.

    Zero entries are dropped.  Nonexistent terms are omitted.
    """
    sig = x.sig
    cov: dict[ClassIndex, int] = {}
    if x.kind == 1:
        cov[LAMBDA_INDEX] = 1
        cov[DELTA_IRR_INDEX] = 12
        _add_term(cov, sig, 1, 0, 1)
    elif x.kind == 2:
        cov[DELTA_IRR_INDEX] = -1
    elif x.kind == 3:
        (i, m), = x.legs
        _add_term(cov, sig, i, m, 1)
    elif x.kind == 4:
        (i, m), = x.legs
        cov[DELTA_IRR_INDEX] = -2
        _add_term(cov, sig, i + 1, m, -1)
    elif x.kind == 5:
        (i, a), (j, b) = x.legs
        _add_term(cov, sig, i, a, 1)
        _add_term(cov, sig, j, b, 1)
        _add_term(cov, sig, i + j, a | b, -1)
    else:
        (i, a), *others = x.legs
        _add_term(cov, sig, i, a, 1)
        for j, b in others:
            _add_term(cov, sig, j, b, 1)
            _add_term(cov, sig, i + j, a | b, -1)
    return {k: v for k, v in cov.items() if v}


def covector_key(cov: dict) -> tuple:
    return tuple(sorted(cov.items()))


def enumerate_strata(sig: ModuliSig, merges: list | None = None) -> list[StratumCurve]:
    """One representative per distinct inequality form, in (type, legs) order.

    When ``merges`` is a list, ``(kept, dropped)`` pairs are appended to it.
    """
    kept: dict[tuple, StratumCurve] = {}
    out = []
    for x in raw_strata(sig):
        key = covector_key(stratum_covector(x))
        if key in kept:
            log.debug("merged %s into %s (identical functional)", x, kept[key])
            if merges is not None:
                merges.append((kept[key], x))
            continue
        kept[key] = x
        out.append(x)
    return out
