"""Divisor classes with exact rational coefficients.

Coefficients are stored with their natural sign: ``11 lambda - delta`` on
M_3 has ``coeffs[lambda] = 11`` and ``coeffs[delta_irr] = coeffs[delta_1] = -1``.
The b-convention (b_irr, b_{i,S}, and c_i = b_{0,{i}}) is computed on demand.
"""
from __future__ import annotations

import json
from collections import deque
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

from . import combinat
from .combinat import (BOUNDARY, DELTA_IRR_INDEX, LAMBDA_INDEX, PSI, ClassIndex, ModuliSig,
                       b_term, canonical_index, class_indices, mask_of, marks_of, psi)
from .errors import FaberConeError, GroupTooLarge, InvalidSignature, NonexistentClass
from .linalg import format_rational, parse_rational, rank, reduce_modulo, rref

GROUP_LIMIT = 10**6


class DivisorClass:
    """A formal divisor on M_{g,n}; immutable after construction."""

    __slots__ = ("sig", "_coeffs")

    def __init__(self, sig: ModuliSig, coeffs: Mapping[ClassIndex, object] | None = None):
        self.sig = sig
        clean: dict[ClassIndex, Fraction] = {}
        for idx, val in (coeffs or {}).items():
            _check_index(sig, idx)
            q = Fraction(val)
            if q:
                clean[idx] = clean.get(idx, Fraction(0)) + q
        self._coeffs = {k: v for k, v in sorted(clean.items()) if v}

    @property
    def coeffs(self) -> dict[ClassIndex, Fraction]:
        return dict(self._coeffs)

    def __getitem__(self, idx: ClassIndex) -> Fraction:
        return self._coeffs.get(idx, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, DivisorClass) and self.sig == other.sig and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.sig, tuple(self._coeffs.items())))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        _same_sig(self, other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) + v
        return DivisorClass(self.sig, out)

    def __neg__(self):
        return self * -1

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        return self + (-other)

    def __mul__(self, t) -> "DivisorClass":
        t = Fraction(t)
        return DivisorClass(self.sig, {k: v * t for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"DivisorClass({self.sig.g}, {self.sig.n}, {self})"

    def __str__(self):
        if not self._coeffs:
            return "0"
        return " + ".join(f"{format_rational(v)}*{k}" for k, v in self._coeffs.items())

    def vector(self, coords: Sequence[ClassIndex] | None = None) -> list[Fraction]:
        coords = class_indices(self.sig) if coords is None else coords
        return [self[c] for c in coords]

    @classmethod
    def from_vector(cls, sig: ModuliSig, vec: Sequence, coords: Sequence[ClassIndex] | None = None):
        coords = class_indices(sig) if coords is None else coords
        return cls(sig, dict(zip(coords, vec)))

    # b-convention accessors
    @property
    def a(self) -> Fraction:
        return self[LAMBDA_INDEX]

    @property
    def b_irr(self) -> Fraction:
        return -self[DELTA_IRR_INDEX]

    def lookup_b(self, i: int, mask: int) -> Fraction:
        return lookup_b(self, i, mask)

    def to_json(self) -> dict:
        return divisor_to_json(self)


def _same_sig(x: DivisorClass, y: DivisorClass) -> None:
    if x.sig != y.sig:
        raise InvalidSignature(f"signatures differ: {x.sig} vs {y.sig}")


def _check_index(sig: ModuliSig, idx: ClassIndex) -> None:
    if idx.kind in (combinat.LAMBDA, combinat.DELTA_IRR):
        if sig.g == 0:
            raise NonexistentClass(f"{idx} is not a coordinate in genus 0")
        return
    if idx.kind == PSI:
        if not 1 <= idx.i <= sig.n:
            raise NonexistentClass(f"psi_{idx.i} needs 1 <= i <= {sig.n}")
        return
    if canonical_index(sig, idx.i, idx.mask) != idx:
        raise NonexistentClass(f"{idx} is not in canonical form")


def lookup_b(D: DivisorClass, i: int, mask: int) -> Fraction:
    """b_{i,I} in the b-convention; psi coefficients for singleton genus-0 legs."""
    term = b_term(D.sig, i, mask)
    if term is None:
        return Fraction(0)
    idx, sign = term
    return sign * D[idx]


def boundary_class(sig: ModuliSig, i: int, marks: Iterable[int] = ()) -> DivisorClass:
    return DivisorClass(sig, {canonical_index(sig, i, mask_of(marks)): 1})


def unmarked_class(g: int, a, b_irr, b) -> DivisorClass:
    """a*lambda - b_irr*delta_irr - sum_i b_i*delta_i on M_g.

    ``b`` is either one value for every 1 <= i <= g/2 or a sequence b_1, b_2, ...
    """
    sig = ModuliSig(g, 0)
    if g < 2:
        raise InvalidSignature("unmarked classes need g >= 2")
    half = g // 2
    bs = [b] * half if not isinstance(b, (list, tuple)) else list(b)
    if len(bs) != half:
        raise ValueError(f"expected {half} boundary coefficients, got {len(bs)}")
    coeffs = {LAMBDA_INDEX: a, DELTA_IRR_INDEX: -Fraction(b_irr)}
    for i, bi in enumerate(bs, start=1):
        coeffs[canonical_index(sig, i, 0)] = -Fraction(bi)
    return DivisorClass(sig, coeffs)


def ch_gamma(g: int) -> DivisorClass:
    """(8g+4) lambda - g delta_irr - 2g sum_{i>0} delta_i on M_g."""
    if g < 2:
        raise InvalidSignature("the Cornalba-Harris class needs g >= 2")
    return unmarked_class(g, 8 * g + 4, g, 2 * g)


def flag_divisor(g: int, n: int, a, birr) -> DivisorClass:
    """The divisor trivial on the flag locus.

    psi coefficient g+n-1 and b_{i,S} = (g+n-m)*m with m = i+|S|.
    """
    sig = ModuliSig(g, n)
    if g == 0 and Fraction(a) != 0 or g == 0 and Fraction(birr) != 0:
        raise InvalidSignature("lambda and delta_irr are not coordinates in genus 0")
    s = g + n
    coeffs: dict[ClassIndex, object] = {}
    if g >= 1:
        coeffs[LAMBDA_INDEX] = Fraction(a)
        coeffs[DELTA_IRR_INDEX] = -Fraction(birr)
    for k in range(1, n + 1):
        coeffs[psi(k)] = s - 1
    for idx in combinat.boundary_indices(sig):
        m = idx.i + combinat.popcount(idx.mask)
        coeffs[idx] = -(s - m) * m
    return DivisorClass(sig, coeffs)


def coarsen_to_unmarked(D: DivisorClass) -> DivisorClass:
    """Forget the marks: b_i becomes the maximum of b_{i,S} over all S."""
    g = D.sig.g
    if g < 2:
        raise InvalidSignature("coarsening to M_g needs g >= 2")
    bs = [max(lookup_b(D, i, m) for m in range(D.sig.full + 1)) for i in range(1, g // 2 + 1)]
    return unmarked_class(g, D.a, D.b_irr, bs)


# permutation groups ---------------------------------------------------------

Perm = tuple[int, ...]


def _as_perm(p, n: int) -> Perm:
    if isinstance(p, Mapping):
        p = tuple(p.get(k, k) for k in range(1, n + 1))
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(1, n + 1)):
        raise ValueError(f"not a permutation of 1..{n}: {p}")
    return p


def group_closure(generators: Iterable, n: int, limit: int = GROUP_LIMIT) -> list[Perm]:
    """All elements of the group generated by ``generators`` (images of 1..n)."""
    gens = [_as_perm(p, n) for p in generators]
    identity = tuple(range(1, n + 1))
    seen = {identity}
    queue = deque([identity])
    while queue:
        p = queue.popleft()
        for s in gens:
            q = tuple(s[p[k] - 1] for k in range(n))
            if q not in seen:
                seen.add(q)
                if len(seen) > limit:
                    raise GroupTooLarge(f"group closure exceeds {limit} elements")
                queue.append(q)
    return sorted(seen)


def act_on_index(sig: ModuliSig, perm: Perm, idx: ClassIndex) -> ClassIndex:
    if idx.kind == PSI:
        return psi(perm[idx.i - 1])
    if idx.kind == BOUNDARY:
        mask = mask_of(perm[k - 1] for k in marks_of(idx.mask))
        return canonical_index(sig, idx.i, mask)
    return idx


def act(D: DivisorClass, perm) -> DivisorClass:
    p = _as_perm(perm, D.sig.n)
    return DivisorClass(D.sig, {act_on_index(D.sig, p, k): v for k, v in D.coeffs.items()})


def symmetrize(D: DivisorClass, generators: Iterable, limit: int = GROUP_LIMIT) -> DivisorClass:
    """Average of D over the group generated by ``generators``."""
    group = group_closure(generators, D.sig.n, limit)
    acc: dict[ClassIndex, Fraction] = {}
    for p in group:
        for k, v in D.coeffs.items():
            j = act_on_index(D.sig, p, k)
            acc[j] = acc.get(j, 0) + v
    size = len(group)
    return DivisorClass(D.sig, {k: v / size for k, v in acc.items()})


def invariant_basis(space_dim: int, action, generators: Iterable, n: int,
                    limit: int = GROUP_LIMIT) -> list[list[Fraction]]:
    """Basis of the invariant subspace of a coefficient space.

    ``action(perm, k)`` gives the coordinate that coordinate ``k`` moves to.
    The basis is the set of nonzero orbit averages of unit vectors.
    """
    group = group_closure(generators, n, limit)
    orbits = []
    seen = set()
    for k in range(space_dim):
        if k in seen:
            continue
        orbit = sorted({action(p, k) for p in group})
        seen.update(orbit)
        v = [Fraction(0)] * space_dim
        for j in orbit:
            v[j] = Fraction(1, len(orbit))
        orbits.append(v)
    return orbits


# JSON ------------------------------------------------------------------------

def boundary_key(idx: ClassIndex) -> str:
    return f"{idx.i}|{','.join(map(str, marks_of(idx.mask)))}"


def parse_boundary_key(key: str) -> tuple[int, int]:
    i, sep, marks = key.partition("|")
    if not sep:
        raise ValueError(f"malformed boundary key {key!r}")
    marks = marks.strip()
    return int(i), mask_of(int(x) for x in marks.split(",")) if marks else 0


def divisor_to_json(D: DivisorClass) -> dict:
    return {
        "g": D.sig.g,
        "n": D.sig.n,
        "lambda": format_rational(D[LAMBDA_INDEX]) if D.sig.g else "0",
        "delta_irr": format_rational(D[DELTA_IRR_INDEX]) if D.sig.g else "0",
        "psi": {str(k.i): format_rational(v) for k, v in D.coeffs.items() if k.kind == PSI},
        "boundary": {boundary_key(k): format_rational(v) for k, v in D.coeffs.items()
                     if k.kind == BOUNDARY},
    }


def divisor_from_json(obj: Mapping) -> DivisorClass:
    """Parse the divisor JSON object; boundary keys may be non-canonical."""
    try:
        g, n = obj["g"], obj["n"]
    except (KeyError, TypeError):
        raise ValueError("divisor JSON needs integer fields 'g' and 'n'") from None
    if type(g) is not int or type(n) is not int:
        raise ValueError("'g' and 'n' must be integers")
    sig = ModuliSig(g, n)
    coeffs: dict[ClassIndex, Fraction] = {}

    def put(idx, val):
        coeffs[idx] = coeffs.get(idx, Fraction(0)) + val

    for field, idx in (("lambda", LAMBDA_INDEX), ("delta_irr", DELTA_IRR_INDEX)):
        q = parse_rational(obj.get(field, "0"))
        if q:
            if g == 0:
                raise NonexistentClass(f"'{field}' must be 0 in genus 0")
            put(idx, q)
    for k, v in (obj.get("psi") or {}).items():
        put(psi(int(k)), parse_rational(v))
    for k, v in (obj.get("boundary") or {}).items():
        i, mask = parse_boundary_key(k)
        put(canonical_index(sig, i, mask), parse_rational(v))
    return DivisorClass(sig, coeffs)


def dumps_divisor(D: DivisorClass) -> str:
    return json.dumps(divisor_to_json(D), indent=2) + "\n"


# genus-one relation table ----------------------------------------------------

class RelationTableError(FaberConeError):
    pass


@lru_cache(maxsize=None)
def _raw_g1_table() -> dict:
    text = resources.files("fabercone").joinpath("data/genus1_relations.json").read_text()
    return json.loads(text)


def genus1_relations(n: int, validate: bool = True) -> list[DivisorClass]:
    """Shipped Picard relations on M_{1,n} (1 <= n <= 6), validated before use."""
    rows = _raw_g1_table()["relations"].get(str(n))
    if rows is None:
        raise RelationTableError(f"no genus-one relation table for n={n}")
    rels = [divisor_from_json(r) for r in rows]
    if validate:
        validate_relations(ModuliSig(1, n), rels)
    return rels


def validate_relations(sig: ModuliSig, rels: Sequence[DivisorClass]) -> None:
    """Every row must vanish on every stratum and the rows must fill the kernel."""
    coords = class_indices(sig)
    covs = [combinat.stratum_covector(x) for x in combinat.enumerate_strata(sig)]
    for r in rels:
        if r.sig != sig:
            raise RelationTableError(f"relation on {r.sig}, expected {sig}")
        for x, cov in zip(combinat.enumerate_strata(sig), covs):
            if sum(c * r[k] for k, c in cov.items()) != 0:
                raise RelationTableError(f"relation {r} does not vanish on {x}")
    rel_rank = rank([r.vector(coords) for r in rels])
    if rel_rank != len(rels):
        raise RelationTableError("relation rows are linearly dependent")
    fun_rank = rank([[cov.get(c, 0) for c in coords] for cov in covs])
    if fun_rank + rel_rank != len(coords):
        raise RelationTableError(
            f"relations span {rel_rank} dims but the strata leave {len(coords) - fun_rank} free")


def genus1_normal_form(D: DivisorClass) -> DivisorClass:
    """Rewrite a genus-one class so that the lambda and psi coefficients vanish."""
    if D.sig.g != 1:
        raise InvalidSignature("normal form applies to genus one only")
    rels = genus1_relations(D.sig.n)
    coords = class_indices(D.sig)
    n = D.sig.n
    order = [0] + list(range(2, 2 + n)) + [1] + list(range(2 + n, len(coords)))
    red, pivots = rref([r.vector(coords) for r in rels], len(coords), order)
    needed = {coords.index(LAMBDA_INDEX)} | {coords.index(psi(k)) for k in range(1, D.sig.n + 1)}
    if not needed <= set(pivots):
        raise RelationTableError("relation table cannot eliminate lambda and psi")
    return DivisorClass.from_vector(D.sig, reduce_modulo(D.vector(coords), red, pivots), coords)
