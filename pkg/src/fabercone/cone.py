"""Exact polyhedral cones: double description, facets, membership, containment.

An H-cone is ``{x : row . x >= 0 for every row}``; a V-cone is the
nonnegative span of its rays plus the linear span of its lineality vectors.
All stored vectors are primitive integer tuples.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CertificateError, DimensionMismatch, ResourceLimit
from .linalg import (canonical_subspace, dot, format_rational, nullspace, parse_rational,
                     primitive, rank, reduce_modulo, rref)
from .lp import solve_feasibility

IntVec = tuple[int, ...]


def _check_dim(vectors: Iterable[Sequence], dim: int, what: str) -> None:
    for v in vectors:
        if len(v) != dim:
            raise DimensionMismatch(f"{what} has length {len(v)}, expected {dim}")


def _canonical_rows(rows: Iterable[Sequence]) -> tuple[IntVec, ...]:
    out = {primitive(r) for r in rows}
    return tuple(sorted(r for r in out if any(r)))


@dataclass(frozen=True)
class ConeH:
    dim: int
    inequalities: tuple[IntVec, ...] = ()
    lineality: tuple[IntVec, ...] = ()

    def __post_init__(self):
        _check_dim(self.inequalities, self.dim, "inequality")
        _check_dim(self.lineality, self.dim, "lineality vector")
        object.__setattr__(self, "inequalities", _canonical_rows(self.inequalities))
        lin = tuple(canonical_subspace(self.lineality, self.dim))
        for l in lin:
            if any(dot(r, l) for r in self.inequalities):
                raise ValueError("declared lineality vector is not annihilated by every inequality")
        object.__setattr__(self, "lineality", lin)

    def contains(self, x: Sequence) -> bool:
        return all(dot(r, x) >= 0 for r in self.inequalities)


@dataclass(frozen=True)
class ConeV:
    dim: int
    rays: tuple[IntVec, ...] = ()
    lineality: tuple[IntVec, ...] = ()

    def __post_init__(self):
        _check_dim(self.rays, self.dim, "ray")
        _check_dim(self.lineality, self.dim, "lineality vector")
        lin = tuple(canonical_subspace(self.lineality, self.dim))
        rays: Iterable = self.rays
        if lin:
            red, piv = rref(lin, self.dim)
            rays = [reduce_modulo(r, red, piv) for r in rays]
        object.__setattr__(self, "lineality", lin)
        object.__setattr__(self, "rays", _canonical_rows(rays))


# double description ------------------------------------------------------------

@dataclass
class DDState:
    """Resumable progress of a double description run."""

    order: list[int]
    processed: int
    rays: list[IntVec]

    def to_json(self) -> dict:
        return {"order": self.order, "processed": self.processed, "rays": [list(r) for r in self.rays]}

    @classmethod
    def from_json(cls, obj: dict) -> "DDState":
        return cls(list(obj["order"]), int(obj["processed"]), [tuple(r) for r in obj["rays"]])


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _initial_rays(rows: Sequence[IntVec], basis_rows: list[int], dim: int) -> list[IntVec]:
    """Rays of {B x >= 0} modulo its lineality: v_k with B v_k = e_k."""
    r = len(basis_rows)
    aug = [list(rows[k]) + [1 if j == t else 0 for j in range(r)] for t, k in enumerate(basis_rows)]
    red, pivots = rref(aug, dim + r, list(range(dim)))
    rays = []
    for k in range(r):
        v = [Fraction(0)] * dim
        for row, p in zip(red, pivots):
            v[p] = row[dim + k]
        rays.append(primitive(v))
    return rays


def _independent_prefix(rows: Sequence[IntVec], order: Sequence[int]) -> list[int]:
    chosen: list[int] = []
    acc: list[IntVec] = []
    current = 0
    for k in order:
        if rank(acc + [rows[k]]) > current:
            acc.append(rows[k])
            chosen.append(k)
            current += 1
    return chosen


def double_description(rows: Sequence[IntVec], dim: int, *, adjacency: str = "combinatorial",
                       deadline: float | None = None, max_rays: int | None = None,
                       state: DDState | None = None) -> tuple[list[IntVec], int]:
    """Extremal rays of ``{x : rows x >= 0}`` modulo its lineality.

    Returns the rays and the lineality dimension.  ``deadline`` is a
    ``time.monotonic()`` value; exceeding it or ``max_rays`` raises
    ResourceLimit carrying a DDState that can be passed back as ``state``.
    """
    if adjacency not in ("combinatorial", "algebraic"):
        raise ValueError(f"unknown adjacency test {adjacency!r}")
    if not rows:
        return [], dim
    rk = rank(rows)
    lin_dim = dim - rk
    need = rk - 2  # common tight rows of two adjacent rays span rank - 2
    if state is None:
        natural = list(range(len(rows)))
        basis_rows = _independent_prefix(rows, natural)
        order = basis_rows + [k for k in natural if k not in set(basis_rows)]
        rays = _initial_rays(rows, basis_rows, dim)
        processed = len(basis_rows)
    else:
        order, processed, rays = list(state.order), state.processed, list(state.rays)

    def zero_set(v: IntVec, upto: int) -> int:
        z = 0
        for t in range(upto):
            if dot(rows[order[t]], v) == 0:
                z |= 1 << t
        return z

    zs = [zero_set(v, processed) for v in rays]
    for t in range(processed, len(order)):
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceLimit("double description time budget exhausted",
                                DDState(order, t, rays))
        a = rows[order[t]]
        vals = [dot(a, v) for v in rays]
        plus = [k for k, s in enumerate(vals) if s > 0]
        minus = [k for k, s in enumerate(vals) if s < 0]
        zero = [k for k, s in enumerate(vals) if s == 0]
        if not minus:
            zs = [z | (1 << t) if vals[k] == 0 else z for k, z in enumerate(zs)]
            continue
        new_rays, new_zs = [], []
        for k in plus + zero:
            new_rays.append(rays[k])
            new_zs.append(zs[k] | (1 << t) if vals[k] == 0 else zs[k])
        for p in plus:
            zp = zs[p]
            for q in minus:
                common = zp & zs[q]
                if _popcount(common) < need:
                    continue
                if adjacency == "combinatorial":
                    if any(k != p and k != q and common & zs[k] == common for k in range(len(rays))):
                        continue
                else:
                    tight = [rows[order[s]] for s in range(t) if common >> s & 1]
                    if rank(tight) != need:
                        continue
                w = [vals[p] * x - vals[q] * y for x, y in zip(rays[q], rays[p])]
                new_rays.append(primitive(w))
                new_zs.append(common | (1 << t))
                if max_rays is not None and len(new_rays) > max_rays:
                    raise ResourceLimit(f"more than {max_rays} intermediate rays",
                                        DDState(order, t, rays))
            if deadline is not None and time.monotonic() > deadline:
                raise ResourceLimit("double description time budget exhausted",
                                    DDState(order, t, rays))
        rays, zs = new_rays, new_zs
    return rays, lin_dim


def extremal_rays(C: ConeH, *, adjacency: str = "combinatorial", deadline: float | None = None,
                  max_rays: int | None = None, state: DDState | None = None) -> ConeV:
    """Minimal generators of an H-cone, modulo its lineality, in canonical form."""
    rays, _ = double_description(C.inequalities, C.dim, adjacency=adjacency, deadline=deadline,
                                 max_rays=max_rays, state=state)
    lin = nullspace(C.inequalities, C.dim) if C.inequalities else \
        [[int(i == j) for j in range(C.dim)] for i in range(C.dim)]
    return ConeV(C.dim, tuple(rays), tuple(tuple(v) for v in lin))


def facets(C: ConeV, *, adjacency: str = "combinatorial") -> ConeH:
    """Inequality description of a V-cone; implicit equations appear as +/- row pairs."""
    dual_rows = list(C.rays) + list(C.lineality) + [tuple(-x for x in l) for l in C.lineality]
    dual = extremal_rays(ConeH(C.dim, tuple(dual_rows)), adjacency=adjacency)
    rows = list(dual.rays)
    for e in dual.lineality:
        rows.append(e)
        rows.append(tuple(-x for x in e))
    return ConeH(C.dim, tuple(rows), C.lineality)


def ray_tight_rank(C: ConeH, ray: Sequence) -> int:
    return rank([r for r in C.inequalities if dot(r, ray) == 0])


# certificates -------------------------------------------------------------------

@dataclass(frozen=True)
class Member:
    """target = sum coefficients[k] * rays[k] + sum lineality_coefficients[j] * lineality[j]."""

    coefficients: dict[int, Fraction]
    lineality_coefficients: tuple[Fraction, ...] = ()

    @property
    def is_member(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {
            "kind": "member",
            "coefficients": {str(k): format_rational(v) for k, v in sorted(self.coefficients.items())},
            "lineality_coefficients": [format_rational(v) for v in self.lineality_coefficients],
        }


@dataclass(frozen=True)
class Separated:
    """functional >= 0 on every ray, = 0 on the lineality, and < 0 on the target."""

    functional: tuple[Fraction, ...]
    value_on_target: Fraction

    @property
    def is_member(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "kind": "separated",
            "functional": [format_rational(v) for v in self.functional],
            "value_on_target": format_rational(self.value_on_target),
        }


Certificate = Member | Separated


def certificate_from_json(obj: dict) -> Certificate:
    if obj.get("kind") == "member":
        return Member({int(k): parse_rational(v) for k, v in obj["coefficients"].items()},
                      tuple(parse_rational(v) for v in obj.get("lineality_coefficients", [])))
    if obj.get("kind") == "separated":
        return Separated(tuple(parse_rational(v) for v in obj["functional"]),
                         parse_rational(obj["value_on_target"]))
    raise ValueError(f"unknown certificate kind {obj.get('kind')!r}")


def verify_certificate(cert: Certificate, target: Sequence, C: ConeV) -> None:
    """Exact re-verification; raises CertificateError on any mismatch."""
    target = [Fraction(x) for x in target]
    if len(target) != C.dim:
        raise DimensionMismatch(f"target has length {len(target)}, cone dimension is {C.dim}")
    if isinstance(cert, Member):
        acc = [Fraction(0)] * C.dim
        for k, c in cert.coefficients.items():
            if not 0 <= k < len(C.rays):
                raise CertificateError(f"coefficient for nonexistent generator {k}")
            if c < 0:
                raise CertificateError(f"negative coefficient {c} on generator {k}")
            acc = [x + c * y for x, y in zip(acc, C.rays[k])]
        if len(cert.lineality_coefficients) not in (0, len(C.lineality)):
            raise CertificateError("wrong number of lineality coefficients")
        for c, l in zip(cert.lineality_coefficients, C.lineality):
            acc = [x + c * y for x, y in zip(acc, l)]
        if acc != target:
            raise CertificateError("member coefficients do not reproduce the target")
    elif isinstance(cert, Separated):
        f = cert.functional
        if len(f) != C.dim:
            raise CertificateError("functional has the wrong length")
        for k, r in enumerate(C.rays):
            if dot(f, r) < 0:
                raise CertificateError(f"functional is negative on generator {k}")
        for l in C.lineality:
            if dot(f, l) != 0:
                raise CertificateError("functional does not vanish on the lineality")
        value = dot(f, target)
        if value != cert.value_on_target or value >= 0:
            raise CertificateError("functional does not separate the target")
    else:
        raise CertificateError(f"not a certificate: {cert!r}")


def _membership_simplex(target: list[Fraction], C: ConeV) -> Certificate:
    cols = list(C.rays) + list(C.lineality) + [tuple(-x for x in l) for l in C.lineality]
    res = solve_feasibility(cols, target)
    nr, nl = len(C.rays), len(C.lineality)
    if res.feasible:
        z = res.solution
        coeffs = {k: z[k] for k in range(nr) if z[k]}
        lin = tuple(z[nr + j] - z[nr + nl + j] for j in range(nl))
        return Member(coeffs, lin)
    f = tuple(-y for y in res.farkas)
    return Separated(f, dot(f, target))


def membership(v: Sequence, C: ConeV, method: str = "simplex") -> Certificate:
    """Decide whether v lies in C; the returned certificate is already verified.

    ``method="facets"`` also decides through the facet description of C and
    fails loudly if the two routes disagree.
    """
    target = [Fraction(x) for x in v]
    if len(target) != C.dim:
        raise DimensionMismatch(f"vector has length {len(target)}, cone dimension is {C.dim}")
    cert = _membership_simplex(target, C)
    verify_certificate(cert, target, C)
    if method == "facets":
        H = facets(C)
        bad = next((r for r in H.inequalities if dot(r, target) < 0), None)
        if (bad is None) != cert.is_member:
            raise CertificateError("simplex and facet routes disagree on membership")
        if bad is not None:
            cert = Separated(tuple(Fraction(x) for x in bad), dot(bad, target))
            verify_certificate(cert, target, C)
    elif method != "simplex":
        raise ValueError(f"unknown membership method {method!r}")
    return cert


def _membership_job(args):
    v, C, method = args
    return membership(v, C, method)


def membership_batch(vectors: Sequence[Sequence], C: ConeV, workers: int = 1,
                     method: str = "simplex") -> list[Certificate]:
    """Certificates in input order; ``workers > 1`` uses a process pool."""
    if workers <= 1 or len(vectors) < 2:
        return [membership(v, C, method) for v in vectors]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_membership_job, [(v, C, method) for v in vectors], chunksize=4))


@dataclass
class Containment:
    contained: bool
    tested: list[IntVec] = field(default_factory=list)
    witnesses: list[Certificate] = field(default_factory=list)

    @property
    def first_failure(self) -> tuple[IntVec, Separated] | None:
        for v, w in zip(self.tested, self.witnesses):
            if not w.is_member:
                return v, w
        return None


def cone_contained(A: ConeH | ConeV, B: ConeV, workers: int = 1) -> Containment:
    """Is A a subset of B?  Tests every ray of A and both signs of its lineality."""
    if A.dim != B.dim:
        raise DimensionMismatch(f"ambient dimensions differ: {A.dim} vs {B.dim}")
    V = extremal_rays(A) if isinstance(A, ConeH) else A
    tested = list(V.rays)
    for l in V.lineality:
        tested.append(l)
        tested.append(tuple(-x for x in l))
    certs = membership_batch(tested, B, workers)
    return Containment(all(c.is_member for c in certs), tested, certs)


def contained_via_facets(A: ConeH | ConeV, B: ConeV) -> bool:
    """Dual route: every facet row of B must be nonnegative on A's generators."""
    V = extremal_rays(A) if isinstance(A, ConeH) else A
    H = facets(B)
    gens = list(V.rays) + list(V.lineality) + [tuple(-x for x in l) for l in V.lineality]
    return all(dot(r, g) >= 0 for r in H.inequalities for g in gens)


# matrix JSON ------------------------------------------------------------------

def matrix_to_json(dim: int, rows: Sequence[Sequence]) -> dict:
    return {"dim": dim, "rows": [[format_rational(x) for x in r] for r in rows]}


def matrix_from_json(obj: dict) -> tuple[int, list[list[Fraction]]]:
    dim = obj["dim"]
    if type(dim) is not int or dim < 0:
        raise ValueError("'dim' must be a nonnegative integer")
    rows = [[parse_rational(x) for x in r] for r in obj["rows"]]
    _check_dim(rows, dim, "row")
    return dim, rows


def dumps_matrix(dim: int, rows: Sequence[Sequence]) -> str:
    return json.dumps(matrix_to_json(dim, rows)) + "\n"
