"""Genus-zero cone containment: is every F-nef class on M_{0,n} an effective boundary sum?

Coordinates are the boundary classes delta_T of M_{0,n}, one per unordered
pair {T, T^c} with 2 <= |T| <= n-2, in the same order as the divisor module.
The space V is their span modulo the four-point relations; quotient
coordinates are the non-pivot columns of the reduced relation matrix.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

from .combinat import ModuliSig, boundary_indices, mask_of, marks_of, popcount
from .cone import (Certificate, ConeH, ConeV, DDState, certificate_from_json, extremal_rays,
                   matrix_to_json, membership, membership_batch, verify_certificate)
from .divisor import invariant_basis
from .errors import CertificateError, InvalidN, InvalidPartition
from .linalg import dot, format_rational, parse_rational, primitive, rank, rref

log = logging.getLogger(__name__)


def _require_n(n: int) -> None:
    if not isinstance(n, int) or n < 4:
        raise InvalidN(f"need n >= 4, got {n!r}")


@dataclass(frozen=True)
class RelationSpace:
    n: int
    coords: tuple[int, ...]              # canonical masks T
    relations: tuple[tuple[int, ...], ...]
    quotient_basis: tuple[int, ...]      # positions into coords
    projection: tuple[tuple[Fraction, ...], ...]  # quotient_dim x len(coords)

    @property
    def dim(self) -> int:
        return len(self.quotient_basis)

    @property
    def position(self) -> dict[int, int]:
        return {m: k for k, m in enumerate(self.coords)}

    def coordinate(self, mask: int) -> int | None:
        """Position of delta_T, or None when |T| <= 1 or |T^c| <= 1 (b_T = 0)."""
        full = (1 << self.n) - 1
        m = min(mask, full & ~mask)
        return self.position.get(m)

    def project(self, vec: Sequence) -> list[Fraction]:
        return [dot(row, vec) for row in self.projection]

    def restrict(self, covector: Sequence) -> list[Fraction]:
        """A covector vanishing on the relations, read in quotient coordinates."""
        return [Fraction(covector[k]) for k in self.quotient_basis]


def pairing_indicator(n: int, coords: Sequence[int], pair: int, quad: int) -> list[int]:
    """Indicator of the delta_T whose restriction to the 4-set ``quad`` is ``pair | quad - pair``."""
    other = quad & ~pair
    out = []
    for t in coords:
        r = t & quad
        out.append(1 if r == pair or r == other else 0)
    return out


@lru_cache(maxsize=None)
def build_V(n: int) -> RelationSpace:
    _require_n(n)
    coords = tuple(idx.mask for idx in boundary_indices(ModuliSig(0, n)))
    rels = []
    for quad_marks in itertools.combinations(range(1, n + 1), 4):
        i, j, k, l = quad_marks
        quad = mask_of(quad_marks)
        p1 = pairing_indicator(n, coords, mask_of((i, j)), quad)
        p2 = pairing_indicator(n, coords, mask_of((i, k)), quad)
        p3 = pairing_indicator(n, coords, mask_of((i, l)), quad)
        rels.append(tuple(a - b for a, b in zip(p1, p2)))
        rels.append(tuple(a - b for a, b in zip(p1, p3)))
    red, pivots = rref(rels, len(coords))
    pivset = set(pivots)
    free = tuple(k for k in range(len(coords)) if k not in pivset)
    pos = {c: q for q, c in enumerate(free)}
    proj = [[Fraction(0)] * len(coords) for _ in free]
    for c in range(len(coords)):
        if c in pos:
            proj[pos[c]][c] = Fraction(1)
    for row, p in zip(red, pivots):
        for q, f in enumerate(free):
            proj[q][p] = -row[f]
    space = RelationSpace(n, coords, tuple(rels), free, tuple(tuple(r) for r in proj))
    for r in rels:
        if any(space.project(r)):
            raise ArithmeticError("projection does not kill a relation")
    return space


def quotient_dimension(n: int, second_order: bool = False) -> int:
    """#coords - rank(relations); ``second_order`` eliminates columns in reverse."""
    space = build_V(n)
    ncols = len(space.coords)
    order = list(reversed(range(ncols))) if second_order else None
    return ncols - rank(space.relations, order)


def four_block_partitions(n: int):
    """Unordered partitions of 1..n into exactly four nonempty blocks, as mask tuples."""
    def rec(k, blocks):
        if k > n:
            if len(blocks) == 4:
                yield tuple(blocks)
            return
        bit = 1 << (k - 1)
        for t in range(len(blocks)):
            blocks[t] |= bit
            yield from rec(k + 1, blocks)
            blocks[t] &= ~bit
        if len(blocks) < 4 and n - k >= 3 - len(blocks):
            blocks.append(bit)
            yield from rec(k + 1, blocks)
            blocks.pop()

    yield from rec(1, [])


def partition_covector(space: RelationSpace, blocks: Sequence[int]) -> list[int]:
    """b_{I+J} + b_{I+K} + b_{I+L} - b_I - b_J - b_K - b_L over the delta_T coordinates."""
    I, J, K, L = blocks
    row = [0] * len(space.coords)
    for mask, sign in ((I | J, 1), (I | K, 1), (I | L, 1), (I, -1), (J, -1), (K, -1), (L, -1)):
        c = space.coordinate(mask)
        if c is not None:
            row[c] += sign
    return row


def n_rows_ambient(n: int) -> list[list[int]]:
    space = build_V(n)
    return [partition_covector(space, p) for p in four_block_partitions(n)]


@lru_cache(maxsize=None)
def build_N(n: int) -> ConeH:
    space = build_V(n)
    rows = []
    for row in n_rows_ambient(n):
        for rel in space.relations:
            if dot(row, rel):
                raise ArithmeticError("an inequality of N does not descend to V")
        rows.append(space.restrict(row))
    return ConeH(space.dim, tuple(primitive(r) for r in rows))


def e_generators(n: int) -> list[list[Fraction]]:
    """Images of the unit vectors delta_T in quotient coordinates, in coordinate order."""
    space = build_V(n)
    return [[row[c] for row in space.projection] for c in range(len(space.coords))]


@lru_cache(maxsize=None)
def build_E(n: int) -> ConeV:
    space = build_V(n)
    return ConeV(space.dim, tuple(primitive(v) for v in e_generators(n)))


def kappa_class(n: int) -> list[Fraction]:
    """Boundary expansion of kappa: |T|(n-|T|)/(n-1) - 1 on every delta_T."""
    space = build_V(n)
    return [Fraction(popcount(t) * (n - popcount(t)), n - 1) - 1 for t in space.coords]


@dataclass
class FultonResult:
    n: int
    answer: bool
    rays: tuple
    certificates: list[Certificate]
    E: ConeV


def fulton_question(n: int, *, workers: int = 1, deadline: float | None = None,
                    max_rays: int | None = None, state: DDState | None = None) -> FultonResult:
    """Extremal rays of N, then membership of each in E."""
    N = build_N(n)
    E = build_E(n)
    V = extremal_rays(N, deadline=deadline, max_rays=max_rays, state=state)
    tested = list(V.rays)
    for l in V.lineality:
        tested += [l, tuple(-x for x in l)]
    log.info("n=%d: %d extremal rays of N, checking membership in E", n, len(V.rays))
    certs = membership_batch(tested, E, workers)
    return FultonResult(n, all(c.is_member for c in certs), tuple(tested), certs, E)


# effectivity of kappa plus block corrections ----------------------------------

def parse_partition(n: int, blocks: Sequence[Sequence[int]]) -> list[int]:
    masks = [mask_of(b) for b in blocks]
    union = 0
    for b, m in zip(blocks, masks):
        if len(set(b)) != len(b) or any(not 1 <= k <= n for k in b):
            raise InvalidPartition(f"block {list(b)} is not a subset of 1..{n}")
        if len(b) < 2:
            raise InvalidPartition(f"block {list(b)} has fewer than two elements")
        if union & m:
            raise InvalidPartition("blocks overlap")
        union |= m
    if union != (1 << n) - 1:
        raise InvalidPartition("blocks do not cover 1..n")
    return masks


def is_union_of_blocks(mask: int, blocks: Sequence[int]) -> bool:
    return all(mask & b in (0, b) for b in blocks)


def admissible_classes(n: int, blocks: Sequence[Sequence[int]]) -> list[int]:
    """Canonical masks T (coordinates of V) that are unions of blocks."""
    masks = parse_partition(n, blocks)
    return [t for t in build_V(n).coords if is_union_of_blocks(t, masks)]


def lemma44_class(n: int, blocks: Sequence[Sequence[int]], e: Mapping) -> list[Fraction]:
    """kappa + sum e_T delta_T in delta_T coordinates.

    Keys of ``e`` are mark collections (or masks); T and T^c name the same class.
    """
    _require_n(n)
    space = build_V(n)
    masks = parse_partition(n, blocks)
    vec = kappa_class(n)
    given: dict[int, Fraction] = {}
    for key, val in e.items():
        mask = key if isinstance(key, int) else mask_of(key)
        c = space.coordinate(mask)
        if c is None or not is_union_of_blocks(mask, masks):
            raise InvalidPartition(f"{marks_of(mask)} is not a union of blocks naming a boundary class")
        q = Fraction(val)
        if c in given and given[c] != q:
            raise InvalidPartition(f"conflicting values for the class of {marks_of(mask)}")
        given[c] = q
    for c, q in given.items():
        vec[c] += q
    return vec


def lemma44_check(n: int, blocks: Sequence[Sequence[int]], e: Mapping) -> Certificate:
    vec = lemma44_class(n, blocks, e)
    return membership(build_V(n).project(vec), build_E(n))


def invariant_dimension(n: int, generators) -> int:
    """Dimension of the image in V of the invariant part of the delta_T span."""
    space = build_V(n)
    full = (1 << n) - 1
    pos = space.position

    def action(perm, k):
        t = mask_of(perm[m - 1] for m in marks_of(space.coords[k]))
        return pos[min(t, full & ~t)]

    basis = invariant_basis(len(space.coords), action, generators, n)
    return rank([space.project(v) for v in basis])


# certificate files --------------------------------------------------------------

def _transcript_hash(payload: dict) -> str:
    body = {k: payload[k] for k in ("n", "index", "ray", "cone", "certificate")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def certificate_payload(n: int, index: int, ray, E: ConeV, cert: Certificate) -> dict:
    payload = {
        "n": n,
        "index": index,
        "ray": [format_rational(x) for x in ray],
        "cone": matrix_to_json(E.dim, E.rays),
        "certificate": cert.to_json(),
    }
    payload["transcript_sha256"] = _transcript_hash(payload)
    return payload


def write_certificates(result: FultonResult, directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, (ray, cert) in enumerate(zip(result.rays, result.certificates)):
        p = directory / f"ray_{k:04d}.json"
        p.write_text(json.dumps(certificate_payload(result.n, k, ray, result.E, cert), indent=1) + "\n")
        paths.append(p)
    summary = {"n": result.n, "answer": "YES" if result.answer else "NO", "rays": len(result.rays)}
    (directory / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    return paths


def verify_certificate_file(path: Path) -> Certificate:
    """Re-verify a certificate file; also rebuilds E(n) and compares generators."""
    payload = json.loads(Path(path).read_text())
    if payload.get("transcript_sha256") != _transcript_hash(payload):
        raise CertificateError(f"{path}: transcript hash mismatch")
    cone = payload["cone"]
    E = ConeV(cone["dim"], tuple(tuple(int(parse_rational(x)) for x in r) for r in cone["rows"]))
    if "n" in payload and payload["n"] is not None and build_E(payload["n"]) != E:
        raise CertificateError(f"{path}: stored cone differs from E({payload['n']})")
    cert = certificate_from_json(payload["certificate"])
    verify_certificate(cert, [parse_rational(x) for x in payload["ray"]], E)
    return cert
