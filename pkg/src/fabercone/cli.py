"""Command-line front end.

Exit codes: 0 pass, 1 negative verdict, 2 input error, 3 resource budget.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .combinat import ModuliSig, enumerate_strata, mask_of, stratum_covector
from .cone import (ConeH, ConeV, DDState, extremal_rays, matrix_from_json, matrix_to_json,
                   membership)
from .divisor import divisor_from_json, dumps_divisor, flag_divisor
from .errors import CertificateError, FaberConeError, ResourceLimit
from .fulton import (build_E, build_V, fulton_question, kappa_class, lemma44_check,
                     quotient_dimension, verify_certificate_file, write_certificates)
from .intersection import (CHAR_ZERO_NOTE, b_label, faber_cone, is_f_nef, verify_flag_divisor)
from .linalg import dot, format_rational, parse_rational

log = logging.getLogger("fabercone")

CACHE_VERSION = 1
EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _vec(v) -> str:
    return "(" + ",".join(format_rational(x) for x in v) + ")"


def _deadline(budget: float | None) -> float | None:
    return None if budget is None else time.monotonic() + budget


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


# strata / fnef ------------------------------------------------------------------

def _functional_text(cov: dict) -> str:
    return " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*{k}" for k, c in sorted(cov.items()))


def cmd_strata(args) -> int:
    sig = ModuliSig(args.g, args.n)
    strata = enumerate_strata(sig)
    if args.json:
        rows = []
        for x in strata:
            obj = x.to_json()
            obj["functional"] = {str(k): c for k, c in sorted(stratum_covector(x).items())}
            rows.append(obj)
        _out(_dump(rows))
    else:
        for x in strata:
            _out(f"{x}: {_functional_text(stratum_covector(x))}")
        _out(f"{len(strata)} strata")
    return EXIT_OK


def _load_json(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return json.loads(text)


def cmd_fnef(args) -> int:
    D = divisor_from_json(_load_json(args.file))
    report = is_f_nef(D)
    if args.report:
        _out(_dump(report.to_json()))
    else:
        _out("F-nef" if report.verdict else "not F-nef")
        for x, v in report.violated:
            _out(f"violated {x}: {format_rational(v)}")
        _out(f"tight_rank {report.tight_rank}")
    return EXIT_OK if report.verdict else EXIT_NEGATIVE


# faber-cone with cache -------------------------------------------------------------

def cache_dir() -> Path:
    env = os.environ.get("FABERCONE_CACHE")
    return Path(env) if env else Path.home() / ".cache" / "fabercone"


def cache_key(sig: ModuliSig, H: ConeH, mode: str = "rays") -> str:
    body = {"version": CACHE_VERSION, "g": sig.g, "n": sig.n, "mode": mode,
            "H": matrix_to_json(H.dim, H.inequalities)}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def cache_load(path: Path, H: ConeH) -> ConeV | None:
    """Read a cached V-description; None if absent, stale or failing the row check."""
    try:
        obj = json.loads(path.read_text())
        if obj.get("version") != CACHE_VERSION:
            return None
        dim, rays = matrix_from_json(obj["rays"])
        _, lin = matrix_from_json(obj["lineality"])
        V = ConeV(dim, tuple(tuple(int(x) for x in r) for r in rays),
                  tuple(tuple(int(x) for x in r) for r in lin))
    except (OSError, ValueError, KeyError, TypeError):
        return None
    if dim != H.dim or not all(H.contains(r) for r in V.rays):
        return None
    if any(dot(r, l) for r in H.inequalities for l in V.lineality):
        return None
    return V


def cache_store(path: Path, V: ConeV) -> None:
    obj = {"version": CACHE_VERSION, "rays": matrix_to_json(V.dim, V.rays),
           "lineality": matrix_to_json(V.dim, V.lineality)}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(obj) + "\n")
        tmp.replace(path)
    except OSError as exc:
        log.warning("could not write cache entry %s: %s", path, exc)


def cmd_faber_cone(args) -> int:
    sig = ModuliSig(args.g, args.n)
    coords, H = faber_cone(sig)
    V = None
    path = cache_dir() / f"{cache_key(sig, H)}.json"
    if not args.no_cache:
        V = cache_load(path, H)
        if V is not None:
            log.info("cache hit %s", path)
    if V is None:
        V = extremal_rays(H, deadline=_deadline(args.budget), max_rays=args.max_rays)
        if not args.no_cache:
            cache_store(path, V)
    if args.json:
        _out(_dump({"coordinates": [b_label(c) for c in coords],
                    "rays": matrix_to_json(V.dim, V.rays),
                    "lineality": matrix_to_json(V.dim, V.lineality)}))
        return EXIT_OK
    _out("coordinates: " + " ".join(b_label(c) for c in coords))
    _out(f"{len(H.inequalities)} inequalities, {len(V.rays)} rays, lineality dimension {len(V.lineality)}")
    if args.rays:
        for r in V.rays:
            _out(_vec(r))
        for l in V.lineality:
            _out("lineality " + _vec(l))
    return EXIT_OK


# genus zero ---------------------------------------------------------------------------

def cmd_fulton(args) -> int:
    state = None
    if args.resume:
        state = DDState.from_json(_load_json(args.resume))
    try:
        result = fulton_question(args.n, workers=args.threads, deadline=_deadline(args.budget),
                                 max_rays=args.max_rays, state=state)
    except ResourceLimit as exc:
        ckpt = Path(args.checkpoint) if args.checkpoint else \
            Path(args.certificates or ".") / f"fulton_{args.n}_checkpoint.json"
        if exc.state is not None:
            ckpt.parent.mkdir(parents=True, exist_ok=True)
            ckpt.write_text(json.dumps(exc.state.to_json()) + "\n")
            print(f"{exc}; partial progress saved to {ckpt}", file=sys.stderr)
        else:
            print(str(exc), file=sys.stderr)
        return EXIT_RESOURCE
    if args.certificates:
        write_certificates(result, Path(args.certificates))
    _out("YES" if result.answer else "NO")
    members = sum(c.is_member for c in result.certificates)
    _out(f"n={args.n}: {len(result.rays)} extremal rays of N, {members} in E")
    return EXIT_OK if result.answer else EXIT_NEGATIVE


def _parse_vector(text: str) -> list[Fraction]:
    return [parse_rational(x) for x in text.split(",") if x.strip()]


def cmd_membership(args) -> int:
    if args.verify:
        try:
            cert = verify_certificate_file(Path(args.verify))
        except CertificateError as exc:
            _out(f"REJECTED: {exc}")
            return EXIT_NEGATIVE
        _out("OK " + ("member" if cert.is_member else "separated"))
        return EXIT_OK
    if not (args.cone and args.vector):
        raise ValueError("membership needs --verify FILE, or --cone FILE and --vector")
    dim, rows = matrix_from_json(_load_json(args.cone))
    if args.inequalities:
        C = extremal_rays(ConeH(dim, tuple(rows)))
    else:
        C = ConeV(dim, tuple(rows))
    cert = membership(_parse_vector(args.vector), C)
    _out(_dump(cert.to_json()))
    return EXIT_OK if cert.is_member else EXIT_NEGATIVE


def _parse_blocks(text: str) -> list[list[int]]:
    return [[int(x) for x in b.split(",") if x.strip()] for b in text.split("|")]


def _parse_e(items: list[str]) -> dict:
    e = {}
    for item in items:
        lhs, sep, rhs = item.partition("=")
        if not sep:
            raise ValueError(f"expected MARKS=VALUE, got {item!r}")
        e[mask_of(int(x) for x in lhs.split(","))] = parse_rational(rhs)
    return e


def cmd_lemma44(args) -> int:
    cert = lemma44_check(args.n, _parse_blocks(args.partition), _parse_e(args.e or []))
    _out("Member" if cert.is_member else "Separated")
    _out(_dump(cert.to_json()))
    return EXIT_OK if cert.is_member else EXIT_NEGATIVE


def cmd_kappa(args) -> int:
    space = build_V(args.n)
    vec = kappa_class(args.n)
    for t, c in zip(space.coords, vec):
        _out(f"delta_{{{','.join(str(k + 1) for k in range(args.n) if t >> k & 1)}}} {format_rational(c)}")
    cert = membership(space.project(vec), build_E(args.n))
    _out("kappa in E: " + ("yes" if cert.is_member else "no"))
    return EXIT_OK if cert.is_member else EXIT_NEGATIVE


def cmd_relations(args) -> int:
    space = build_V(args.n)
    d = space.dim
    if quotient_dimension(args.n, second_order=True) != d:
        raise ArithmeticError("elimination orders disagree on dim V")
    _out(f"dim V = {d}")
    _out(f"{len(space.coords)} coordinates, {len(space.relations)} relation rows")
    return EXIT_OK


def cmd_flag_divisor(args) -> int:
    D = flag_divisor(args.g, args.n, args.a, args.b)
    if not args.verify:
        sys.stdout.write(dumps_divisor(D))
        return EXIT_OK
    rep = verify_flag_divisor(args.g, args.n, args.a, args.b)
    _out(f"parameter conditions: {'pass' if rep.conditions_met else 'fail'}")
    _out(f"zero on type 6: {'pass' if rep.zero_on_T6 else 'fail'}")
    _out(f"positive elsewhere: {'pass' if rep.positive_on_rest else 'fail'}")
    for x, v in rep.values:
        _out(f"  {x}: {format_rational(v)}")
    _out(f"nefness conclusion {CHAR_ZERO_NOTE}")
    ok = rep.conditions_met and rep.zero_on_T6 and rep.positive_on_rest
    return EXIT_OK if ok else EXIT_NEGATIVE


# parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fabercone", description="Exact F-nef cone computations on M_{g,n}.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("strata", help="list one-dimensional boundary strata")
    s.add_argument("-g", type=int, required=True)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_strata)

    s = sub.add_parser("fnef", help="test a divisor class for F-nefness")
    s.add_argument("file", help="divisor JSON file, or - for stdin")
    s.add_argument("--report", action="store_true", help="print the full report as JSON")
    s.set_defaults(func=cmd_fnef)

    s = sub.add_parser("faber-cone", help="extremal rays of the F-nef cone")
    s.add_argument("-g", type=int, required=True)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--rays", action="store_true", help="list the rays")
    s.add_argument("--json", action="store_true")
    s.add_argument("--no-cache", action="store_true")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--budget", type=float, help="time budget in seconds")
    s.add_argument("--max-rays", type=int)
    s.set_defaults(func=cmd_faber_cone)

    s = sub.add_parser("fulton", help="decide whether N is contained in E on M_{0,n}")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--certificates", metavar="DIR")
    s.add_argument("--budget", type=float, help="time budget in seconds")
    s.add_argument("--max-rays", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--checkpoint", metavar="FILE", help="where to save progress on budget exhaustion")
    s.add_argument("--resume", metavar="FILE", help="resume from a saved checkpoint")
    s.set_defaults(func=cmd_fulton)

    s = sub.add_parser("membership", help="cone membership with a certificate")
    s.add_argument("--verify", metavar="FILE", help="re-verify a certificate file")
    s.add_argument("--cone", metavar="FILE", help="matrix JSON of the cone")
    s.add_argument("--inequalities", action="store_true", help="read the matrix as an H-description")
    s.add_argument("--vector", help="comma separated rationals")
    s.set_defaults(func=cmd_membership)

    s = sub.add_parser("lemma44", help="effectivity of kappa plus block corrections")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--partition", required=True, help='blocks like "1,2|3,4,5"')
    s.add_argument("--e", action="append", metavar="MARKS=VALUE", help='e.g. "1,2=-1"; repeatable')
    s.set_defaults(func=cmd_lemma44)

    s = sub.add_parser("flag-divisor", help="the flag divisor and its stratum values")
    s.add_argument("-g", type=int, required=True)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("-a", type=parse_rational, required=True)
    s.add_argument("-b", type=parse_rational, required=True, help="b_irr")
    s.add_argument("--verify", action="store_true")
    s.set_defaults(func=cmd_flag_divisor)

    s = sub.add_parser("kappa", help="boundary expansion of kappa on M_{0,n}")
    s.add_argument("-n", type=int, required=True)
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("relations", help="dimension of the relation quotient V(n)")
    s.add_argument("-n", type=int, required=True)
    s.set_defaults(func=cmd_relations)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (FaberConeError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
