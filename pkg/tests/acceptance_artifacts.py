"""Computations behind the acceptance suite.

Each ``criterion_k`` returns ``(ok, detail, artifact)`` where ``artifact`` is a
JSON-able record of everything the check produced.  Run as a script to write
all artifacts for a given thread count into a directory:

    python3 tests/acceptance_artifacts.py --threads 4 --out DIR
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import brute_force_rays_3d, faber_rows_m3, fm_extremal_rays  # noqa: E402

from fabercone import cli  # noqa: E402
from fabercone.combinat import (BOUNDARY, ClassIndex, ModuliSig, enumerate_strata,  # noqa: E402
                               stratum_covector)
from fabercone.cone import (ConeH, ConeV, Member, Separated, extremal_rays, facets,  # noqa: E402
                            membership_batch, verify_certificate)
from fabercone.divisor import ch_gamma, genus1_relations, unmarked_class  # noqa: E402
from fabercone.errors import CertificateError  # noqa: E402
from fabercone.fulton import (build_E, build_V, lemma44_class, n_rows_ambient,  # noqa: E402
                              quotient_dimension, verify_certificate_file)
from fabercone.intersection import (faber_cone, is_f_nef, nef_criterion_61,  # noqa: E402
                                    verify_flag_divisor)
from fabercone.linalg import dot, format_rational  # noqa: E402

G10_VERTEX = (30, 3, 6, 6, 2, 4, 6)


def run_cli(argv: list[str]) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue()


def ten_lambda_class(g: int):
    """10 lambda - 2 delta + delta_irr: a = 10, b_irr = 1, b_i = 2."""
    return unmarked_class(g, 10, 1, 2)


def eleven_lambda_class(g: int):
    """11 lambda - delta: a = 11, b_irr = 1, b_i = 1."""
    return unmarked_class(g, 11, 1, 1)


# 1 ---------------------------------------------------------------------------------

def criterion_1(threads: int, workdir: Path):
    """fulton -n 4,5,6 through the CLI, then re-verify every certificate file."""
    ok, notes, timings, art = True, [], {}, {}
    for n in (4, 5, 6):
        d = workdir / f"fulton_{n}"
        t0 = time.monotonic()
        code, out = run_cli(["fulton", "-n", str(n), "--certificates", str(d), "--threads", str(threads)])
        timings[n] = time.monotonic() - t0
        files = sorted(d.glob("ray_*.json"))
        verified = 0
        for f in files:
            try:
                cert = verify_certificate_file(f)
            except CertificateError:
                continue
            verified += isinstance(cert, Member)
        limit = 10 if n <= 5 else 1800
        good = (code == 0 and out.splitlines()[0] == "YES" and files and verified == len(files)
                and timings[n] < limit)
        ok &= bool(good)
        notes.append(f"n={n}: {out.splitlines()[0] if out else '?'}, {verified}/{len(files)} Member "
                     f"certificates verified, {timings[n]:.1f}s")
        art[n] = out
    return ok, "; ".join(notes), {"stdout": art, "timings": timings}


# 2 ---------------------------------------------------------------------------------

def criterion_2():
    ok, notes, art = True, [], {}
    for g in range(2, 13):
        for name, D in (("ten_lambda_class", ten_lambda_class(g)), ("eleven_lambda_class", eleven_lambda_class(g))):
            rep = is_f_nef(D)
            good = rep.verdict and nef_criterion_61(D)
            ok &= good
            if not good:
                notes.append(f"{name} fails at g={g}")
            art[f"{name}_{g}"] = rep.to_json()
        rep = is_f_nef(ch_gamma(g))
        t1 = [v for x, v in rep.violated if x.kind == 1]
        if g >= 3:
            good = (not rep.verdict and [x.kind for x, _ in rep.violated] == [1]
                    and t1 == [Fraction(4 - 2 * g)])
        else:
            good = rep.verdict and any(x.kind == 1 for x in rep.tight)
        ok &= good
        if not good:
            notes.append(f"ch_gamma wrong at g={g}")
        art[f"ch_gamma_{g}"] = rep.to_json()
    return ok, "; ".join(notes) or "both classes F-nef and pass nef_criterion_61 for g=2..12; ch_gamma T1 = 4-2g", art


# 3 ---------------------------------------------------------------------------------

def criterion_3(threads: int):
    D = unmarked_class(10, 30, 3, [6, 6, 2, 4, 6])
    rep = is_f_nef(D)
    code, out = run_cli(["faber-cone", "-g", "10", "-n", "0", "--rays", "--no-cache",
                         "--threads", str(threads)])
    listed = "(" + ",".join(map(str, G10_VERTEX)) + ")" in out.splitlines()
    n61 = nef_criterion_61(D)
    ok = rep.verdict and rep.tight_rank == 6 and listed and code == 0 and n61 is False
    detail = f"F-nef={rep.verdict}, tight_rank={rep.tight_rank}, listed={listed}, nef_61={n61}"
    return ok, detail, {"report": rep.to_json(), "faber_cone": out}


# 4 ---------------------------------------------------------------------------------

def criterion_4():
    coords, H = faber_cone(ModuliSig(3, 0))
    V = extremal_rays(H)
    expected = {(1, 0, 0), (12, 1, 0), (10, 1, 2)}
    oracle = brute_force_rays_3d(faber_rows_m3())
    ok = set(V.rays) == expected == oracle and not V.lineality and set(H.inequalities) == set(faber_rows_m3())
    return ok, f"rays {sorted(V.rays)}, oracle {sorted(oracle)}", {"rays": [list(r) for r in V.rays]}


# 5 ---------------------------------------------------------------------------------

FLAG_CASES = [(1, 2, 23, 2), (2, 1, 17, Fraction(3, 2)), (2, 2, 58, 5), (3, 1, 60, 5), (4, 1, 90, 7)]


def criterion_5():
    ok, notes, art = True, [], {}
    for g, n, a, b in FLAG_CASES:
        rep = verify_flag_divisor(g, n, a, b)
        good = rep.conditions_met and rep.zero_on_T6 and rep.positive_on_rest
        ok &= good
        notes.append(f"({g},{n}) a={a} b_irr={b}: {'ok' if good else 'FAILED'} over {len(rep.values)} strata")
        art[f"{g},{n}"] = rep.to_json()
    return ok, "; ".join(notes), art


# 6 ---------------------------------------------------------------------------------

def criterion_6():
    ok, notes, art = True, [], {}
    for n in range(4, 9):
        expected = 2 ** (n - 1) - n * (n - 1) // 2 - 1
        d1, d2 = quotient_dimension(n), quotient_dimension(n, second_order=True)
        ok &= d1 == d2 == expected == build_V(n).dim
        notes.append(f"n={n}: {d1}/{d2} (expected {expected})")
        art[n] = [d1, d2]
    return ok, "; ".join(notes), art


# 7 ---------------------------------------------------------------------------------

def criterion_7():
    ok, count = True, 0
    for n in range(4, 7):
        space = build_V(n)
        rows = n_rows_ambient(n)
        # the type-6 functionals of M_{0,n}, read on the boundary coordinates
        sig = ModuliSig(0, n)
        strata_rows = []
        for x in enumerate_strata(sig):
            cov = stratum_covector(x)
            strata_rows.append([cov.get(ClassIndex(BOUNDARY, 0, t), 0) for t in space.coords])
        ok &= sorted(map(tuple, strata_rows)) == sorted(map(tuple, rows))
        for rel in space.relations:
            for r in strata_rows:
                count += 1
                ok &= dot(r, rel) == 0
    for n in range(1, 7):
        sig = ModuliSig(1, n)
        strata = enumerate_strata(sig)
        for rel in genus1_relations(n):
            for x in strata:
                count += 1
                ok &= sum(c * rel[k] for k, c in stratum_covector(x).items()) == 0
    return ok, f"{count} relation/functional pairs evaluate to 0", {"pairs": count}


# 8 ---------------------------------------------------------------------------------

def random_block_partition(rng: random.Random, n: int) -> list[list[int]]:
    while True:
        marks = list(range(1, n + 1))
        rng.shuffle(marks)
        k = rng.randint(1, n // 2)
        cuts = sorted(rng.sample(range(1, n), k - 1))
        blocks = [sorted(marks[a:b]) for a, b in zip([0] + cuts, cuts + [n])]
        if all(len(b) >= 2 for b in blocks):
            return sorted(blocks)


def lemma44_instances(count: int = 50, seed: int = 44):
    from fabercone.fulton import admissible_classes
    rng = random.Random(seed)
    values = [Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(2)]
    out = []
    for _ in range(count):
        n = rng.choice([4, 5, 6])
        blocks = random_block_partition(rng, n)
        e = {t: rng.choice(values) for t in admissible_classes(n, blocks)}
        out.append((n, blocks, e))
    return out


def criterion_8(threads: int):
    instances = lemma44_instances()
    certs = []
    for n in (4, 5, 6):
        group = [(blocks, e) for m, blocks, e in instances if m == n]
        space = build_V(n)
        vecs = [space.project(lemma44_class(n, blocks, e)) for blocks, e in group]
        certs += list(zip([n] * len(vecs), vecs, membership_batch(vecs, build_E(n), threads)))
    members = sum(c.is_member for _, _, c in certs)
    for n, v, c in certs:
        verify_certificate(c, v, build_E(n))
    art = [{"n": n, "certificate": c.to_json()} for n, _, c in certs]
    return members == len(instances), f"{members}/{len(instances)} instances Member", art


# 9 ---------------------------------------------------------------------------------

def random_cones(count: int = 200, seed: int = 9):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        d = rng.randint(1, 6)
        m = rng.randint(1, 12)
        out.append(ConeH(d, tuple(tuple(rng.randint(-3, 3) for _ in range(d)) for _ in range(m))))
    return out


def corrupt_and_check(V: ConeV, threads: int) -> tuple[bool, list]:
    """Certificates for every ray and for a point outside; tampered copies must be rejected."""
    if not V.rays:
        return True, []
    targets = [list(r) for r in V.rays] + [[-x for x in V.rays[0]]]
    certs = membership_batch(targets, V, threads)
    ok = True
    for t, c in zip(targets, certs):
        verify_certificate(c, t, V)
        if isinstance(c, Member):
            k = next(iter(c.coefficients), None)
            if k is None:
                continue
            bad = dict(c.coefficients)
            bad[k] += 1
            tampered = Member(bad, c.lineality_coefficients)
        else:
            tampered = Separated(tuple(-x for x in c.functional), -c.value_on_target)
        try:
            verify_certificate(tampered, t, V)
            ok = False
        except CertificateError:
            pass
    return ok, [c.to_json() for c in certs]


def criterion_9(threads: int):
    ok, mism, trips, rejected, art = True, 0, 0, True, []
    for C in random_cones():
        V = extremal_rays(C)
        if set(V.rays) != fm_extremal_rays(list(C.inequalities), C.dim):
            mism += 1
        back = extremal_rays(facets(V))
        trips += back == V
        good, certs = corrupt_and_check(V, threads)
        rejected &= good
        art.append({"rays": [list(r) for r in V.rays], "lineality": [list(l) for l in V.lineality],
                    "certificates": certs})
    ok = mism == 0 and trips == 200 and rejected
    return ok, f"FM mismatches {mism}, round trips {trips}/200, corrupted certificates rejected: {rejected}", art


# artifact writer --------------------------------------------------------------------

def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=lambda x: format_rational(x)) + "\n"


def write_all(threads: int, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    ok, detail, art = criterion_1(threads, out)
    (out / "timings.json").write_text(_json(art.pop("timings")))
    (out / "c1.json").write_text(_json(art))
    results[1] = (ok, detail)
    steps = [(2, criterion_2), (3, lambda: criterion_3(threads)), (4, criterion_4), (5, criterion_5),
             (6, criterion_6), (7, criterion_7), (8, lambda: criterion_8(threads)),
             (9, lambda: criterion_9(threads))]
    for k, fn in steps:
        ok, detail, art = fn()
        (out / f"c{k}.json").write_text(_json(art))
        results[k] = (ok, detail)
    (out / "results.txt").write_text(
        "".join(f"{k} {'PASS' if ok else 'FAIL'} {detail}\n" for k, (ok, detail) in sorted(results.items())))
    return results


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    args = p.parse_args(argv)
    results = write_all(args.threads, args.out)
    return 0 if all(ok for ok, _ in results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
