import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fabercone.combinat import (DELTA_IRR_INDEX, LAMBDA_INDEX, ModuliSig, boundary_indices,
                                canonical_index, class_indices, enumerate_strata, mask_of, psi,
                                stratum_covector)
from fabercone.divisor import (DivisorClass, RelationTableError, act, boundary_class, ch_gamma,
                               coarsen_to_unmarked, divisor_from_json, divisor_to_json, dumps_divisor,
                               flag_divisor, genus1_normal_form, genus1_relations, group_closure,
                               lookup_b, symmetrize, unmarked_class, validate_relations)
from fabercone.errors import GroupTooLarge, InvalidSignature, NonexistentClass
from fabercone.intersection import is_f_nef


def test_lookup_examples():
    D = unmarked_class(3, 11, 1, 1)
    assert lookup_b(D, 2, 0) == 1
    assert lookup_b(D, 1, 0) == 1
    E = DivisorClass(ModuliSig(1, 2), {psi(1): 2})
    assert lookup_b(E, 0, mask_of([1])) == 2


def test_lookup_on_m11_reads_psi():
    # delta_{1,empty} on M_{1,1} is the complement of delta_{0,{1}} = -psi_1
    D = DivisorClass(ModuliSig(1, 1), {psi(1): 5, LAMBDA_INDEX: 2})
    assert lookup_b(D, 1, 0) == 5
    assert lookup_b(D, 0, 1) == 5


def test_lookup_nonexistent_is_zero():
    D = flag_divisor(2, 2, 1, 1)
    assert lookup_b(D, 0, 0) == 0
    assert lookup_b(D, 2, mask_of([1, 2])) == 0


@pytest.mark.parametrize("g,n", [(1, 3), (2, 2), (3, 1), (0, 6), (4, 0)])
def test_lookup_complement_symmetry(g, n):
    sig = ModuliSig(g, n)
    coeffs = {c: k + 1 for k, c in enumerate(class_indices(sig))}
    D = DivisorClass(sig, coeffs)
    for i in range(g + 1):
        for m in range(sig.full + 1):
            assert lookup_b(D, i, m) == lookup_b(D, g - i, sig.full & ~m)


@pytest.mark.parametrize("g", [2, 3, 10])
def test_ch_gamma(g):
    D = ch_gamma(g)
    assert D.a == 8 * g + 4 and D.b_irr == g
    assert all(lookup_b(D, i, 0) == 2 * g for i in range(1, g // 2 + 1))
    with pytest.raises(InvalidSignature):
        ch_gamma(1)


def test_flag_divisor_examples():
    D = flag_divisor(4, 0, 100, 13)
    assert lookup_b(D, 1, 0) == 3 and lookup_b(D, 2, 0) == 4
    D = flag_divisor(2, 1, 17, Fraction(3, 2))
    assert D[psi(1)] == 2 and D.b_irr == Fraction(3, 2)
    assert lookup_b(D, 1, 0) == 2 and lookup_b(D, 1, 1) == 2
    D = flag_divisor(1, 2, 23, 2)
    assert D[psi(1)] == D[psi(2)] == 2
    assert lookup_b(D, 0, mask_of([1, 2])) == 2


@pytest.mark.parametrize("g,n", [(1, 3), (2, 2), (0, 5)])
def test_flag_divisor_relabel_invariant(g, n):
    a, b = (0, 0) if g == 0 else (7, 2)
    D = flag_divisor(g, n, a, b)
    for perm in group_closure([tuple(list(range(2, n + 1)) + [1]), (2, 1) + tuple(range(3, n + 1))], n):
        assert act(D, perm) == D


def test_coarsen_examples():
    sig = ModuliSig(3, 1)
    D = DivisorClass(sig, {LAMBDA_INDEX: 5, DELTA_IRR_INDEX: -1,
                           canonical_index(sig, 1, 0): -1, canonical_index(sig, 1, 1): -3})
    A = coarsen_to_unmarked(D)
    assert A == unmarked_class(3, 5, 1, 3)
    U = unmarked_class(4, 9, 1, [2, 3])
    assert coarsen_to_unmarked(U) == U
    A = coarsen_to_unmarked(flag_divisor(2, 1, 17, Fraction(3, 2)))
    assert A == unmarked_class(2, 17, Fraction(3, 2), 2)


def test_same_class_on_m21():
    # delta_{1,empty} and delta_{1,{1}} are the same divisor on M_{2,1}
    sig = ModuliSig(2, 1)
    assert canonical_index(sig, 1, 0) == canonical_index(sig, 1, 1)


def _values_by_kind(D):
    out = {}
    for x in enumerate_strata(D.sig):
        v = sum(c * D[k] for k, c in stratum_covector(x).items())
        out.setdefault(x.kind, []).append(v)
    return out


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 1), (2, 2), (3, 1), (4, 1)]), st.data())
def test_coarsening_preserves_each_family(sig_gn, data):
    g, n = sig_gn
    sig = ModuliSig(g, n)
    coeffs = {LAMBDA_INDEX: data.draw(st.integers(0, 40)),
              DELTA_IRR_INDEX: -data.draw(st.integers(0, 4))}
    for idx in boundary_indices(sig):
        coeffs[idx] = -data.draw(st.integers(0, 8))
    for k in range(1, n + 1):
        coeffs[psi(k)] = data.draw(st.integers(0, 8))
    D = DivisorClass(sig, coeffs)
    A = coarsen_to_unmarked(D)
    marked, unmarked = _values_by_kind(D), _values_by_kind(A)
    for kind, vals in unmarked.items():
        if all(v >= 0 for v in marked.get(kind, [])) and kind in marked:
            assert all(v >= 0 for v in vals), kind


def test_arithmetic():
    sig = ModuliSig(0, 5)
    d = boundary_class(sig, 0, [1, 2])
    e = boundary_class(sig, 0, [3, 4, 5])
    assert d == e
    assert (d + d) == 2 * d
    assert (d - d).coeffs == {}
    assert str(3 * d) == "3*delta_0,{1,2}"
    with pytest.raises(InvalidSignature):
        d + boundary_class(ModuliSig(0, 4), 0, [1, 2])


def test_symmetrize_examples():
    sig = ModuliSig(0, 5)
    d12 = boundary_class(sig, 0, [1, 2])
    assert symmetrize(d12, []) == d12
    avg = symmetrize(d12, [(2, 3, 1, 4, 5), (2, 1, 3, 4, 5)])
    third = Fraction(1, 3)
    assert avg == third * (d12 + boundary_class(sig, 0, [1, 3]) + boundary_class(sig, 0, [2, 3]))


def test_symmetrize_is_projection():
    sig = ModuliSig(1, 4)
    gens = [(2, 1, 3, 4), (1, 3, 4, 2)]
    D = DivisorClass(sig, {c: k for k, c in enumerate(class_indices(sig))})
    S = symmetrize(D, gens)
    assert symmetrize(S, gens) == S
    for p in gens:
        assert act(S, p) == S


def test_group_limit():
    assert len(group_closure([(2, 3, 4, 5, 6, 1), (2, 1, 3, 4, 5, 6)], 6)) == 720
    with pytest.raises(GroupTooLarge):
        group_closure([(2, 3, 4, 5, 6, 1), (2, 1, 3, 4, 5, 6)], 6, limit=100)


def test_json_schema_exact():
    D = flag_divisor(1, 2, 23, Fraction(3, 2))
    assert divisor_to_json(D) == {"g": 1, "n": 2, "lambda": "23", "delta_irr": "-3/2",
                                  "psi": {"1": "2", "2": "2"}, "boundary": {"0|1,2": "-2"}}
    assert divisor_from_json(json.loads(dumps_divisor(D))) == D
    G = unmarked_class(3, 11, 1, 1)
    assert divisor_to_json(G)["boundary"] == {"1|": "-1"}


def test_json_accepts_noncanonical_keys():
    obj = {"g": 3, "n": 0, "lambda": "11", "delta_irr": "-1", "boundary": {"2|": "-1"}}
    assert divisor_from_json(obj) == unmarked_class(3, 11, 1, 1)
    obj = {"g": 0, "n": 4, "boundary": {"0|3,4": "1", "0|1,2": "1/2"}}
    D = divisor_from_json(obj)
    assert divisor_to_json(D)["boundary"] == {"0|1,2": "3/2"}
    assert divisor_to_json(D)["lambda"] == "0"


@pytest.mark.parametrize("obj", [
    {"n": 3},
    {"g": "1", "n": 3},
    {"g": 1, "n": 2, "lambda": "1/0"},
    {"g": 1, "n": 2, "boundary": {"0|1": "1"}},
    {"g": 1, "n": 2, "boundary": {"01": "1"}},
    {"g": 0, "n": 4, "lambda": "1"},
    {"g": 1, "n": 2, "psi": {"3": "1"}},
])
def test_json_rejects_malformed(obj):
    with pytest.raises(ValueError):
        divisor_from_json(obj)


def test_noncanonical_index_rejected():
    from fabercone.combinat import BOUNDARY, ClassIndex
    with pytest.raises(NonexistentClass):
        DivisorClass(ModuliSig(0, 4), {ClassIndex(BOUNDARY, 0, mask_of([3, 4])): 1})


@pytest.mark.parametrize("n", range(1, 7))
def test_genus1_table_validates(n):
    rels = genus1_relations(n)
    assert len(rels) == n + 1


def test_genus1_table_rejects_bad_rows():
    sig = ModuliSig(1, 2)
    rels = genus1_relations(2)
    with pytest.raises(RelationTableError):
        validate_relations(sig, rels + [rels[0]])
    with pytest.raises(RelationTableError):
        validate_relations(sig, rels[:-1] + [rels[-1] + DivisorClass(sig, {LAMBDA_INDEX: 1})])
    with pytest.raises(RelationTableError):
        validate_relations(sig, rels[:-1])


@pytest.mark.parametrize("n", [1, 3, 5])
def test_genus1_normal_form(n):
    sig = ModuliSig(1, n)
    D = DivisorClass(sig, {c: k + 1 for k, c in enumerate(class_indices(sig))})
    N = genus1_normal_form(D)
    assert N[LAMBDA_INDEX] == 0 and all(N[psi(k)] == 0 for k in range(1, n + 1))
    assert is_f_nef(N).verdict == is_f_nef(D).verdict
    for x in enumerate_strata(sig):
        cov = stratum_covector(x)
        assert sum(c * D[k] for k, c in cov.items()) == sum(c * N[k] for k, c in cov.items())
