import itertools

import pytest

from conftest import all_perms, oracle_separable, pat, perm
from rpl.errors import ContractViolation
from rpl.patterns import Pattern, is_transitive
from rpl.perms import (
    Permutation,
    Trichotomy,
    classify_trichotomy,
    converge,
    direct_sum,
    forbidden_witness,
    is_convergent,
    is_separable,
    join,
    pattern_to_perm,
    perm_to_pattern,
    separating_tree,
    skew_sum,
    split_reducible,
)


def test_permutation_validation_and_text():
    with pytest.raises(ContractViolation):
        Permutation((0, 0, 1))
    with pytest.raises(ContractViolation):
        Permutation(())
    p = perm("2031")
    assert p.to_text() == "2031"
    big = Permutation(tuple(range(11)))
    assert big.to_text() == "0,1,2,3,4,5,6,7,8,9,10"
    assert Permutation.from_text(big.to_text()) == big


def test_sum_examples():
    assert direct_sum(perm("0"), perm("0")) == perm("01")
    assert skew_sum(perm("0"), perm("0")) == perm("10")
    assert skew_sum(perm("01"), perm("01")) == perm("2301")


def test_sum_sizes_and_associativity_small():
    for a in all_perms(2):
        for b in all_perms(3):
            assert direct_sum(a, b).size == 5
            assert skew_sum(a, b).size == 5
    for trip in itertools.product(list(all_perms(2)) + list(all_perms(3)), repeat=3):
        a, b, c = trip
        assert direct_sum(direct_sum(a, b), c) == direct_sum(a, direct_sum(b, c))
        assert skew_sum(skew_sum(a, b), c) == skew_sum(a, skew_sum(b, c))


def test_join_examples():
    assert join(pat("01"), pat("01")) == pat("012")
    assert join(pat("01"), pat("10")) == pat("021")
    trivial = Pattern(1, ())
    for size in range(1, 6):
        for pm in all_perms(size):
            p = perm_to_pattern(pm)
            assert join(p, trivial) == p


def test_converge_examples():
    assert converge(Pattern(1, ()), 0) == pat("01")
    assert converge(Pattern(1, ()), 1) == pat("10")


def test_sum_laws_through_join_and_converge():
    for na in range(1, 5):
        for nb in range(1, 5):
            for a in all_perms(na):
                pa = perm_to_pattern(a)
                for b in all_perms(nb):
                    pb = perm_to_pattern(b)
                    assert perm_to_pattern(direct_sum(a, b)) == join(converge(pa, 0), pb)
                    assert perm_to_pattern(skew_sum(a, b)) == join(converge(pa, 1), pb)


def test_split_reducible_examples():
    assert split_reducible(pat("012")) == (pat("01"), pat("01"))
    assert split_reducible(pat("120")) is None
    assert split_reducible(pat("102")) is None
    # minimal left part: 0123 splits as (01, 012), not (012, 01)
    left, right = split_reducible(pat("0123"))
    assert left == pat("01") and right == pat("012")


def test_split_reducible_round_trip():
    for size in range(2, 6):
        for pm in all_perms(size):
            p = perm_to_pattern(pm)
            got = split_reducible(p)
            if got is not None:
                p0, p1 = got
                assert p0.size >= 2 and p1.size >= 2
                assert join(p0, p1) == p


def test_is_convergent():
    # 120 appends a bottom element to 12: constant last column of color 1
    assert is_convergent(pat("120")) == 1
    assert is_convergent(pat("102")) == 0
    assert is_convergent(pat("012")) == 0
    assert is_convergent(pat("021")) is None
    assert is_convergent(pat("201")) is None
    assert is_convergent(Pattern(1, ())) is None
    for size in range(2, 6):
        for pm in all_perms(size):
            p = perm_to_pattern(pm)
            c = is_convergent(p)
            if c is not None:
                assert converge(p.restrict(range(size - 1)), c) == p


def test_separability_examples():
    assert is_separable(perm("120"))
    for pm in all_perms(3):
        assert is_separable(pm)  # every size-3 permutation is separable
    assert not is_separable(perm("2031"))
    assert not is_separable(perm("1302"))
    w = forbidden_witness(perm("2031"))
    assert w is not None and w[0] == perm("2031") and tuple(w[1]) == (0, 1, 2, 3)


def test_separating_tree_example_and_evaluation():
    tree = separating_tree(perm("2301"))
    assert tree.to_term() == "-(+(0,0),+(0,0))"
    assert tree.leaf_count() == 4
    assert tree.evaluate() == perm("2301")
    assert separating_tree(perm("2031")) is None
    for size in range(1, 7):
        for pm in all_perms(size):
            tree = separating_tree(pm)
            if tree is not None:
                assert tree.evaluate() == pm
                assert tree.leaf_count() == size


def test_dual_route_agreement_and_counts_up_to_6():
    counts = []
    for size in range(1, 7):
        c = 0
        for pm in all_perms(size):
            mine = is_separable(pm)  # asserts internal agreement itself
            assert mine == oracle_separable(pm)
            c += mine
        counts.append(c)
    assert counts == [1, 2, 6, 22, 90, 394]


def test_separable_iff_no_diverging_irreducible_subpattern():
    # checked by exhaustive sub-pattern enumeration, sizes up to 7
    cache = {}

    def div_irr(p: Pattern) -> bool:
        key = (p.size, p.bits)
        if key not in cache:
            cache[key] = is_convergent(p) is None and split_reducible(p) is None
        return cache[key]

    for size in range(1, 8):
        for pm in all_perms(size):
            p = perm_to_pattern(pm)
            found = False
            for m in range(4, size + 1):
                for combo in itertools.combinations(range(size), m):
                    if div_irr(p.restrict(combo)):
                        found = True
                        break
                if found:
                    break
            assert found == (not is_separable(pm)), pm.to_text()


def test_trichotomy():
    assert classify_trichotomy(pat("120")) is Trichotomy.ADS_SIDE
    assert classify_trichotomy(Pattern(3, (0, 1, 0))) is Trichotomy.EM_SIDE
    assert classify_trichotomy(pat("1302")) is Trichotomy.SIDE_1302
    assert classify_trichotomy(pat("2031")) is Trichotomy.SIDE_1302
    # a permutation containing 2031 strictly
    assert classify_trichotomy(pat("24031")) is Trichotomy.SIDE_1302
    for size in range(1, 6):
        for pm in all_perms(size):
            got = classify_trichotomy(perm_to_pattern(pm))
            want = Trichotomy.ADS_SIDE if oracle_separable(pm) else Trichotomy.SIDE_1302
            assert got is want


def test_pattern_to_perm_requires_transitive():
    assert pattern_to_perm(Pattern(3, (1, 0, 1))) is None
    assert is_transitive(pat("31420")) is True
