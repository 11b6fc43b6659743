import itertools

import pytest

from rpl.patterns import Pattern
from rpl.perms import Permutation, perm_coloring, perm_to_pattern


def perm(text: str) -> Permutation:
    return Permutation.from_text(text)


def pat(text: str) -> Pattern:
    return perm_to_pattern(Permutation.from_text(text))


def all_perms(size: int):
    for vals in itertools.permutations(range(size)):
        yield Permutation(vals)


def exhaustive_find(f, pool, p: Pattern):
    """Independent realization search: plain subset enumeration, no
    pruning, no shared code with the engine under test."""
    pool = sorted(pool)
    for combo in itertools.combinations(pool, p.size):
        good = True
        for a in range(p.size):
            for b in range(a + 1, p.size):
                if f.color(combo[a], combo[b]) != p.color(a, b):
                    good = False
                    break
            if not good:
                break
        if good:
            return combo
    return None


def order_type(values) -> tuple:
    """Pattern of a value sequence: each value replaced by its rank."""
    ranked = sorted(range(len(values)), key=lambda i: values[i])
    out = [0] * len(values)
    for r, i in enumerate(ranked):
        out[i] = r
    return tuple(out)


def contains_order_type(values, target) -> bool:
    """Quadruple-free containment check by direct enumeration; the
    independent separability oracle builds on this."""
    k = len(target)
    for combo in itertools.combinations(range(len(values)), k):
        if order_type([values[i] for i in combo]) == tuple(target):
            return True
    return False


def oracle_separable(p: Permutation) -> bool:
    """Independent separability oracle: containment of the two forbidden
    order types checked by direct enumeration on the value sequence."""
    v = list(p.values)
    return not (
        contains_order_type(v, (1, 3, 0, 2)) or contains_order_type(v, (2, 0, 3, 1))
    )


@pytest.fixture
def clique_2031():
    return perm_coloring(Permutation.from_text("2031"))
