"""Seeded instance factories shared by the CLI and the test suite.

Every family is deterministic in its parameters and seed.
"""

from __future__ import annotations

import random

from .errors import ContractViolation
from .patterns import FiniteColoring, StableColoring
from .perms import Permutation, perm_coloring


def constant_coloring(n: int, color: int) -> FiniteColoring:
    return FiniteColoring.constant(n, color)


def perm_clique(perm: Permutation) -> FiniteColoring:
    return perm_coloring(perm)


def split_order_coloring(n: int, top: set) -> StableColoring:
    """The order with the non-top elements ascending below a descending
    block of top elements, read as a coloring: every column is constant,
    every element settles immediately, and the limit of x records whether
    x sits in the top block.

    Rows are constant, so any pattern with a non-constant row (2301 and
    1302 among them) is avoided outright.
    """
    limits = [1 if x in top else 0 for x in range(n)]
    settle = [x + 1 for x in range(n)]
    return StableColoring(n, limits, settle, ())


def interleaved_split_order(n: int, seed: int, top_fraction: float = 0.34) -> StableColoring:
    """Seeded random interleaving of the two parts of a split order."""
    rng = random.Random(seed)
    top = {x for x in range(n) if rng.random() < top_fraction}
    return split_order_coloring(n, top)


def blocked_split_order(n: int, seed: int, block: int = 25) -> StableColoring:
    """Split order whose top part arrives in contiguous runs, stressing
    block searches with long gaps."""
    rng = random.Random(seed)
    top: set = set()
    x = 0
    while x < n:
        run = rng.randint(1, block)
        if rng.random() < 0.35:
            top.update(range(x, min(n, x + run)))
        x += run
    return split_order_coloring(n, top)


def avoiding_family(count: int, n: int, master_seed: int) -> list[StableColoring]:
    """The fixture family for the randomized and oracle extractors:
    stable colorings avoiding the binary dimension-2 fractal (2301)."""
    out = []
    for i in range(count):
        seed = master_seed * 1_000 + i
        if i % 3 == 2:
            out.append(blocked_split_order(n, seed))
        else:
            frac = 0.25 + 0.2 * ((i * 7) % 5) / 5.0
            out.append(interleaved_split_order(n, seed, frac))
    return out


def alternating_stable(n: int, settle_slope: int = 2) -> StableColoring:
    """Alternating limits with linearly growing settle times; before the
    settling time every pair reads the opposite of the limit."""
    limits = [x % 2 for x in range(n)]
    settle = [min(n, settle_slope * x + 2) for x in range(n)]
    overrides = []
    for x in range(n):
        for y in range(x + 1, settle[x]):
            if y < n:
                overrides.append((x, y, 1 - limits[x]))
    return StableColoring(n, limits, settle, overrides)


def grouped_unbalanced(n: int, k: int, seed: int) -> FiniteColoring:
    """No 0-homogeneous k-set: color 0 joins distinct groups out of k-1,
    so 0-cliques are transversals of size at most k-1."""
    if k < 2:
        raise ContractViolation("need k >= 2")
    rng = random.Random(seed)
    group = [rng.randrange(k - 1) for _ in range(n)]
    return FiniteColoring.from_function(
        n, lambda x, y: 0 if group[x] != group[y] else 1
    )


def repaired_random_unbalanced(n: int, k: int, seed: int, p_zero: float = 0.06) -> FiniteColoring:
    """Random sparse-0 coloring with every 0-homogeneous k-set destroyed
    by flipping one of its pairs to 1."""
    rng = random.Random(seed)
    bits = {}
    for x in range(n):
        for y in range(x + 1, n):
            bits[(x, y)] = 0 if rng.random() < p_zero else 1

    def col(x, y):
        return bits[(x, y)] if x < y else bits[(y, x)]

    from itertools import combinations

    changed = True
    while changed:
        changed = False
        for clique in combinations(range(n), k):
            if all(col(a, b) == 0 for a, b in combinations(clique, 2)):
                bits[(clique[0], clique[1])] = 1
                changed = True
    return FiniteColoring.from_function(n, col)


def single_zero_edge(n: int) -> FiniteColoring:
    """All 1 except the pair (0, 1)."""
    return FiniteColoring.from_function(
        n, lambda x, y: 0 if (x, y) == (0, 1) else 1
    )


def order_from_ranks(ranks: list) -> StableColoring:
    """Read a rank permutation as a coloring: the upward pair (x, y) gets
    color 0 exactly when x ranks below y.  Limits and settling times are
    recovered by scanning each row from the right."""
    n = len(ranks)
    if sorted(ranks) != list(range(n)):
        raise ContractViolation("ranks must be a permutation of 0..n-1")
    bits = {}
    for x in range(n):
        for y in range(x + 1, n):
            bits[(x, y)] = 0 if ranks[x] < ranks[y] else 1
    limits = []
    settle = []
    for x in range(n):
        if x == n - 1:
            limits.append(0)
            settle.append(n)
            continue
        lim = bits[(x, n - 1)]
        s = x + 1
        for y in range(n - 1, x, -1):
            if bits[(x, y)] != lim:
                s = y + 1
                break
        limits.append(lim)
        settle.append(max(s, x + 1))
    overrides = []
    for x in range(n):
        for y in range(x + 1, min(settle[x], n)):
            if bits[(x, y)] != limits[x]:
                overrides.append((x, y, bits[(x, y)]))
    return StableColoring(n, limits, settle, overrides)


def dipped_split_order(n: int, dips=(12, 36, 108, 324),
                       top_run: int = 3) -> StableColoring:
    """Split order whose ascending part contains rare rank dips: each dip
    position carries a rank reserved much earlier in the walk, so a long
    stretch of its predecessors settles against it with color 1.  A short
    descending top run follows every dip.

    Dips are isolated and their reserved ranks live in pairwise disjoint
    zones; the tests check exhaustively that the order avoids the two
    forbidden size-4 permutations.
    """
    dips = [q for q in dips if q < n]
    top_positions = set()
    for q in dips:
        for j in range(1, top_run + 1):
            if q + j < n:
                top_positions.add(q + j)
    a_positions = [p for p in range(n) if p not in top_positions]
    # each dip's rank is reserved just past the previous dip, so the
    # position stretches affected by different dips never interleave
    hold_pos = {q: (0 if i == 0 else dips[i - 1] + 1) for i, q in enumerate(dips)}
    reserved: dict = {}
    ranks = [None] * n
    counter = 0
    for p in a_positions:
        for q in dips:
            if q not in reserved and hold_pos[q] <= p < q:
                reserved[q] = counter
                counter += 1
        if p in hold_pos:  # a dip position
            if p not in reserved:
                reserved[p] = counter
                counter += 1
            ranks[p] = reserved[p]
        else:
            ranks[p] = counter
            counter += 1
    for j, p in enumerate(sorted(top_positions)):
        ranks[p] = n - 1 - j
    return order_from_ranks(ranks)
