"""Iterated largeness of finite sets, grouping searches, and the
grouping-to-homogeneous extractions.

A largeness notion is a superset-closed family of finite sets met by
every sufficiently long stretch of naturals.  The iterated notion used
here: every nonempty set is large at level 0, and a set is large at level
n+1 when, past its minimum, it contains min-many successive disjoint
level-n-large subsets.  By the literal reading, a set containing 0 is
large at every positive level (zero subsets are demanded).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractViolation, InternalInvariant
from .patterns import Pattern, StableColoring, VertexSet, find_realization


# ---------------------------------------------------------------------------
# Iterated largeness


@dataclass
class LargeWitness:
    elements: tuple
    level: int
    blocks: list  # LargeWitness children, one per carved subset


def _carve_prefix(xs: list, level: int) -> tuple | None:
    """Length of the shortest large prefix of xs at the level, with its
    witness; None if no prefix qualifies."""
    if level == 0:
        if not xs:
            return None
        return 1, LargeWitness((xs[0],), 0, [])
    if not xs:
        return None
    need = xs[0]
    blocks = []
    pos = 1
    while len(blocks) < need:
        sub = _carve_prefix(xs[pos:], level - 1)
        if sub is None:
            return None
        width, w = sub
        blocks.append(w)
        pos += width
    return pos, LargeWitness(tuple(xs[:pos]), level, blocks)


def minimal_large_size(m: int, n: int, _memo={}) -> int:
    """Cardinality of the smallest level-n-large set whose minimum is m
    (achieved by consecutive integers); a feasibility bound for searches."""
    if n == 0:
        return 1
    key = (m, n)
    if key not in _memo:
        pos = m + 1
        for _ in range(m):
            pos += minimal_large_size(pos, n - 1)
        _memo[key] = pos - m
    return _memo[key]


def omega_n_decompose(elements, n: int) -> LargeWitness | None:
    """Witness tree for level-n largeness by greedy shortest-prefix
    carving, or None.  Greedy is exact here: the notion is closed under
    superset, so an early finish never hurts a later block."""
    if n < 0:
        raise ContractViolation("level must be >= 0")
    xs = sorted(set(elements))
    if any(x < 0 for x in xs):
        raise ContractViolation("elements must be naturals")
    if not xs:
        return None
    if n == 0:
        return LargeWitness(tuple(xs), 0, [])
    need = xs[0]
    blocks = []
    pos = 1
    while len(blocks) < need:
        sub = _carve_prefix(xs[pos:], n - 1)
        if sub is None:
            return None
        width, w = sub
        blocks.append(w)
        pos += width
    return LargeWitness(tuple(xs), n, blocks)


def is_omega_n_large(elements, n: int) -> bool:
    return omega_n_decompose(elements, n) is not None


def check_witness(w: LargeWitness) -> bool:
    """A witness tree really decomposes its elements: blocks sit past the
    minimum, in increasing disjoint order, min-many of them."""
    xs = list(w.elements)
    if w.level == 0:
        return bool(xs)
    if not xs:
        return False
    if len(w.blocks) != xs[0]:
        return False
    prev_max = xs[0]
    pool = set(xs)
    for blk in w.blocks:
        if not blk.elements or min(blk.elements) <= prev_max:
            return False
        if not set(blk.elements) <= pool:
            return False
        if not check_witness(blk):
            return False
        prev_max = max(blk.elements)
    return True


# ---------------------------------------------------------------------------
# Largeness notions


@dataclass(frozen=True)
class LargenessPredicate:
    """kind "omega": level-n largeness; "pattern": membership is carrying
    a realization of the pattern under the coloring; "custom": a callback."""

    kind: str
    level: int = 0
    pattern: Pattern | None = None
    coloring: object = None
    fn: object = None

    def holds(self, elements) -> bool:
        xs = sorted(set(elements))
        if self.kind == "omega":
            return is_omega_n_large(xs, self.level)
        if self.kind == "pattern":
            if len(xs) < self.pattern.size:
                return False
            return find_realization(self.coloring, xs, self.pattern, budget=None) is not None
        if self.kind == "custom":
            return bool(self.fn(xs))
        raise ContractViolation(f"unknown largeness kind {self.kind}")

    def describe(self) -> str:
        if self.kind == "omega":
            return f"omega^{self.level}"
        if self.kind == "pattern":
            return f"pattern[{''.join(map(str, self.pattern.bits))}]"
        return "custom"


def omega_largeness(n: int) -> LargenessPredicate:
    return LargenessPredicate("omega", level=n)


def pattern_largeness(p: Pattern, coloring) -> LargenessPredicate:
    return LargenessPredicate("pattern", pattern=p, coloring=coloring)


# ---------------------------------------------------------------------------
# Groupings


@dataclass
class Grouping:
    blocks: list  # VertexSets, increasing
    notion: LargenessPredicate
    coloring: object
    complete: bool
    obstruction: dict | None = None

    def check(self) -> bool:
        """Inter-block color constancy plus largeness of every block."""
        for blk in self.blocks:
            if not self.notion.holds(blk):
                return False
        for i in range(len(self.blocks)):
            for j in range(i + 1, len(self.blocks)):
                colors = {
                    self.coloring.color(x, y)
                    for x in self.blocks[i]
                    for y in self.blocks[j]
                }
                if len(colors) != 1:
                    return False
        return True


def _minimal_large_prefix(notion: LargenessPredicate, pool: list) -> list | None:
    """Shortest large prefix of the pool, grown one element at a time.

    The pool need not ascend (order-sorted reservoirs); largeness always
    judges the prefix as a set of naturals.
    """
    ascending = all(a < b for a, b in zip(pool, pool[1:]))
    if notion.kind == "omega" and ascending:
        carved = _carve_prefix(pool, notion.level)
        return pool[: carved[0]] if carved else None
    for t in range(1, len(pool) + 1):
        if notion.holds(pool[:t]):
            return pool[:t]
    return None


def find_grouping(f, notion: LargenessPredicate, count: int, horizon: int) -> Grouping:
    """Greedy grouping search: carve a minimal large block from the
    reservoir, then keep only later elements with one uniform color
    toward it (majority class, ties to 0), and repeat.

    Uniformity toward every earlier block makes inter-block constancy
    automatic; the grouping is still re-verified before returning.  A
    reservoir with no large subset at all ends the search with an
    obstruction report instead of a loop.
    """
    reservoir = list(range(min(horizon, f.horizon)))
    blocks: list = []
    dropped = 0
    while len(blocks) < count:
        block = _minimal_large_prefix(notion, reservoir)
        if block is None:
            if notion.holds(reservoir):
                raise InternalInvariant("reservoir large but no prefix qualified")
            reason = (
                "reservoir emptied by majority thinning"
                if not reservoir and dropped
                else "no large subset in the reservoir"
            )
            grouping = Grouping(blocks, notion, f, False,
                                {"reason": reason,
                                 "reservoir_size": len(reservoir),
                                 "dropped_mixed": dropped})
            if not grouping.check():
                raise InternalInvariant("partial grouping failed verification")
            return grouping
        blocks.append(VertexSet(block))
        rest = [y for y in reservoir if y > block[-1]]
        by_class: dict = {0: [], 1: []}
        for y in rest:
            colors = {f.color(x, y) for x in block}
            if len(colors) == 1:
                by_class[colors.pop()].append(y)
        keep = max((by_class[0], by_class[1]), key=lambda c: (len(c), c == by_class[0]))
        dropped += len(rest) - len(keep)
        reservoir = keep
    grouping = Grouping(blocks, notion, f, True)
    if not grouping.check():
        raise InternalInvariant("grouping failed verification")
    return grouping


def increasing_large_sequence(order, notion: LargenessPredicate, k: int,
                              horizon: int) -> list:
    """k blocks, each large, each strictly above the previous one in the
    order: carve minimal large prefixes of the order-sorted reservoir.

    Returns fewer blocks when the tail runs out; callers read the length
    as the reached depth.
    """
    import functools

    less = order.less
    pool = sorted(
        range(min(horizon, order.horizon)),
        key=functools.cmp_to_key(lambda a, b: -1 if less(a, b) else (1 if less(b, a) else 0)),
    )
    out: list = []
    pos = 0
    while len(out) < k and pos < len(pool):
        block = _minimal_large_prefix(notion, pool[pos:])
        if block is None:
            break
        out.append(VertexSet(block))
        pos += len(block)
    for a, b in zip(out, out[1:]):
        amax = max(a, key=lambda v: sum(1 for u in a if less(u, v)))
        bmin = min(b, key=lambda v: sum(1 for u in b if less(u, v)))
        if not less(amax, bmin):
            raise InternalInvariant("blocks are not order-increasing")
    return out


# ---------------------------------------------------------------------------
# Groupings to homogeneous sets


@dataclass
class MinimaOutcome:
    kind: str  # "homogeneous" | "violation"
    vertices: VertexSet | None
    color: int | None
    certificate: VertexSet | None


def grouping_to_homogeneous(f, avoided: Pattern, grouping: Grouping) -> MinimaOutcome:
    """Block minima of a grouping for the realization notion of the
    avoided pattern's front part.

    The avoided pattern must append one constantly colored position to its
    front part; cross colors between blocks then cannot take that color
    without completing a realization, so the minima come out homogeneous
    in the other color.  If they do not, the discovered realization is
    returned as the precondition-violation certificate.
    """
    from .perms import is_convergent

    c = is_convergent(avoided)
    if c is None:
        raise ContractViolation("avoided pattern must end in a constant column")
    front = avoided.restrict(range(avoided.size - 1))
    for blk in grouping.blocks:
        if find_realization(f, blk, front, budget=None) is None:
            raise ContractViolation(f"block {blk} carries no front realization")
    minima = [blk[0] for blk in grouping.blocks]
    for i in range(len(minima)):
        for j in range(i + 1, len(minima)):
            if f.color(minima[i], minima[j]) == c:
                inner = find_realization(f, grouping.blocks[i], front, budget=None)
                certificate = VertexSet(list(inner) + [minima[j]])
                from .patterns import realizes as _rz

                if not _rz(f, certificate, avoided):
                    raise InternalInvariant("violation certificate failed re-check")
                return MinimaOutcome("violation", None, None, certificate)
    return MinimaOutcome("homogeneous", VertexSet(minima), 1 - c, None)


@dataclass
class EmOutcome:
    kind: str  # "grouping" | "homogeneous-minima"
    color: int
    blocks: list
    vertices: VertexSet | None


def check_two_step_transfer(f, a: int, b: int, c: int, d: int, i: int) -> bool:
    """The transfer fact behind the grouping construction: with a,b joined
    by color i, both pointing at c with the opposite color, and the
    ambient coloring transitive and free of the two forbidden size-4
    permutations, any later d sees a and b with one color.

    Returns whether the conclusion f(a,d) = f(b,d) holds; callers feed
    triples satisfying the hypothesis.
    """
    if not (a < b < c < d):
        raise ContractViolation("need a < b < c < d")
    if f.color(a, b) != i or f.color(a, c) != 1 - i or f.color(b, c) != 1 - i:
        raise ContractViolation("hypothesis colors do not match")
    return f.color(a, d) == f.color(b, d)


def em_grouping_extract(f: StableColoring, n: int, horizon: int,
                        count: int = 4, probe: int | None = None) -> EmOutcome:
    """Extract a level-n grouping from a transitive coloring avoiding the
    two forbidden size-4 permutations.

    The loop gathers a level-n-large block homogeneous in the working
    color, a later witness seeing the block minimum in the opposite color,
    then thins the reservoir to the elements the minimum settles against;
    the transfer fact makes cross colors constant block to block.  When no
    witness exists for any candidate block, the block minima themselves
    accumulate into a homogeneous set, returned labeled as such.
    """
    horizon = min(horizon, f.horizon)

    def attempt(color: int) -> EmOutcome | None:
        reservoir = list(range(horizon))
        blocks: list = []
        minima: list = []
        while len(blocks) < count:
            block = _homog_large_block(f, reservoir, color, n)
            if block is None:
                return None if not blocks else EmOutcome("grouping", color, blocks, None)
            m = block[0]
            witness = None
            for y in reservoir:
                if y > block[-1] and f.color(m, y) == 1 - color:
                    witness = y
                    break
            if witness is None:
                if blocks:
                    # later stall: the grouping gathered so far stands
                    return EmOutcome("grouping", color, blocks, None)
                # no opposite sighting at all: minima branch
                minima.append(m)
                reservoir = [y for y in reservoir if y > block[-1]
                             and f.color(m, y) == color]
                for blk2 in _minima_chain(f, reservoir, color, n, minima):
                    minima.append(blk2)
                return EmOutcome("homogeneous-minima", color, [],
                                 VertexSet(minima))
            blocks.append(VertexSet(block))
            keep = f.limit(m)
            reservoir = [y for y in reservoir if y > witness
                         and f.color(m, y) == keep]
        return EmOutcome("grouping", color, blocks, None)

    first = attempt(0 if probe is None else probe)
    if first is not None and (first.kind == "homogeneous-minima" or len(first.blocks) >= 2):
        _verify_em(f, first)
        return first
    second = attempt(1 if probe is None else 1 - probe)
    chosen = second if second is not None else first
    if chosen is None:
        raise ContractViolation("no homogeneous large block for either color")
    _verify_em(f, chosen)
    return chosen


def _homog_large_block(f, reservoir: list, color: int, n: int,
                       budget: int = 200_000) -> list | None:
    """Least level-n-large homogeneous subset of the reservoir, by
    ascending depth-first search with backtracking.

    Backtracking matters: a greedy chain can pick up an element that
    pairs correctly but blocks every continuation; the search pops it and
    moves on.
    """
    pool = reservoir
    chain: list = []
    nexts: list = [0]
    nodes = 0
    while True:
        if chain:
            carved = _carve_prefix(chain, n)
            if carved is not None:
                return chain[: carved[0]]
        idx = nexts[-1]
        placed = False
        for i in range(idx, len(pool)):
            y = pool[i]
            if not chain and minimal_large_size(y, n) > len(pool) - i:
                # pool ascends, so every later start needs even more room
                return None
            nodes += 1
            if nodes > budget:
                from .errors import BudgetExhausted

                raise BudgetExhausted(nodes, "block search budget exhausted")
            if chain and len(chain) + (len(pool) - i) < minimal_large_size(chain[0], n):
                break  # cannot reach the required size from this branch
            if all(f.color(x, y) == color for x in chain):
                chain.append(y)
                nexts[-1] = i + 1
                nexts.append(i + 1)
                placed = True
                break
        if not placed:
            if not chain:
                return None
            chain.pop()
            nexts.pop()


def _minima_chain(f, reservoir: list, color: int, n: int, minima: list):
    out = []
    res = reservoir
    while True:
        block = _homog_large_block(f, res, color, n)
        if block is None:
            return out
        m = block[0]
        if any(f.color(prev, m) != color for prev in minima + out):
            return out
        out.append(m)
        res = [y for y in res if y > block[-1] and f.color(m, y) == color]


def _verify_em(f, outcome: EmOutcome) -> None:
    if outcome.kind == "homogeneous-minima":
        vs = outcome.vertices
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                if f.color(vs[i], vs[j]) != outcome.color:
                    raise InternalInvariant("labeled minima set is not homogeneous")
        return
    for i, a in enumerate(outcome.blocks):
        for b in outcome.blocks[i + 1 :]:
            colors = {f.color(x, y) for x in a for y in b}
            if len(colors) != 1:
                raise InternalInvariant("grouping blocks lost cross-color constancy")
