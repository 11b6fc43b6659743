"""Homogeneous-set extraction from stable and finite colorings.

Four extraction routes share this module: an exhaustive optimum finder
used as a test oracle, the unbalanced tree extractor for colorings with
no small clique of one color, a seeded randomized extractor driven by a
thinning sequence, and an extractor answering to an abstract escaping
oracle.  Block spectra and good/bad block analysis support the latter
two.

Limit facts ("x settles to color c") are answered from StableColoring's
declared data; that is the finite-scale stand-in for the limit oracle all
these procedures consume.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
import random

from .errors import (
    BudgetExhausted,
    ContractViolation,
    DegenerateInstance,
    InternalInvariant,
    PreconditionWitness,
    ResourceLimit,
)
from .fractals import fractal_pattern, navigate, occurrence_blocks
from .patterns import StableColoring, VertexSet, find_realization

BRUTE_FORCE_CAP = 24


def verify_homogeneous(f, vertices, color: int) -> bool:
    """Independent pairwise scan; every extractor re-checks through this."""
    vs = sorted(vertices)
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            if f.color(vs[i], vs[j]) != color:
                return False
    return True


@dataclass
class StemCondition:
    """A stem of chosen vertices plus the reservoir of permitted future
    vertices; every stem-to-reservoir pair has the target color."""

    color: int
    stem: list = field(default_factory=list)
    reservoir: list = field(default_factory=list)

    def extend(self, f, x: int) -> None:
        idx = bisect_left(self.reservoir, x)
        if idx >= len(self.reservoir) or self.reservoir[idx] != x:
            raise ContractViolation(f"{x} is not in the reservoir")
        self.stem.append(x)
        self.reservoir = thin_reservoir(f, self.reservoir, x, self.color)


def thin_reservoir(f, reservoir: list, x: int, color: int) -> list:
    """Keep reservoir elements above x whose pair with x has the color.

    Fast path for stable colorings: beyond x's settling time the pair
    color equals x's limit, so only the window below settle(x) needs
    explicit checks.
    """
    idx = bisect_right(reservoir, x)
    tail = reservoir[idx:]
    if isinstance(f, StableColoring):
        boundary = f.settle[x]
        j = bisect_left(tail, boundary)
        head = [y for y in tail[:j] if f.color(x, y) == color]
        rest = tail[j:] if f.limits[x] == color else []
        return head + rest
    return [y for y in tail if f.color(x, y) == color]


# ---------------------------------------------------------------------------
# Exhaustive optimum (test oracle)


def brute_force_max_homogeneous(f, cap: int = BRUTE_FORCE_CAP):
    """Maximum-cardinality homogeneous set over both colors, exhaustively.

    Branch-and-bound over bitmasks; ties prefer color 0.
    """
    n = f.horizon
    if n > cap:
        raise ResourceLimit(f"horizon {n} exceeds brute-force cap {cap}")
    full = (1 << n) - 1
    results = {}
    for color in (0, 1):
        adj = [0] * n
        for x in range(n):
            for y in range(n):
                if y != x and f.color(x, y) == color:
                    adj[x] |= 1 << y
        best = 0  # bitmask of best clique

        def expand(cur: int, cand: int):
            nonlocal best
            if cur.bit_count() + cand.bit_count() <= best.bit_count():
                return
            if cand == 0:
                if cur.bit_count() > best.bit_count():
                    best = cur
                return
            v = (cand & -cand).bit_length() - 1
            expand(cur | (1 << v), cand & adj[v])
            expand(cur, cand & ~(1 << v))

        expand(0, full)
        results[color] = best
    c0, c1 = results[0].bit_count(), results[1].bit_count()
    color = 0 if c0 >= c1 else 1
    mask = results[color]
    return color, VertexSet(v for v in range(n) if mask >> v & 1)


# ---------------------------------------------------------------------------
# Unbalanced tree extraction


@dataclass
class UnbalancedResult:
    vertices: VertexSet
    level: int
    populations: list
    lower_bound: int


class _TreeNode:
    __slots__ = ("element", "depth", "children")

    def __init__(self, element, depth):
        self.element = element
        self.depth = depth
        self.children = []


def unbalanced_extract(f, k: int, horizon: int) -> UnbalancedResult:
    """Extract a 1-homogeneous set from a coloring with no 0-homogeneous
    set of size k.

    Vertices are inserted into a tree whose root-to-node paths are
    0-homogeneous stems and whose sibling sets are pairwise color 1.  The
    depth then stays below k, so some level holds a large share of the
    horizon; the answer is the largest sibling set at the least level of
    maximal population.  A stem reaching size k exposes the violated
    precondition and is reported with its witness clique.
    """
    if k < 1:
        raise ContractViolation("clique size must be >= 1")
    if horizon > f.horizon or horizon < 1:
        raise ContractViolation("horizon beyond the coloring's generation bound")
    root = _TreeNode(None, 0)
    nodes: list[_TreeNode] = [root]

    for x in range(horizon):
        node = root
        stem = []
        while True:
            nxt = None
            for child in node.children:
                if f.color(child.element, x) == 0:
                    nxt = child
                    break
            if nxt is None:
                break
            node = nxt
            stem.append(node.element)
        if len(stem) + 1 >= k:
            raise PreconditionWitness(
                "coloring admits a 0-homogeneous clique of the forbidden size",
                VertexSet(stem[: k - 1] + [x]),
            )
        leaf = _TreeNode(x, node.depth + 1)
        node.children.append(leaf)
        nodes.append(leaf)

    max_depth = max(n.depth for n in nodes)
    populations = [
        sum(1 for n in nodes if n.depth == lvl) for lvl in range(1, max_depth + 1)
    ]
    top = max(populations)
    level = populations.index(top) + 1  # least level of maximal population
    group: list = []
    for parent in nodes:
        if parent.depth == level - 1 and len(parent.children) > len(group):
            group = [c.element for c in parent.children]
    result = VertexSet(group)
    if not verify_homogeneous(f, result, 1):
        raise InternalInvariant("sibling set failed 1-homogeneity re-verification")
    parents_above = 1 if level == 1 else populations[level - 2]
    bound = max(1, top // max(1, parents_above))
    return UnbalancedResult(result, level, populations, bound)


# ---------------------------------------------------------------------------
# Good/bad block analysis


@dataclass
class BlockVerdict:
    index: int
    good: bool
    witness: VertexSet | None  # a full sub-fractal settling to the wrong color


@dataclass
class GoodBadReport:
    arity: int
    dim: int
    k: int
    color: int
    occurrence: VertexSet
    occurrence_good: bool
    blocks: list
    bound_respected: bool

    @property
    def bad_count(self) -> int:
        return sum(1 for b in self.blocks if not b.good)


def _wrong_limit_elements(f: StableColoring, vertices, color: int) -> list:
    return [x for x in vertices if f.limit(x) == 1 - color]


def _bad_witness(f: StableColoring, vertices, k: int, dim: int, color: int):
    """A k-ary dimension-dim sub-occurrence among the elements settling to
    the wrong color, or None."""
    pool = _wrong_limit_elements(f, vertices, color)
    if len(pool) < k**dim:
        return None
    return find_realization(f, pool, fractal_pattern(k, dim), budget=None)


def analyze_blocks(
    f: StableColoring, occurrence, arity: int, dim: int, k: int, color: int
) -> GoodBadReport:
    """Classify each block of a fractal occurrence as good or bad.

    A block is bad for the color when it contains a full k-ary sub-fractal
    one dimension lower, all of whose elements settle to the opposite
    color.  When the occurrence itself is good, more than k-1 bad blocks
    are impossible (their witnesses would assemble into a bad sub-fractal
    of the occurrence), so that bound is asserted; a bad occurrence gets
    its verdicts reported without the assertion.
    """
    occ = VertexSet(occurrence)
    if dim < 1:
        raise ContractViolation("block analysis needs dimension >= 1")
    from .patterns import realizes as _realizes

    if not _realizes(f, occ, fractal_pattern(arity, dim)):
        raise ContractViolation("occurrence does not realize the declared fractal")
    verdicts = []
    for idx, block in enumerate(occurrence_blocks(occ, arity, dim)):
        witness = _bad_witness(f, block, k, dim - 1, color)
        verdicts.append(BlockVerdict(idx, witness is None, witness))
    occurrence_good = _bad_witness(f, occ, k, dim, color) is None
    bad = sum(1 for v in verdicts if not v.good)
    if occurrence_good and bad > k - 1:
        raise InternalInvariant(
            f"good occurrence with {bad} bad blocks contradicts the k-1 bound"
        )
    return GoodBadReport(
        arity, dim, k, color, occ, occurrence_good, verdicts, bad <= k - 1
    )


# ---------------------------------------------------------------------------
# Block search inside a reservoir


def find_homogeneous_block(f, reservoir, size: int, color: int, budget=None):
    """Lexicographically least size-`size` subset of the reservoir whose
    pairs all have the color, by ascending depth-first search.

    For stable colorings the pair checks collapse: an element whose limit
    disagrees with the color caps every later candidate at its settling
    time, and only candidates inside a settling window need explicit pair
    reads.
    """
    pool = sorted(reservoir)
    n = len(pool)
    if n < size:
        return None
    stable = isinstance(f, StableColoring)
    window = 0
    good_suffix = None
    if stable:
        window = max((f.settle[x] - x for x in pool), default=1)
        # feasibility bound: elements settling to the other color can add
        # at most a window's worth of chain beyond the matching ones
        good_suffix = [0] * (n + 1)
        for i in range(n - 1, -1, -1):
            good_suffix[i] = good_suffix[i + 1] + (f.limits[pool[i]] == color)
        if good_suffix[0] + 1 + window < size:
            return None

    chosen: list[int] = []
    cutoffs: list[int] = []  # min settle among chosen with the wrong limit
    stack_next: list[int] = [0]
    nodes = 0
    INF = 1 << 60

    def candidate_ok(v: int) -> bool:
        if not stable:
            return all(f.color(u, v) == color for u in chosen)
        cutoff = cutoffs[-1] if cutoffs else INF
        if v >= cutoff:
            return False
        for u in reversed(chosen):
            if u <= v - window:
                break
            if f.settle[u] > v and f.color(u, v) != color:
                return False
        return True

    while True:
        if len(chosen) == size:
            return VertexSet(chosen)
        start = stack_next[-1]
        placed = False
        for idx in range(start, n - (size - len(chosen)) + 1):
            v = pool[idx]
            nodes += 1
            if budget is not None and nodes > budget:
                raise BudgetExhausted(nodes)
            if stable and cutoffs and v >= cutoffs[-1]:
                break  # pool ascends, so every later candidate fails too
            if stable and len(chosen) + good_suffix[idx] + 1 + window < size:
                break  # not enough compatible material left in the suffix
            if candidate_ok(v):
                prev = cutoffs[-1] if cutoffs else INF
                cut = prev
                if stable and f.limits[v] != color:
                    cut = min(prev, f.settle[v])
                chosen.append(v)
                cutoffs.append(cut)
                stack_next[-1] = idx + 1
                stack_next.append(idx + 1)
                placed = True
                break
        if not placed:
            if not chosen:
                return None
            chosen.pop()
            cutoffs.pop()
            stack_next.pop()


EXTRACTOR_SEARCH_BUDGET = 2_000_000


def find_fractal_occurrence(f, reservoir, arity: int, dim: int, budget=None):
    """Least occurrence of the arity-ary dimension-dim fractal in the
    reservoir; dimension 1 takes the fast homogeneous-block path."""
    if dim == 1:
        return find_homogeneous_block(f, reservoir, arity, 0, budget)
    return find_realization(f, reservoir, fractal_pattern(arity, dim), budget)


def _extractor_block(f, reservoir, arity: int, dim: int, step: int):
    """Block search inside an extractor loop: a budgeted search whose
    exhaustion, like proven absence, ends the run as a degenerate
    instance (the unbalanced route applies); the cause is named."""
    try:
        block = find_fractal_occurrence(f, reservoir, arity, dim,
                                        EXTRACTOR_SEARCH_BUDGET)
    except BudgetExhausted as exc:
        raise DegenerateInstance(
            f"block search budget exhausted at step {step} "
            f"(arity {arity}, dimension {dim}); treat as degenerate"
        ) from exc
    if block is None:
        raise DegenerateInstance(
            f"no {arity}-ary dimension-{dim} block in the reservoir at step "
            f"{step}; the unbalanced extractor applies instead"
        )
    return block


# ---------------------------------------------------------------------------
# Randomized extraction


@dataclass(frozen=True)
class ExtractionConfig:
    """Seeded extraction parameters.

    thinning is the increasing sequence u_0 < u_1 < ... bounding the
    per-step failure chance at 1/u_s; its reciprocal sum must stay below
    2**-failure_exponent, which is verified at construction.
    """

    thinning: tuple
    seed: int
    steps: int
    horizon: int
    failure_exponent: int = 3
    block_sizes: tuple | None = None

    def __post_init__(self):
        us = self.thinning
        if not us or us[0] < 2:
            raise ContractViolation("thinning sequence must start at >= 2")
        if any(b <= a for a, b in zip(us, us[1:])):
            raise ContractViolation("thinning sequence must be strictly increasing")
        if self.steps > len(us):
            raise ContractViolation("thinning sequence shorter than the step budget")
        total = sum(Fraction(1, u) for u in us)
        if total >= Fraction(1, 2**self.failure_exponent):
            raise ContractViolation(
                f"sum of reciprocals {float(total):.4f} is not below "
                f"2**-{self.failure_exponent}"
            )

    def block_size(self, step: int, k: int, dim: int) -> int:
        if self.block_sizes is not None:
            return self.block_sizes[step]
        # arity sized so a uniformly random descent can go wrong with
        # chance at most 1/u_step: at most k-1 bad blocks per level over
        # dim levels
        return max(k, self.thinning[step] * (k - 1) * dim)


def default_config(seed: int, horizon: int = 10_000, steps: int = 30,
                   failure_exponent: int = 3) -> ExtractionConfig:
    base = steps * 2**failure_exponent * 10 // 9 + 2
    us = tuple(base + 2 * s for s in range(max(steps, 1)))
    return ExtractionConfig(us, seed, steps, horizon, failure_exponent)


@dataclass
class RandomizedOutcome:
    success: bool
    vertices: VertexSet | None
    color: int
    failure_step: int | None
    transcript: list


def extraction_color(block_dim: int) -> int:
    """Stem color for extraction over blocks of the given dimension."""
    return 1 if block_dim % 2 == 0 else 0


def randomized_extract(
    f: StableColoring, k: int, n: int, cfg: ExtractionConfig
) -> RandomizedOutcome:
    """Seeded stem-growing extraction from a coloring avoiding the k-ary
    dimension-n fractal.

    Each step finds the least large-arity block (a fractal occurrence one
    dimension below the avoided one) in the reservoir, draws a uniformly
    random descent path through its decomposition, and extends the stem
    by the singleton reached.  The run fails at the first step whose
    chosen element settles to the wrong color; identical seeds give
    identical transcripts.
    """
    if n < 2:
        raise ContractViolation("avoided fractal dimension must be >= 2")
    d = n - 1
    color = extraction_color(d)
    rng = random.Random(cfg.seed)
    horizon = min(cfg.horizon, f.horizon)
    cond = StemCondition(color, [], list(range(horizon)))
    transcript: list[dict] = []

    for step in range(cfg.steps):
        arity = cfg.block_size(step, k, d)
        block = _extractor_block(f, cond.reservoir, arity, d, step)
        path = tuple(rng.randrange(arity) for _ in range(d))
        offset, length = navigate(arity, d, path)
        assert length == 1
        x = block[offset]
        entry = {
            "step": step,
            "arity": arity,
            "block_min": block[0],
            "block_max": block[-1],
            "path": list(path),
            "chosen": x,
        }
        if f.limit(x) == 1 - color:
            entry["verdict"] = "bad"
            transcript.append(entry)
            return RandomizedOutcome(False, None, color, step, transcript)
        entry["verdict"] = "good"
        transcript.append(entry)
        cond.extend(f, x)

    result = VertexSet(cond.stem)
    if not verify_homogeneous(f, result, color):
        raise InternalInvariant("randomized stem failed homogeneity re-verification")
    return RandomizedOutcome(True, result, color, None, transcript)


# ---------------------------------------------------------------------------
# Spectrum and trace


@dataclass
class BlockSpectrum:
    arity: int
    dim: int
    k: int
    color: int
    spectrum: frozenset
    traces: dict

    @property
    def rightmost(self) -> tuple:
        return max(self.spectrum)


def _block_is_bad(f, block, k, dim, color) -> bool:
    return _bad_witness(f, block, k, dim, color) is not None


def compute_spectrum_trace(
    f: StableColoring, occurrence, arity: int, dim: int, k: int, color: int,
    reservoir=None,
) -> BlockSpectrum:
    """Inductive record of bad-block skips down a fractal occurrence.

    At each level a string entry counts how many of the first bad blocks
    were skipped (at most k-1); the descent continues into the least block
    outside that skip list.  A skip count of zero is always defined, even
    with no bad blocks, so an all-good occurrence has exactly the all-zero
    string.  Each trace lists the blocks witnessing its string; the trace
    of a full-length string ends in a singleton.
    """
    occ = VertexSet(occurrence)

    def recurse(vertices: VertexSet, d: int) -> dict:
        if d == 0:
            return {(): []}
        blocks = occurrence_blocks(vertices, arity, d)
        bads = [
            i for i, blk in enumerate(blocks) if _block_is_bad(f, blk, k, d - 1, color)
        ]
        out = {}
        for ell in range(0, min(len(bads), k - 1) + 1):
            skipped = set(bads[:ell])
            target = next(i for i in range(arity) if i not in skipped)
            for tau, trace in recurse(blocks[target], d - 1).items():
                out[(ell,) + tau] = [blocks[target]] + trace
        return out

    traces = recurse(occ, dim)
    return BlockSpectrum(arity, dim, k, color, frozenset(traces), traces)


# ---------------------------------------------------------------------------
# Oracle-driven extraction


class ReferenceEscapingOracle:
    """Answers every query from full knowledge: the least index outside
    the enumerated set, within the stated arity."""

    name = "reference"

    def pick(self, arity: int, enumerated, bound: int) -> int:
        banned = set(enumerated)
        for i in range(arity):
            if i not in banned:
                return i
        raise ContractViolation("enumerated set covers the whole arity")


class AdversarialEscapingOracle:
    """Stress oracle: deliberately answers an enumerated (bad) index
    whenever one exists."""

    name = "adversarial"

    def pick(self, arity: int, enumerated, bound: int) -> int:
        banned = sorted(set(enumerated))
        for i in banned:
            if 0 <= i < arity:
                return i
        for i in range(arity):
            if i not in banned:
                return i
        raise ContractViolation("empty arity")


@dataclass
class OracleOutcome:
    success: bool
    vertices: VertexSet | None
    color: int
    transcript: list
    failure: dict | None


def oracle_extract(
    f: StableColoring,
    k: int,
    n: int,
    oracle,
    horizon: int,
    steps: int = 32,
    arity_schedule=None,
) -> OracleOutcome:
    """Stem-growing extraction where block choices along each descent are
    answered by an escaping oracle.

    At every level the indices of bad blocks (at most k-1 of them under a
    good parent) are enumerated and handed to the oracle, which is asked
    for an index outside them.  A dead stem, reachable only when the
    oracle breaks its contract, is reported as a failure carrying the
    offending query transcript.
    """
    if n < 2:
        raise ContractViolation("avoided fractal dimension must be >= 2")
    d = n - 1
    color = extraction_color(d)
    horizon = min(horizon, f.horizon)
    cond = StemCondition(color, [], list(range(horizon)))
    transcript: list[dict] = []

    for step in range(steps):
        arity = arity_schedule[step] if arity_schedule else (k + 1 + step)
        occ = _extractor_block(f, cond.reservoir, arity, d, step)
        node = occ
        queries = []
        for level in range(d):
            blocks = occurrence_blocks(node, arity, d - level)
            bad = [
                i
                for i, blk in enumerate(blocks)
                if _block_is_bad(f, blk, k, d - level - 1, color)
            ]
            answer = oracle.pick(arity, bad, k - 1)
            queries.append(
                {"level": level, "arity": arity, "bad": bad, "answer": answer}
            )
            if not 0 <= answer < arity:
                failure = {"step": step, "queries": queries, "reason": "range"}
                transcript.append({"step": step, "queries": queries})
                return OracleOutcome(False, None, color, transcript, failure)
            node = blocks[answer]
        x = node[0]
        entry = {"step": step, "queries": queries, "chosen": x}
        transcript.append(entry)
        if f.limit(x) == 1 - color:
            failure = {
                "step": step,
                "queries": queries,
                "chosen": x,
                "reason": "dead stem: chosen element settles to the wrong color",
            }
            return OracleOutcome(False, None, color, transcript, failure)
        cond.extend(f, x)

    result = VertexSet(cond.stem)
    if not verify_homogeneous(f, result, color):
        raise InternalInvariant("oracle stem failed homogeneity re-verification")
    return OracleOutcome(True, result, color, transcript, None)
