"""Finite-horizon simulators of staged order constructions.

Every construction here plays against adversary scripts: finite,
explicit, prefix-monotone enumeration streams.  Quantities measured over
oracle prefixes are exact rational sums over the finite prefix space the
scripts declare.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ContractViolation, InstanceLoadError, InternalInvariant
from .patterns import FiniteColoring, Pattern, StableColoring, VertexSet
from .perms import Permutation, SeparatingTree, separating_tree


# ---------------------------------------------------------------------------
# Adversary scripts


@dataclass(frozen=True)
class ScriptEvent:
    prefix: str
    stage: int
    elements: frozenset


class AdversaryScript:
    """A finite, prefix-monotone stand-in for a relativized enumeration
    operator.

    An event (prefix, stage, elements) contributes its elements to the
    enumeration of every oracle extending the prefix, at every stage from
    its own on; monotonicity in both stage and prefix therefore holds by
    construction.
    """

    def __init__(self, ident, events):
        self.ident = ident
        evs = []
        for prefix, stage, elements in events:
            if any(ch not in "01" for ch in prefix):
                raise ContractViolation(f"prefix {prefix!r} is not a bit string")
            if stage < 0:
                raise ContractViolation("stages are naturals")
            elems = frozenset(int(x) for x in elements)
            if any(x < 0 for x in elems):
                raise ContractViolation("enumerated elements are naturals")
            evs.append(ScriptEvent(prefix, int(stage), elems))
        self.events = tuple(sorted(evs, key=lambda e: (e.stage, e.prefix)))

    def enumerated(self, prefix: str, stage: int) -> set:
        """W^prefix[stage]: everything contributed by events at compatible
        prefixes up to the stage."""
        out: set = set()
        for ev in self.events:
            if ev.stage <= stage and prefix.startswith(ev.prefix):
                out |= ev.elements
        return out

    def hitting_measure(self, stage: int, lo: int, hi: int) -> Fraction:
        """Exact measure of oracles whose enumeration by `stage` meets
        [lo, hi], as a union of cylinders over event prefixes of length
        at most `stage`."""
        if lo > hi:
            return Fraction(0)
        prefixes = {
            ev.prefix
            for ev in self.events
            if ev.stage <= stage
            and len(ev.prefix) <= stage
            and any(lo <= x <= hi for x in ev.elements)
        }
        minimal = [
            p
            for p in prefixes
            if not any(q != p and p.startswith(q) for q in prefixes)
        ]
        return sum((Fraction(1, 2 ** len(p)) for p in minimal), Fraction(0))


EMPTY_SCRIPT = AdversaryScript("empty", ())


def parse_script_file(text: str, path: str = "<script>") -> dict:
    """Script file format, one event per line:

        e <id> prefix <bits|-> stage <s> emit <n1,n2,...>

    Returns a mapping id -> AdversaryScript.  Malformed lines report
    their line number.
    """
    events: dict = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if len(tok) != 8 or tok[0] != "e" or tok[2] != "prefix" or tok[4] != "stage" or tok[6] != "emit":
            raise InstanceLoadError(path, no, "expected: e <id> prefix <bits|-> stage <s> emit <csv>")
        ident = tok[1]
        prefix = "" if tok[3] == "-" else tok[3]
        if any(ch not in "01" for ch in prefix):
            raise InstanceLoadError(path, no, f"bad prefix {tok[3]!r}")
        try:
            stage = int(tok[5])
            elems = [int(t) for t in tok[7].split(",") if t]
        except ValueError:
            raise InstanceLoadError(path, no, "stage and emitted elements must be integers")
        if stage < 0 or any(x < 0 for x in elems) or not elems:
            raise InstanceLoadError(path, no, "stage and elements must be naturals, emit non-empty")
        events.setdefault(ident, []).append((prefix, stage, elems))
    return {ident: AdversaryScript(ident, evs) for ident, evs in events.items()}


# ---------------------------------------------------------------------------
# Finite-injury priority construction


@dataclass
class RequirementState:
    pattern: Pattern
    script: AdversaryScript
    marker: int
    intervals: list = field(default_factory=list)  # list of (lo, hi) inclusive

    @property
    def length(self) -> int:
        return len(self.intervals)


@dataclass
class RequirementVerdict:
    index: int
    kind: str  # "realized" | "measure-bounded" | "starved"
    state_length: int
    final_measure: Fraction
    threshold: Fraction


@dataclass
class PriorityResult:
    horizon: int
    coloring: StableColoring
    table: FiniteColoring
    requirements: list
    verdicts: list
    log: list

    def order_view(self):
        from .patterns import LinearOrderView

        return LinearOrderView(self.table)


def _attention_measure(req: RequirementState, stage: int) -> Fraction:
    return req.script.hitting_measure(stage, req.marker, stage)


def priority_build(requirements, horizon: int) -> PriorityResult:
    """Stagewise construction of a stable transitive coloring against
    scripted enumeration adversaries.

    Every element holds a limit commitment, initially 0; the pair (x, s)
    is colored with x's commitment as of stage s, before any stage-s
    bookkeeping runs, so stacked interval states keep their realization
    property on the boundary element.  A requirement acts when the exact
    measure of script prefixes enumerating something at or beyond its
    marker passes 1 - 1/(2|p|); acting stacks the interval from its marker
    to the stage, commits limits along its pattern, moves markers, and
    resets every lower-priority state.
    """
    reqs = [
        RequirementState(p, script, marker=i)
        for i, (p, script) in enumerate(requirements)
    ]
    commit = [0] * horizon
    last_change = [0] * horizon
    table_bits: dict = {}
    log: list = []

    for s in range(horizon):
        for x in range(s):
            table_bits[(x, s)] = commit[x]

        acting = None
        for r, req in enumerate(reqs):
            if req.length >= req.pattern.size:
                continue
            threshold = 1 - Fraction(1, 2 * req.pattern.size)
            if _attention_measure(req, s) > threshold:
                acting = r
                break
        if acting is None:
            continue
        req = reqs[acting]
        p = req.pattern
        t = req.length
        lo, hi = req.marker, s
        req.intervals.append((lo, hi))
        for i, (a, b) in enumerate(req.intervals):
            c = p.color(i, t + 1) if t < p.size - 1 else 0
            for x in range(a, min(b, horizon - 1) + 1):
                if commit[x] != c:
                    commit[x] = c
                    last_change[x] = s
        req.marker = s + 1
        injured = []
        for j in range(acting + 1, len(reqs)):
            reqs[j].marker = s + 1 + (j - acting)
            if reqs[j].intervals:
                injured.append(j)
            reqs[j].intervals = []
        log.append(
            {
                "stage": s,
                "acted": acting,
                "interval": [lo, hi],
                "state_length": req.length,
                "injured": injured,
                "markers": [q.marker for q in reqs],
                "states": [list(q.intervals) for q in reqs],
                "measure": str(_attention_measure(req, s)),
            }
        )

    table = FiniteColoring.from_function(horizon, lambda x, y: table_bits[(x, y)])
    limits = list(commit)
    settle = [max(x + 1, last_change[x] + 1) for x in range(horizon)]
    overrides = []
    for x in range(horizon):
        for y in range(x + 1, min(settle[x], horizon)):
            v = table_bits[(x, y)]
            if v != limits[x]:
                overrides.append((x, y, v))
    coloring = StableColoring(horizon, limits, settle, overrides)

    verdicts = []
    final_stage = horizon - 1
    for r, req in enumerate(reqs):
        threshold = 1 - Fraction(1, 2 * req.pattern.size)
        measure = _attention_measure(req, final_stage)
        if req.length == req.pattern.size:
            kind = "realized"
        elif measure > threshold:
            kind = "starved"  # wanted attention at the horizon; truncation artifact
        else:
            kind = "measure-bounded"
        verdicts.append(
            RequirementVerdict(r, kind, req.length, measure, threshold)
        )
    return PriorityResult(horizon, coloring, table, reqs, verdicts, log)


def check_transversal_realization(table, intervals, p: Pattern) -> bool:
    """Every choice of one element per stacked interval realizes the
    pattern prefix of the state's length."""
    t = len(intervals)
    for i in range(t):
        for j in range(i + 1, t):
            want = p.color(i, j)
            for x in range(intervals[i][0], intervals[i][1] + 1):
                for y in range(intervals[j][0], intervals[j][1] + 1):
                    if table.color(x, y) != want:
                        return False
    return True


def check_state_properties(result: PriorityResult) -> list:
    """Re-check the four state properties at every logged acting stage
    and at the horizon; returns a list of violation strings (empty when
    all hold)."""
    bad = []
    table = result.table
    for entry in result.log:
        states = entry["states"]
        markers = entry["markers"]
        for r, intervals in enumerate(states):
            p = result.requirements[r].pattern
            if not intervals:
                continue
            if not check_transversal_realization(table, intervals, p):
                bad.append(f"stage {entry['stage']} req {r}: transversal realization fails")
            for (a, b), (a2, b2) in zip(intervals, intervals[1:]):
                if a2 != b + 1:
                    bad.append(f"stage {entry['stage']} req {r}: gap between intervals")
            lo0 = intervals[0][0]
            hi_last = intervals[-1][1]
            for q in range(len(states)):
                if q == r:
                    continue
                if q < r and not markers[q] < lo0:
                    bad.append(f"stage {entry['stage']} req {r}: higher marker {q} not below state")
                if q > r and not markers[q] > hi_last:
                    bad.append(f"stage {entry['stage']} req {r}: lower marker {q} not above state")
    # interval-measure property at acting stages
    for entry in result.log:
        r = entry["acted"]
        req = result.requirements[r]
        threshold = 1 - Fraction(1, 2 * req.pattern.size)
        lo, hi = entry["interval"]
        if not req.script.hitting_measure(entry["stage"], lo, hi) > threshold:
            bad.append(f"stage {entry['stage']} req {r}: stacked interval measure below threshold")
    return bad


# ---------------------------------------------------------------------------
# Recursive split order builders


class GammaNode:
    """One level of the recursive split construction.

    The first 2**(e+1) ground elements are heads; the remainder splits by
    arrival residue into blocks, each built one level deeper.  At every
    stage exactly one block is disabled: arrivals landing in it never join
    the order.  A witnessed enumeration hit inside a later block moves the
    disabled index there.  Nodes built in the descending flavor also hold
    cut points: once an enumerated member exists below the current local
    stage, every future local stage starts a fresh top layer.
    """

    __slots__ = (
        "e", "dec", "path", "ground", "local", "heads", "block_of",
        "children", "disabled", "transitions", "cut_from",
    )

    def __init__(self, e, dec, path, ground):
        self.e = e
        self.dec = dec
        self.path = path
        self.ground = list(ground)
        self.local = {x: i for i, x in enumerate(self.ground)}
        width = 2 ** (e + 1)
        self.heads = self.ground[:width]
        rest = self.ground[width:]
        self.block_of = {}
        grounds = [rest[i::width] for i in range(width)]
        for i, g in enumerate(grounds):
            for x in g:
                self.block_of[x] = i
        if rest:
            self.children = [
                GammaNode(e + 1, True, path + (i,), g) for i, g in enumerate(grounds)
            ]
        else:
            self.children = []
        self.disabled = 0
        self.transitions = []
        self.cut_from = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def cut_level(self, x) -> int:
        if not self.dec or self.cut_from is None:
            return 0
        j = self.local[x]
        return 0 if j < self.cut_from else j - self.cut_from + 1


@dataclass
class BuiltOrder:
    """A staged split order: its members, their comparator keys, and the
    provenance log that replays to the same order."""

    horizon: int
    direction: str
    e0: int
    root: GammaNode
    members: list
    keys: dict
    log: list

    def less(self, x, y) -> bool:
        return self.keys[x] < self.keys[y]

    def member_order(self):
        """The order relabeled onto 0..|B|-1 in natural member order."""
        relabel = {x: i for i, x in enumerate(self.members)}
        keys = {relabel[x]: self.keys[x] for x in self.members}
        return SimpleOrder(len(self.members), keys)

    def final_disabled(self) -> dict:
        out = {}

        def walk(node):
            if not node.is_leaf:
                out[node.path] = node.disabled
                for child in node.children:
                    walk(child)

        walk(self.root)
        return out


@dataclass
class SimpleOrder:
    horizon: int
    keys: dict

    def less(self, x, y) -> bool:
        return self.keys[x] < self.keys[y]


def chain_order(n: int) -> SimpleOrder:
    return SimpleOrder(n, {x: (x,) for x in range(n)})


def gamma_build(direction: str, e: int, n: int, scripts=None, horizon=None) -> BuiltOrder:
    """Build the split order on ground 0..n-1 with staged enumeration
    events driving the disable/re-enable protocol and the cut points.

    scripts maps a level index to an AdversaryScript queried at the empty
    prefix.  Stage s places element s: enumeration updates and protocol
    moves happen first, then the placement, so a stage's own arrival obeys
    the freshly moved disabled block.
    """
    if direction not in ("inc", "dec"):
        raise ContractViolation("direction must be inc or dec")
    if horizon is not None and n > horizon:
        raise ContractViolation(f"ground of {n} exceeds horizon {horizon}")
    scripts = scripts or {}
    root = GammaNode(e, direction == "dec", (), range(n))
    member = [False] * n
    log: list = []

    nodes: list[GammaNode] = []

    def collect(node):
        nodes.append(node)
        for ch in node.children:
            collect(ch)

    collect(root)
    enum_now: dict[int, set] = {}

    def enumerated(level: int, s: int) -> set:
        script = scripts.get(level)
        if script is None:
            return set()
        key = (level, s)
        if key not in enum_now:
            enum_now[key] = script.enumerated("", s)
        return enum_now[key]

    for s in range(n):
        # protocol updates before the stage's arrival is placed
        for node in nodes:
            if node.dec and node.cut_from is None:
                hits = enumerated(node.e, s)
                if any(member[y] for y in hits if y in node.local and y < s):
                    node.cut_from = sum(1 for x in node.ground if x < s)
                    log.append(
                        {"stage": s, "node": list(node.path), "event": "cut",
                         "local": node.cut_from}
                    )
            if node.is_leaf:
                continue
            hits = enumerated(node.e, s)
            candidates = sorted(
                node.block_of[y]
                for y in hits
                if y < s and member[y] and y in node.block_of
                and node.block_of[y] > node.disabled
            )
            if candidates:
                new = candidates[0]
                log.append(
                    {"stage": s, "node": list(node.path), "event": "transition",
                     "old": node.disabled, "new": new}
                )
                node.transitions.append((s, node.disabled, new))
                node.disabled = new

        # placement
        node = root
        excluded = False
        while True:
            j = node.local[s]
            if j < len(node.heads):
                break
            i = node.block_of[s]
            if not node.is_leaf and i == node.disabled:
                excluded = True
                log.append(
                    {"stage": s, "node": list(node.path), "event": "exclude",
                     "block": i}
                )
                break
            if node.is_leaf:
                break
            node = node.children[i]
        member[s] = not excluded

    members = [x for x in range(n) if member[x]]
    keys = {}

    def key_of(x) -> tuple:
        node = root
        out: list = []
        while True:
            if node.dec:
                out.append(node.cut_level(x))
            j = node.local[x]
            if j < len(node.heads):
                out.append(2 * j)
                return tuple(out)
            i = node.block_of[x]
            out.append(2 * i + 1)
            node = node.children[i]

    for x in members:
        keys[x] = key_of(x)
    order = BuiltOrder(n, direction, e, root, members, keys, log)
    # single-disabled invariant: transitions are atomic swaps, so it can
    # only break if a node ever logged two moves at one stage
    for node in nodes:
        stages = [t[0] for t in node.transitions]
        if len(stages) != len(set(stages)):
            raise InternalInvariant("two disable transitions in one stage")
    return order


@dataclass
class DeltaResult:
    status: str  # "ok" | "dead_block"
    sequence: list
    flags: list
    bits_used: int


def delta_extract(direction: str, e: int, bits, built: BuiltOrder) -> DeltaResult:
    """Descend the built order choosing one block per level from the bit
    stream; the chosen head opens the sequence and the recursion continues
    inside the chosen block, filtered to members.

    Picking the block that ended up disabled at any level is the failure
    mode.  A sequence that comes back is verified increasing both for the
    built comparator and for the natural order.
    """
    if direction != built.direction or e != built.e0:
        raise ContractViolation("direction/index must match the built order")
    stream = list(bits)
    pos = 0
    flags: list = []
    seq: list = []
    node = built.root
    status = "ok"

    while True:
        width = node.e + 1
        if pos + width > len(stream):
            flags.append("bit stream exhausted")
            break
        j = 0
        for b in stream[pos : pos + width]:
            j = (j << 1) | int(b)
        pos += width
        if node.is_leaf:
            # finite ground ran out: close the sequence with the remaining
            # heads; only a disabled pick counts as failure
            tail = [h for h in node.heads[j:] if h in built.keys]
            if not tail:
                flags.append(f"leaf choice {j} beyond populated heads")
            seq.extend(tail)
            break
        if j == node.disabled:
            return DeltaResult("dead_block", seq, flags + [f"picked disabled block {j} at node {node.path}"], pos)
        if j < len(node.heads):
            head = node.heads[j]
            if head in built.keys:
                seq.append(head)
        node = node.children[j]

    if status == "ok" and seq:
        for a, b in zip(seq, seq[1:]):
            if not (a < b and built.less(a, b)):
                raise InternalInvariant("extracted sequence is not doubly increasing")
    return DeltaResult(status, seq, flags, pos)


# ---------------------------------------------------------------------------
# Mirror doubling


@dataclass
class MirrorOrder:
    """Two copies of a source order, evens carrying the copy and odds the
    reversed copy above it."""

    source: object
    horizon: int

    def less(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if a % 2 == 0 and b % 2 == 0:
            return self.source.less(a // 2, b // 2)
        if a % 2 == 0 and b % 2 == 1:
            return True
        if a % 2 == 1 and b % 2 == 1:
            return self.source.less(b // 2, a // 2)
        return False

    def to_stable(self) -> StableColoring:
        """Read the order as a coloring and declare its limit data."""
        n = self.horizon
        bits = {}
        for x in range(n):
            for y in range(x + 1, n):
                bits[(x, y)] = 0 if self.less(x, y) else 1
        limits = []
        settle = []
        for x in range(n):
            tail = [bits[(x, y)] for y in range(x + 1, n)]
            lim = tail[-1] if tail else 0
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


def mirror_double(source, horizon: int | None = None) -> MirrorOrder:
    n = horizon if horizon is not None else source.horizon
    return MirrorOrder(source, 2 * n)


# ---------------------------------------------------------------------------
# Monotone-sequence extraction from orders avoiding a separable permutation


@dataclass
class AdsOutcome:
    status: str  # "monotone" | "realized" | "inconclusive"
    direction: str | None
    sequence: list
    witness: VertexSet | None
    frontier: dict | None


def _binarize(tree: SeparatingTree) -> SeparatingTree:
    if tree.is_leaf:
        return tree
    children = [_binarize(c) for c in tree.children]
    node = children[-1]
    for child in reversed(children[:-1]):
        node = SeparatingTree(tree.op, (child, node))
    return node


def ads_extract(order, perm: Permutation, horizon: int, target: int = 15,
                tail_threshold: int = 12) -> AdsOutcome:
    """Walk the separating tree of an avoided separable permutation to
    force a long monotone sequence out of the order.

    At a direct-sum node: either the left part occurs with a large set of
    later elements above its top, and the right part is pursued there, or
    every left occurrence tops out, and the tops of successive occurrences
    form a descending sequence.  Skew-sum nodes behave dually with
    ascending bottoms.  "Large" means at least tail_threshold elements
    inside the horizon; regions too thin to decide are reported as
    inconclusive with the frontier.  A full realization of the permutation
    contradicts the avoidance precondition and comes back as a certified
    witness.
    """
    tree = separating_tree(perm)
    if tree is None:
        raise ContractViolation(f"{perm.to_text()} is not separable")
    tree = _binarize(tree)
    less = order.less

    def realize(node: SeparatingTree, region: list):
        if node.is_leaf:
            if not region:
                return ("inconclusive", {"need": 1, "region": 0})
            return ("realized", [region[0]])
        left, right = node.children
        plus = node.op == "+"
        collected: list = []
        current = region
        while True:
            sub = realize(left, current)
            if sub[0] != "realized":
                if sub[0] == "monotone":
                    return sub
                if collected:
                    # the partial run is itself monotone evidence
                    return (
                        "monotone-partial",
                        ("desc" if plus else "asc", collected, sub[1]),
                    )
                return sub
            front = sub[1]
            ext = front[-1]
            anchor = _extreme(less, front, want_max=plus)
            if plus:
                beyond = [x for x in current if x > ext and less(anchor, x)]
            else:
                beyond = [x for x in current if x > ext and less(x, anchor)]
            if len(beyond) >= tail_threshold:
                sub2 = realize(right, beyond)
                if sub2[0] != "realized":
                    return sub2
                return ("realized", front + sub2[1])
            collected.append(anchor)
            if len(collected) >= target:
                return ("monotone", ("desc" if plus else "asc", collected))
            if plus:
                current = [x for x in current if x > ext and less(x, anchor)]
            else:
                current = [x for x in current if x > ext and less(anchor, x)]
            if not current:
                return ("inconclusive", {"need": target - len(collected),
                                         "collected": len(collected), "region": 0})

    region = list(range(min(horizon, order.horizon)))
    out = realize(tree, region)
    if out[0] == "realized":
        witness = VertexSet(out[1])
        return AdsOutcome("realized", None, [], witness, None)
    if out[0] == "monotone":
        direction, seq = out[1]
        _assert_monotone(less, seq, direction)
        return AdsOutcome("monotone", direction, seq, None, None)
    if out[0] == "monotone-partial":
        direction, seq, frontier = out[1]
        _assert_monotone(less, seq, direction)
        if len(seq) >= target:
            return AdsOutcome("monotone", direction, seq, None, None)
        return AdsOutcome("inconclusive", direction, seq, None,
                          {"partial": len(seq), "inner": frontier})
    return AdsOutcome("inconclusive", None, [], None, out[1])


def _extreme(less, vertices, want_max: bool):
    best = vertices[0]
    for v in vertices[1:]:
        if (want_max and less(best, v)) or (not want_max and less(v, best)):
            best = v
    return best


def _assert_monotone(less, seq, direction):
    for a, b in zip(seq, seq[1:]):
        ok = less(b, a) if direction == "desc" else less(a, b)
        if not (a < b and ok):
            raise InternalInvariant("collected sequence is not monotone")


# ---------------------------------------------------------------------------
# Escaping selection race


@dataclass
class ModulusApprox:
    """Staged approximation of a settling modulus: for each query point x
    the value jumps through at most x recorded change stages."""

    change_points: dict

    def __post_init__(self):
        for x, pts in self.change_points.items():
            pts = tuple(pts)
            if list(pts) != sorted(set(pts)):
                raise ContractViolation(f"change points of {x} must strictly increase")
            if len(pts) > max(0, x):
                raise ContractViolation(
                    f"{len(pts)} changes at {x} exceed the allowed {max(0, x)}"
                )
            self.change_points[x] = pts

    def points(self, x: int) -> tuple:
        return self.change_points.get(x, ())

    def value_at(self, x: int, stage: int) -> int:
        v = 0
        for m in self.points(x):
            if m <= stage:
                v = m
            else:
                break
        return v

    def final(self, x: int) -> int:
        pts = self.points(x)
        return pts[-1] if pts else 0


class ReferenceGuessSource:
    """Escapes honestly: the least value outside the enumerated set."""

    name = "reference"

    def pick_value(self, x: int, enumerated: frozenset, bound: int) -> int:
        v = 0
        while v in enumerated:
            v += 1
        return v


class AdversarialGuessSource:
    """Breaks the escape contract whenever the enumerated set offers a
    position at or beyond x."""

    name = "adversarial"

    def pick_value(self, x: int, enumerated: frozenset, bound: int) -> int:
        for v in sorted(enumerated):
            if v >= x:
                return v
        v = 0
        while v in enumerated:
            v += 1
        return v


@dataclass
class SelectResult:
    harvested: VertexSet
    transcript: list
    violations: list
    skipped: list


def escaping_select(family, bad, modulus: ModulusApprox, k: int, guess,
                    x_range: int, stage_horizon: int) -> SelectResult:
    """Harvest elements outside the bad set from a family of blocks.

    For each query point x, the enumerated trap set holds 0..x-1 together
    with the positions of bad elements inside the family blocks indexed by
    x's modulus change points; the guess source must name a position
    outside it.  Waiting for the first stage whose modulus value covers
    the guessed position then makes the harvested element provably good.
    All outputs are re-verified against the bad set; contract breaches by
    the guess source are returned as transcript violations.
    """
    family = [list(b) for b in family]
    bad = set(bad)
    for i, block in enumerate(family):
        if len(set(block) & bad) > k:
            raise ContractViolation(
                f"block {i} meets the bad set in more than {k} elements"
            )
        if len(block) < i:
            raise ContractViolation(f"block {i} smaller than its index")
    harvested: list = []
    transcript: list = []
    violations: list = []
    skipped: list = []

    for x in range(1, x_range + 1):
        trap = set(range(x))
        for m in modulus.points(x):
            if m < len(family):
                for pos, el in enumerate(family[m]):
                    if el in bad:
                        trap.add(pos)
        bound = x * (k + 1)
        if len(trap) > bound:
            raise InternalInvariant("trap set exceeded its stated bound")
        p = guess.pick_value(x, frozenset(trap), bound)
        entry = {"x": x, "trap_size": len(trap), "guess": p}
        if p in trap:
            entry["violation"] = "guess inside the enumerated set"
            violations.append(entry)
            transcript.append(entry)
            continue
        stage = None
        for s in range(stage_horizon + 1):
            if modulus.value_at(x, s) >= p + 1:
                stage = s
                break
        if stage is None:
            entry["skipped"] = "modulus never covered the guess"
            skipped.append(x)
            transcript.append(entry)
            continue
        idx = modulus.value_at(x, stage)
        if idx >= len(family) or p >= len(family[idx]):
            entry["skipped"] = "family exhausted"
            skipped.append(x)
            transcript.append(entry)
            continue
        el = family[idx][p]
        entry["block"] = idx
        entry["element"] = el
        if el in bad:
            entry["violation"] = "harvested a bad element"
            violations.append(entry)
        else:
            harvested.append(el)
        transcript.append(entry)

    return SelectResult(VertexSet(set(harvested)), transcript, violations, skipped)
