"""Pair-coloring patterns, finite and stable colorings, realization search.

A pattern of size `l` assigns a color in {0,1} to every ordered pair
(i, j) with 0 <= i < j < l.  Bits are stored in the canonical
lexicographic pair order (0,1),(0,2),...,(0,l-1),(1,2),...,(l-2,l-1);
all serialization uses that order so fixtures are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExhausted, ContractViolation, RangeError


def pair_index(size: int, i: int, j: int) -> int:
    """Index of the pair (i, j), i < j, in canonical lexicographic order."""
    if not 0 <= i < j < size:
        raise ContractViolation(f"pair ({i},{j}) invalid for size {size}")
    return i * (2 * size - i - 1) // 2 + (j - i - 1)


def iter_pairs(size: int):
    """Ordered pairs (i, j), i < j, in canonical lexicographic order."""
    for i in range(size - 1):
        for j in range(i + 1, size):
            yield i, j


class VertexSet(tuple):
    """A strictly increasing finite set of naturals."""

    def __new__(cls, elements):
        elems = tuple(elements)
        for x in elems:
            if not isinstance(x, int) or x < 0:
                raise ContractViolation(f"vertex {x!r} is not a natural")
        if len(set(elems)) != len(elems):
            raise ContractViolation(f"duplicate vertices in {elems}")
        return super().__new__(cls, sorted(elems))

    def __repr__(self):
        return "{" + ",".join(str(x) for x in self) + "}"


class Pattern:
    """An upper-triangular 2-coloring of pairs over {0..size-1}."""

    __slots__ = ("size", "bits")

    def __init__(self, size: int, bits):
        if size < 1:
            raise ContractViolation("pattern size must be >= 1")
        bits = tuple(int(b) for b in bits)
        expected = size * (size - 1) // 2
        if len(bits) != expected:
            raise ContractViolation(
                f"pattern of size {size} needs {expected} bits, got {len(bits)}"
            )
        if any(b not in (0, 1) for b in bits):
            raise ContractViolation("pattern bits must be 0 or 1")
        self.size = size
        self.bits = bits

    @classmethod
    def constant(cls, size: int, color: int) -> "Pattern":
        return cls(size, (color,) * (size * (size - 1) // 2))

    def color(self, i: int, j: int) -> int:
        """Color of the pair (i, j); rejects i >= j."""
        return self.bits[pair_index(self.size, i, j)]

    def dual(self) -> "Pattern":
        """Bitwise complement; an involution."""
        return Pattern(self.size, tuple(1 - b for b in self.bits))

    def restrict(self, positions) -> "Pattern":
        """Induced sub-pattern on a strictly increasing position subset."""
        pos = list(positions)
        if sorted(set(pos)) != pos:
            raise ContractViolation("positions must be strictly increasing")
        if pos and not (0 <= pos[0] and pos[-1] < self.size):
            raise RangeError(f"positions {pos} out of range for size {self.size}")
        m = len(pos)
        return Pattern(
            m, tuple(self.color(pos[i], pos[j]) for i, j in iter_pairs(m))
        )

    def last_column(self):
        """Colors p(x, size-1) for x < size-1, in order."""
        return tuple(self.color(x, self.size - 1) for x in range(self.size - 1))

    def __eq__(self, other):
        return (
            isinstance(other, Pattern)
            and self.size == other.size
            and self.bits == other.bits
        )

    def __hash__(self):
        return hash((self.size, self.bits))

    def __repr__(self):
        return f"Pattern({self.size}, {''.join(map(str, self.bits))})"

    def to_text(self) -> str:
        """File form: `size=l` then the bits in canonical pair order."""
        return f"size={self.size}\n{''.join(map(str, self.bits))}\n"

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("size="):
            raise ContractViolation("pattern text must start with size=<l>")
        size = int(lines[0][5:])
        bits = "".join(lines[1:])
        return cls(size, tuple(int(b) for b in bits))


# The two non-transitivity configurations on three vertices: the induced
# successor relation (x before y iff the pair has color 0 read upward)
# forms a 3-cycle.  They are dual to each other.
NON_TRANSITIVE = (Pattern(3, (0, 1, 0)), Pattern(3, (1, 0, 1)))

TRIVIAL_PATTERN = Pattern(1, ())


def is_transitive(p: Pattern) -> bool:
    """True iff no 3 positions induce a non-transitivity configuration."""
    n = p.size
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                sub = (p.color(i, j), p.color(i, k), p.color(j, k))
                if sub == (0, 1, 0) or sub == (1, 0, 1):
                    return False
    return True


class FiniteColoring:
    """A total 2-coloring of pairs over {0..horizon-1}, symmetric access."""

    __slots__ = ("horizon", "_bits")

    def __init__(self, horizon: int, bits):
        if horizon < 1:
            raise ContractViolation("horizon must be >= 1")
        bits = tuple(int(b) for b in bits)
        expected = horizon * (horizon - 1) // 2
        if len(bits) != expected:
            raise ContractViolation(
                f"coloring on {horizon} vertices needs {expected} bits, got {len(bits)}"
            )
        self.horizon = horizon
        self._bits = bits

    @classmethod
    def from_function(cls, horizon: int, fn) -> "FiniteColoring":
        return cls(horizon, tuple(fn(i, j) for i, j in iter_pairs(horizon)))

    @classmethod
    def constant(cls, horizon: int, color: int) -> "FiniteColoring":
        return cls(horizon, (color,) * (horizon * (horizon - 1) // 2))

    def color(self, x: int, y: int) -> int:
        if x == y:
            raise ContractViolation("coloring undefined on the diagonal")
        if x > y:
            x, y = y, x
        if y >= self.horizon or x < 0:
            raise RangeError(f"pair ({x},{y}) beyond horizon {self.horizon}")
        return self._bits[pair_index(self.horizon, x, y)]

    def dual(self) -> "FiniteColoring":
        return FiniteColoring(self.horizon, tuple(1 - b for b in self._bits))

    def to_text(self) -> str:
        """File form: first line N, then one upper-triangular row per vertex."""
        rows = [str(self.horizon)]
        for x in range(self.horizon - 1):
            rows.append(
                "".join(str(self.color(x, y)) for y in range(x + 1, self.horizon))
            )
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FiniteColoring":
        lines = [ln.strip() for ln in text.splitlines()]
        while lines and not lines[-1]:
            lines.pop()
        if not lines:
            raise ContractViolation("empty coloring text")
        n = int(lines[0])
        bits = []
        for x in range(n - 1):
            row = lines[1 + x] if 1 + x < len(lines) else ""
            if len(row) != n - 1 - x:
                raise ContractViolation(
                    f"row {x} must have {n - 1 - x} bits, got {len(row)}"
                )
            bits.extend(int(b) for b in row)
        return cls(n, tuple(bits))


class StableColoring:
    """A coloring whose rows settle: f(x, y) = limit(x) once y >= settle(x).

    Limits and settling times are explicit data, so limit queries are
    decidable at finite scale.  Values before the settling time default to
    the limit unless an override names the pair.
    """

    __slots__ = ("horizon", "limits", "settle", "overrides")

    def __init__(self, horizon: int, limits, settle, overrides=()):
        self.horizon = horizon
        self.limits = tuple(int(c) for c in limits)
        self.settle = tuple(int(s) for s in settle)
        if len(self.limits) != horizon or len(self.settle) != horizon:
            raise ContractViolation("limits and settle must cover the horizon")
        if any(c not in (0, 1) for c in self.limits):
            raise ContractViolation("limits must be 0 or 1")
        ov = {}
        for x, y, c in overrides:
            if not x < y < self.settle[x]:
                raise ContractViolation(
                    f"override ({x},{y}) must satisfy x < y < settle(x)={self.settle[x]}"
                )
            ov[(x, y)] = int(c)
        self.overrides = ov

    def color(self, x: int, y: int) -> int:
        if x == y:
            raise ContractViolation("coloring undefined on the diagonal")
        if x > y:
            x, y = y, x
        if y >= self.horizon or x < 0:
            raise RangeError(f"pair ({x},{y}) beyond horizon {self.horizon}")
        if y >= self.settle[x]:
            return self.limits[x]
        return self.overrides.get((x, y), self.limits[x])

    def limit(self, x: int) -> int:
        if not 0 <= x < self.horizon:
            raise RangeError(f"vertex {x} beyond horizon {self.horizon}")
        return self.limits[x]

    def restrict(self, horizon: int) -> "FiniteColoring":
        if horizon > self.horizon:
            raise RangeError("cannot restrict beyond the generated horizon")
        return FiniteColoring.from_function(horizon, self.color)

    def to_json_dict(self) -> dict:
        return {
            "type": "stable",
            "horizon": self.horizon,
            "limits": list(self.limits),
            "settle": list(self.settle),
            "overrides": sorted([x, y, c] for (x, y), c in self.overrides.items()),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "StableColoring":
        if d.get("type") != "stable":
            raise ContractViolation("not a stable-coloring record")
        return cls(
            d["horizon"],
            d["limits"],
            d["settle"],
            [tuple(t) for t in d.get("overrides", [])],
        )


def coloring_horizon(f) -> int:
    return f.horizon


def realizes(f, vertices, p: Pattern) -> bool:
    """True iff the vertex set carries exactly the pair colors of p."""
    vs = VertexSet(vertices)
    if len(vs) != p.size:
        raise ContractViolation(
            f"vertex set of size {len(vs)} cannot realize a pattern of size {p.size}"
        )
    if vs and vs[-1] >= f.horizon:
        raise RangeError(f"vertex {vs[-1]} beyond horizon {f.horizon}")
    for i, j in iter_pairs(p.size):
        if f.color(vs[i], vs[j]) != p.color(i, j):
            return False
    return True


def find_realization(f, reservoir, p: Pattern, budget: int | None = 10**6):
    """Search the reservoir for a subset realizing p.

    Depth-first backtracking over reservoir vertices in increasing order,
    pruning any partial assignment whose pairs already disagree with p.
    The budget counts search-tree nodes; exhaustion raises BudgetExhausted
    and is never conflated with the proven-absence answer None.
    """
    if budget is not None and budget <= 0:
        raise ContractViolation("budget must be positive")
    pool = sorted(set(reservoir))
    if pool and pool[-1] >= f.horizon:
        raise RangeError(f"vertex {pool[-1]} beyond horizon {f.horizon}")
    m = p.size
    if len(pool) < m:
        return None
    color = f.color
    pcol = p.color
    chosen: list[int] = []
    nodes = 0

    def extend(start: int):
        nonlocal nodes
        t = len(chosen)
        if t == m:
            return True
        # not enough vertices left to finish
        for idx in range(start, len(pool) - (m - t) + 1):
            v = pool[idx]
            nodes += 1
            if budget is not None and nodes > budget:
                raise BudgetExhausted(nodes)
            ok = True
            for i in range(t):
                if color(chosen[i], v) != pcol(i, t):
                    ok = False
                    break
            if ok:
                chosen.append(v)
                if extend(idx + 1):
                    return True
                chosen.pop()
        return False

    if extend(0):
        return VertexSet(chosen)
    return None


def avoids(f, reservoir, p: Pattern, budget: int | None = None) -> bool:
    """True iff no subset of the reservoir realizes p (complete search)."""
    return find_realization(f, reservoir, p, budget) is None


@dataclass(frozen=True)
class LinearOrderView:
    """A transitive coloring read as a strict total order.

    x precedes y in the order exactly when the upward pair (x, y) has
    color 0 (equivalently the downward pair has color 1).
    """

    coloring: object
    horizon: int = field(default=0)

    def __post_init__(self):
        if self.horizon == 0:
            object.__setattr__(self, "horizon", self.coloring.horizon)
        if self.horizon > self.coloring.horizon:
            raise RangeError("view horizon beyond coloring horizon")

    def less(self, x: int, y: int) -> bool:
        if x == y:
            return False
        if x < y:
            return self.coloring.color(x, y) == 0
        return self.coloring.color(y, x) == 1

    def check_transitive(self) -> bool:
        """Full triple scan; quadratic-free transitivity certificate."""
        n = self.horizon
        for x in range(n):
            for y in range(n):
                if y == x or not self.less(x, y):
                    continue
                for z in range(n):
                    if z in (x, y):
                        continue
                    if self.less(y, z) and not self.less(x, z):
                        return False
        return True

    def min_of(self, vertices) -> int:
        best = None
        for v in vertices:
            if best is None or self.less(v, best):
                best = v
        if best is None:
            raise ContractViolation("empty vertex collection")
        return best

    def max_of(self, vertices) -> int:
        best = None
        for v in vertices:
            if best is None or self.less(best, v):
                best = v
        if best is None:
            raise ContractViolation("empty vertex collection")
        return best

    def sorted(self, vertices) -> list:
        import functools

        return sorted(
            vertices,
            key=functools.cmp_to_key(
                lambda a, b: -1 if self.less(a, b) else (1 if self.less(b, a) else 0)
            ),
        )
