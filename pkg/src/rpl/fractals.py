"""Self-similar basis permutations ("fractals"), block addressing,
embedding of separable permutations, and the two-sided partition lemma.

The k-ary fractal of dimension 0 is the one-point permutation; the
fractal of dimension n+1 combines k copies of the dimension-n fractal
with a direct sum when n is even and a skew sum when n is odd.  Its k
level-1 sub-intervals are its blocks, each a fractal one dimension lower.
"""

from __future__ import annotations

import os
from functools import lru_cache

from .errors import ContractViolation, InternalInvariant, RangeError, ResourceLimit
from .patterns import Pattern, VertexSet, iter_pairs, realizes
from .perms import (
    Permutation,
    SeparatingTree,
    direct_sum,
    perm_coloring,
    perm_to_pattern,
    separating_tree,
    skew_sum,
)

SIZE_CAP = 1 << 15


def _cache_path(k: int, n: int) -> str | None:
    root = os.environ.get("RPL_CACHE_DIR")
    if not root:
        return None
    return os.path.join(root, f"fractal_{k}_{n}.txt")


@lru_cache(maxsize=None)
def fractal_perm(k: int, n: int, cap: int = SIZE_CAP) -> Permutation:
    """The k-ary fractal permutation of dimension n (size k**n)."""
    if k < 1 or n < 0:
        raise ContractViolation("need arity >= 1 and dimension >= 0")
    if k**n > cap:
        raise ResourceLimit(f"fractal size {k}**{n} exceeds cap {cap}")
    path = _cache_path(k, n)
    if path and os.path.exists(path):
        with open(path) as fh:
            return Permutation(int(t) for t in fh.read().split(","))
    if n == 0:
        result = Permutation((0,))
    else:
        prev = fractal_perm(k, n - 1, cap)
        combine = direct_sum if (n - 1) % 2 == 0 else skew_sum
        result = prev
        for _ in range(k - 1):
            result = combine(result, prev)
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            fh.write(",".join(str(v) for v in result.values))
    return result


def fractal_pattern(k: int, n: int) -> Pattern:
    return perm_to_pattern(fractal_perm(k, n))


def level_color(n: int) -> int:
    """Color between two level-1 blocks of a dimension-n fractal (n >= 1):
    0 under a direct-sum level, 1 under a skew-sum level."""
    if n < 1:
        raise ContractViolation("blocks only exist from dimension 1 on")
    return 0 if (n - 1) % 2 == 0 else 1


def fractal_pair_color(k: int, n: int, x: int, y: int) -> int:
    """Color of the position pair (x, y) inside the k-ary dimension-n
    fractal, computed from the first base-k digit where x and y differ."""
    if not 0 <= x < y < k**n:
        raise ContractViolation("need 0 <= x < y < k**n")
    for depth in range(n):
        width = k ** (n - depth - 1)
        if x // width != y // width:
            return level_color(n - depth)
        x %= width
        y %= width
    raise InternalInvariant("distinct positions share all digits")


def navigate(k: int, n: int, path) -> tuple[int, int]:
    """(offset, length) of the sub-fractal addressed by a block path.

    The empty path is the whole interval; each step descends into one of
    the k blocks, which partition the parent in increasing position order.
    """
    path = tuple(path)
    if len(path) > n:
        raise ContractViolation(f"path of length {len(path)} exceeds dimension {n}")
    offset = 0
    for depth, w in enumerate(path):
        if not 0 <= w < k:
            raise RangeError(f"path entry {w} out of range for arity {k}")
        offset += w * k ** (n - depth - 1)
    return offset, k ** (n - len(path))


def occurrence_blocks(occurrence, k: int, n: int) -> list[VertexSet]:
    """The k blocks of a fractal occurrence: consecutive chunks one
    dimension lower, in increasing position order."""
    occ = VertexSet(occurrence)
    if len(occ) != k**n:
        raise ContractViolation(
            f"occurrence of size {len(occ)} is not a {k}-ary dimension-{n} fractal"
        )
    if n < 1:
        raise ContractViolation("dimension-0 occurrences have no blocks")
    w = k ** (n - 1)
    return [VertexSet(occ[i * w : (i + 1) * w]) for i in range(k)]


def embed_separable(perm: Permutation, k: int) -> tuple[int, VertexSet]:
    """Embed a separable permutation into the k-ary fractal.

    Constructive induction on the separating tree: a leaf sits at
    dimension 0; an operator node lands at the smallest dimension of the
    right parity strictly above all its children, each child placed in its
    own block (wide nodes are folded into nested same-operator groups).
    The returned positions are re-verified to realize the permutation
    inside the fractal before returning.
    """
    if k < 2:
        raise ContractViolation("embedding needs arity >= 2")
    tree = separating_tree(perm)
    if tree is None:
        raise ContractViolation(f"{perm.to_text()} is not separable")

    def place(node: SeparatingTree) -> tuple[int, list[int]]:
        if node.is_leaf:
            return 0, [0]
        children = list(node.children)
        while len(children) > k:
            children = children[: k - 1] + [
                SeparatingTree(node.op, tuple(children[k - 1 :]))
            ]
        placed = [place(c) for c in children]
        top = max(d for d, _ in placed)
        want_odd = node.op == "+"  # direct-sum levels have odd dimension
        n = top + 1
        while (n % 2 == 1) != want_odd or n < 1:
            n += 1
        width = k ** (n - 1)
        positions: list[int] = []
        for block, (_, sub) in enumerate(placed):
            # a lower-dimensional embedding stays valid at the front of a
            # taller fractal, so block-local positions carry over directly
            positions.extend(block * width + q for q in sub)
        return n, positions

    dim, positions = place(tree)
    out = VertexSet(positions)
    host = perm_coloring(fractal_perm(k, dim))
    if not realizes(host, out, perm_to_pattern(perm)):
        raise InternalInvariant(
            f"embedding of {perm.to_text()} into arity-{k} dimension-{dim} "
            "fractal failed re-verification"
        )
    return dim, out


def partition_extract(a: int, b: int, n: int, vertex_colors) -> tuple[int, VertexSet]:
    """Two-sided pigeonhole on a vertex 2-coloring of the (a+b-1)-ary
    dimension-n fractal: an all-0 a-ary sub-fractal or an all-1 b-ary
    sub-fractal of the same dimension, preferring the 0 side.

    vertex_colors maps each position below (a+b-1)**n to {0,1}.
    """
    if a < 1 or b < 1 or n < 0:
        raise ContractViolation("need a, b >= 1 and n >= 0")
    k = a + b - 1
    total = k**n
    colors = [int(vertex_colors(v)) for v in range(total)]
    if any(c not in (0, 1) for c in colors):
        raise ContractViolation("vertex colors must be total over {0,1}")

    def recurse(offset: int, dim: int) -> tuple[int, list[int]]:
        if dim == 0:
            return colors[offset], [offset]
        width = k ** (dim - 1)
        verdicts = []
        for i in range(k):
            verdicts.append(recurse(offset + i * width, dim - 1))
        zeros = [pos for c, pos in verdicts if c == 0]
        if len(zeros) >= a:
            return 0, [p for pos in zeros[:a] for p in pos]
        ones = [pos for c, pos in verdicts if c == 1]
        if len(ones) < b:
            raise InternalInvariant(
                f"pigeonhole failed at dimension {dim}: "
                f"{len(zeros)} zero-blocks, {len(ones)} one-blocks of {k}"
            )
        return 1, [p for pos in ones[:b] for p in pos]

    side, positions = recurse(0, n)
    result = VertexSet(positions)
    arity = a if side == 0 else b
    if len(result) != arity**n:
        raise InternalInvariant("extracted sub-fractal has the wrong cardinality")
    if any(colors[v] != side for v in result):
        raise InternalInvariant("extracted sub-fractal is not monochromatic")
    if not _is_subfractal(result, k, n, arity):
        raise InternalInvariant("extracted positions do not form the claimed shape")
    return side, result


def _is_subfractal(positions, ambient_k: int, ambient_n: int, arity: int) -> bool:
    """Positions inside the ambient fractal induce the arity-ary fractal
    pattern of the same dimension."""
    pos = list(positions)
    want = fractal_pattern(arity, ambient_n)
    for (i, j) in iter_pairs(len(pos)):
        if fractal_pair_color(ambient_k, ambient_n, pos[i], pos[j]) != want.color(i, j):
            return False
    return True


def is_subfractal(positions, ambient_k: int, ambient_n: int, arity: int) -> bool:
    return _is_subfractal(positions, ambient_k, ambient_n, arity)
