"""Recursively grown random trees: seeds, growth rules, correlated pairs.

A tree on ``n`` vertices is stored in arrival order: vertices are labeled
``0..n-1`` by the time they joined, and ``parent[v]`` is the vertex that
``v`` attached to (``parent[v] < v`` for every grown vertex).  Seed edges
are kept verbatim on the :class:`SeedTree`; internally they are oriented
toward vertex 0 so that the full parent array (with ``parent[0] == -1``)
describes the whole tree rooted at vertex 0.

Growth rules:

* uniform attachment (UA): the new vertex picks an existing vertex
  uniformly at random;
* preferential attachment (PA): the new vertex picks an existing vertex
  with probability proportional to its degree, implemented by drawing a
  uniform entry of the edge-endpoint multiset (each vertex appears once
  per incident edge).

Each growth step consumes exactly one uniform double from the tree's
random stream, so single trees and the vectorized batch engines
(:mod:`corrgrow.batch`) produce bit-identical results from the same
:class:`~corrgrow.rng.RngSpec`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import InvalidSize, InvalidTStar, NotATree
from .rng import RngSpec


class GrowthRule(Enum):
    UA = "UA"
    PA = "PA"


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SeedTree:
    """Validated seed tree on vertices ``0..size-1``.

    ``parent_to_root`` orients every seed edge toward vertex 0 and
    ``accum_order`` lists the non-root seed vertices by decreasing depth,
    the order in which subtree masses can be folded into their parents.
    """

    edges: tuple[tuple[int, int], ...]
    size: int
    parent_to_root: np.ndarray = field(repr=False, compare=False)
    accum_order: np.ndarray = field(repr=False, compare=False)
    endpoints: np.ndarray = field(repr=False, compare=False)

    @staticmethod
    def from_edges(edges: Iterable[Sequence[int]], size: int | None = None) -> "SeedTree":
        edges = tuple((int(a), int(b)) for a, b in edges)
        verts = {v for e in edges for v in e}
        s = size if size is not None else (max(verts) + 1 if verts else 1)
        if s < 1:
            raise NotATree("seed must have at least one vertex")
        if verts and (min(verts) < 0 or max(verts) >= s):
            raise NotATree(f"edge labels must lie in 0..{s - 1}")
        if len(edges) != s - 1:
            raise NotATree(f"a tree on {s} vertices needs {s - 1} edges, got {len(edges)}")

        # orient toward vertex 0 with a BFS; detects cycles/disconnection
        adj: list[list[int]] = [[] for _ in range(s)]
        for a, b in edges:
            if a == b:
                raise NotATree(f"self loop at vertex {a}")
            adj[a].append(b)
            adj[b].append(a)
        parent = np.full(s, -1, dtype=np.int32)
        depth = np.zeros(s, dtype=np.int32)
        seen = [False] * s
        seen[0] = True
        queue = [0]
        order = []
        while queue:
            v = queue.pop()
            order.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    parent[u] = v
                    depth[u] = depth[v] + 1
                    queue.append(u)
        if not all(seen):
            raise NotATree("edge list is not connected")

        by_depth = np.array(
            sorted((v for v in range(s) if v != 0), key=lambda v: -int(depth[v])),
            dtype=np.int32,
        )
        ep = np.array([v for e in edges for v in e], dtype=np.int32)
        return SeedTree(edges, s, _freeze(parent), _freeze(by_depth), _freeze(ep))

    @property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.size, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


_SEED_PATTERNS = {
    "star": re.compile(r"^star\((\d+)\)$"),
    "path": re.compile(r"^path\((\d+)\)$"),
}

SeedSpec = Union[str, Iterable[Sequence[int]], SeedTree]


def make_seed(spec: SeedSpec) -> SeedTree:
    """Build a seed tree from ``"S2"``, ``"star(k)"``, ``"path(k)"``, or an
    explicit edge list.

    Raises :class:`NotATree` if an edge list is disconnected or cyclic,
    and ``ValueError`` for malformed string specs or ``k < 2``.
    """
    if isinstance(spec, SeedTree):
        return spec
    if isinstance(spec, str):
        text = spec.strip()
        if text == "S2":
            return SeedTree.from_edges([(0, 1)])
        m = _SEED_PATTERNS["star"].match(text)
        if m:
            k = int(m.group(1))
            if k < 2:
                raise ValueError("star(k) requires k >= 2")
            return SeedTree.from_edges([(0, i) for i in range(1, k)])
        m = _SEED_PATTERNS["path"].match(text)
        if m:
            k = int(m.group(1))
            if k < 2:
                raise ValueError("path(k) requires k >= 2")
            return SeedTree.from_edges([(i, i + 1) for i in range(k - 1)])
        raise ValueError(f"unrecognized seed spec {spec!r}")
    return SeedTree.from_edges(spec)


@dataclass(frozen=True)
class GrowingTree:
    """Immutable snapshot of a recursively grown tree.

    ``parent`` is the full oriented array (``parent[0] == -1``); ``degree``
    is cached at construction.  Instances are safe to share across threads.
    """

    n: int
    seed: SeedTree
    rule: GrowthRule
    parent: np.ndarray = field(repr=False)
    degree: np.ndarray = field(repr=False)

    @property
    def seed_size(self) -> int:
        return self.seed.size

    def edges(self) -> Iterator[tuple[int, int]]:
        for v in range(1, self.n):
            yield int(self.parent[v]), v


@dataclass(frozen=True)
class CorrelatedPair:
    """Two trees grown together until ``t_star``, independently after."""

    t1: GrowingTree
    t2: GrowingTree
    t_star: int

    @property
    def n(self) -> int:
        return self.t1.n

    @property
    def seed_size(self) -> int:
        return self.t1.seed_size


def _degrees_from_parent(parent: np.ndarray, n: int) -> np.ndarray:
    deg = np.bincount(parent[1:n].astype(np.int64), minlength=n)
    deg[1:] += 1
    return deg.astype(np.int32)


def _as_tree(seed: SeedTree, rule: GrowthRule, parent_row: np.ndarray) -> GrowingTree:
    n = parent_row.shape[0]
    parent = _freeze(np.ascontiguousarray(parent_row, dtype=np.int32))
    return GrowingTree(n, seed, rule, parent, _freeze(_degrees_from_parent(parent, n)))


def grow(seed: SeedSpec, rule: GrowthRule, n: int, rng: RngSpec) -> GrowingTree:
    """Grow one tree to ``n`` vertices.

    Deterministic given ``rng``; raises :class:`InvalidSize` if ``n`` is
    smaller than the seed, and :class:`NotATree` for PA on a single-vertex
    seed (degrees are undefined there).
    """
    from . import batch

    seed = make_seed(seed)
    if n < seed.size:
        raise InvalidSize(f"n={n} is smaller than the seed ({seed.size} vertices)")
    if rule is GrowthRule.PA and seed.size < 2:
        raise NotATree("PA needs a seed with at least two vertices")
    parents = batch.grow_parents_batch(seed, rule, n, [rng])
    return _as_tree(seed, rule, parents[0])


def grow_correlated(
    seed: SeedSpec, rule: GrowthRule, n: int, t_star: int, rng: RngSpec
) -> CorrelatedPair:
    """Grow a correlated pair: identical history up to ``t_star``, then two
    independent continuations on substreams 1 and 2 of ``rng``."""
    from . import batch

    seed = make_seed(seed)
    if not seed.size <= t_star <= n:
        raise InvalidTStar(f"t_star={t_star} outside [{seed.size}, {n}]")
    if rule is GrowthRule.PA and seed.size < 2:
        raise NotATree("PA needs a seed with at least two vertices")
    p1, p2 = batch.correlated_parents_batch(seed, rule, n, t_star, [rng])
    return CorrelatedPair(_as_tree(seed, rule, p1[0]), _as_tree(seed, rule, p2[0]), t_star)


def timestamp(t: GrowingTree, v: int) -> int:
    """Arrival time of ``v``: the tree size when ``v`` first appeared.
    All seed vertices report the seed size."""
    if not 0 <= v < t.n:
        raise IndexError(f"vertex {v} out of range for n={t.n}")
    return max(v + 1, t.seed_size)


# ---------------------------------------------------------------------------
# Tree file format (text, line based):
#   line 1: "n seed_size rule"
#   line 2: seed edges as "a-b" pairs, space separated (empty if none)
#   line 3: parents of vertices seed_size..n-1, space separated (empty if none)
# ---------------------------------------------------------------------------

def save_tree(t: GrowingTree, path: str | Path) -> None:
    Path(path).write_text(format_tree(t), encoding="ascii")


def format_tree(t: GrowingTree) -> str:
    line1 = f"{t.n} {t.seed_size} {t.rule.value}"
    line2 = " ".join(f"{a}-{b}" for a, b in t.seed.edges)
    line3 = " ".join(str(int(p)) for p in t.parent[t.seed_size:])
    return f"{line1}\n{line2}\n{line3}\n"


def load_tree(path: str | Path) -> GrowingTree:
    return parse_tree(Path(path).read_text(encoding="ascii"))


def parse_tree(text: str) -> GrowingTree:
    lines = text.splitlines()
    if len(lines) < 3:
        raise ValueError("tree file needs three lines")
    n_str, s_str, rule_str = lines[0].split()
    n, s = int(n_str), int(s_str)
    rule = GrowthRule(rule_str)
    edges = []
    if lines[1].strip():
        for token in lines[1].split():
            a, b = token.split("-")
            edges.append((int(a), int(b)))
    seed = SeedTree.from_edges(edges, size=s)
    parent = np.empty(n, dtype=np.int32)
    parent[:s] = seed.parent_to_root
    grown = [int(tok) for tok in lines[2].split()] if lines[2].strip() else []
    if len(grown) != n - s:
        raise ValueError(f"expected {n - s} grown parents, got {len(grown)}")
    parent[s:] = grown
    for v in range(s, n):
        if not 0 <= parent[v] < v:
            raise NotATree(f"parent[{v}]={parent[v]} violates arrival order")
    return _as_tree(seed, rule, parent)


# ---------------------------------------------------------------------------
# Exact enumeration of attachment sequences (test oracle; small n only).
# ---------------------------------------------------------------------------

def enumerate_attachments(
    seed: SeedSpec, rule: GrowthRule, n: int
) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Yield every attainable grown-parent sequence with its exact
    probability (as a :class:`~fractions.Fraction`).  Probabilities sum
    to 1; intended for small ``n`` (the number of sequences is
    ``s * (s+1) * ... * (n-1)``)."""
    seed = make_seed(seed)
    s = seed.size
    if n < s:
        raise InvalidSize(f"n={n} is smaller than the seed ({s} vertices)")
    if rule is GrowthRule.PA and s < 2:
        raise NotATree("PA needs a seed with at least two vertices")

    deg0 = [int(d) for d in seed.degrees]

    def rec(t: int, chosen: list[int], deg: list[int], prob: Fraction):
        if t == n:
            yield tuple(chosen), prob
            return
        total = 2 * (t - 1)
        for target in range(t):
            if rule is GrowthRule.UA:
                p = Fraction(1, t)
            else:
                if deg[target] == 0:
                    continue
                p = Fraction(deg[target], total)
            deg[target] += 1
            deg.append(1)
            chosen.append(target)
            yield from rec(t + 1, chosen, deg, prob * p)
            chosen.pop()
            deg.pop()
            deg[target] -= 1

    yield from rec(s, [], deg0, Fraction(1))
