"""Pure-function tree statistics.

Everything here is a deterministic O(n) function of an immutable
:class:`~corrgrow.tree_core.GrowingTree`; nothing is cached across calls.
Ties are always broken by (value, then arrival index) so results are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotAnEdge
from .tree_core import GrowingTree


@dataclass(frozen=True)
class CentroidResult:
    """All minimizers of anti-centrality (a tree has at most two), their
    common value, and the canonical choice (smallest arrival index)."""

    vertices: tuple[int, ...]
    psi: int
    canonical: int


@dataclass(frozen=True)
class RankedSubtree:
    """Rank-k pendent subtree of the canonical centroid."""

    rank: int
    root: int
    size: int


def max_degree(t: GrowingTree) -> int:
    return int(t.degree.max())


def root_subtree_sizes(t: GrowingTree) -> np.ndarray:
    """Subtree sizes under the internal rooting at vertex 0."""
    n = t.n
    sz = np.ones(n, dtype=np.int64)
    parent = t.parent
    for v in range(n - 1, t.seed_size - 1, -1):
        sz[parent[v]] += sz[v]
    for v in t.seed.accum_order:
        sz[t.seed.parent_to_root[v]] += sz[v]
    return sz


def subtree_sizes(t: GrowingTree, root: int) -> np.ndarray:
    """Sizes of the subtrees of the tree rooted at ``root``: sz[u] counts
    u and every vertex whose path to ``root`` passes through u, with
    sz[root] = n.  One BFS plus one reverse accumulation."""
    n = t.n
    if not 0 <= root < n:
        raise IndexError(f"root {root} out of range for n={n}")
    adj = _adjacency(t)
    order = np.empty(n, dtype=np.int64)
    up = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[root] = True
    order[0] = root
    head, tail = 0, 1
    while head < tail:
        v = int(order[head])
        head += 1
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                up[u] = v
                order[tail] = u
                tail += 1
    sz = np.ones(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        v = int(order[i])
        sz[up[v]] += sz[v]
    return sz


def _adjacency(t: GrowingTree) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(t.n)]
    for a, b in t.edges():
        adj[a].append(b)
        adj[b].append(a)
    return adj


def anti_centrality(t: GrowingTree, v: int) -> int:
    """Size of the largest pendent subtree of ``v``."""
    if t.n < 2:
        raise ValueError("anti-centrality needs at least two vertices")
    sz = subtree_sizes(t, v)
    return int(max(sz[u] for u in _adjacency(t)[v]))


def anti_centrality_all(t: GrowingTree) -> np.ndarray:
    """Anti-centrality of every vertex in one O(n) rerooting pass:
    the largest pendent subtree of v is either its biggest child subtree
    (under the rooting at 0) or the upward remainder n - sz[v]."""
    n = t.n
    sz = root_subtree_sizes(t)
    child_max = np.zeros(n, dtype=np.int64)
    if n > 1:
        np.maximum.at(child_max, t.parent[1:], sz[1:])
    psi = np.maximum(child_max, n - sz)
    psi[0] = child_max[0]
    return psi


def centroid(t: GrowingTree) -> CentroidResult:
    if t.n == 1:
        return CentroidResult((0,), 0, 0)
    psi = anti_centrality_all(t)
    best = int(psi.min())
    verts = tuple(int(v) for v in np.flatnonzero(psi == best))
    return CentroidResult(verts, best, verts[0])


def h_edge(t: GrowingTree, e: tuple[int, int]) -> float:
    """Balancedness weight of one edge: (|T'| |T''|)^2 / n^4 where T', T''
    are the components after removing the edge.  Lies in (0, 1/16]."""
    a, b = int(e[0]), int(e[1])
    n = t.n
    if 0 <= a < n and 0 <= b < n and t.parent[a] == b:
        child = a
    elif 0 <= a < n and 0 <= b < n and t.parent[b] == a:
        child = b
    else:
        raise NotAnEdge(f"({a}, {b}) is not an edge of the tree")
    below = int(root_subtree_sizes(t)[child])
    return (below * (n - below)) ** 2 / float(n) ** 4


def H_statistic(t: GrowingTree) -> float:
    """Sum of h_edge over all n-1 edges, in one rooting pass."""
    n = t.n
    if n < 2:
        raise ValueError("H needs at least one edge")
    x = root_subtree_sizes(t)[1:].astype(np.float64)
    prod = x * (n - x)
    return float((prod * prod).sum() / float(n) ** 4)


def ranked_pendent_subtrees(t: GrowingTree) -> list[RankedSubtree]:
    """Pendent subtrees of the canonical centroid, sorted by size
    descending with ties broken by root arrival index."""
    if t.n < 2:
        raise ValueError("needs at least two vertices")
    c = centroid(t).canonical
    sz = root_subtree_sizes(t)
    entries: list[tuple[int, int]] = []
    for u in np.flatnonzero(t.parent == c):
        entries.append((int(sz[u]), int(u)))
    if c != 0:
        entries.append((t.n - int(sz[c]), int(t.parent[c])))
    entries.sort(key=lambda it: (-it[0], it[1]))
    return [RankedSubtree(rank=i + 1, root=u, size=s) for i, (s, u) in enumerate(entries)]


def f_min_anticentrality(t: GrowingTree) -> float:
    """Normalized minimum anti-centrality, in (0, 1/2]."""
    if t.n < 2:
        raise ValueError("needs at least two vertices")
    return centroid(t).psi / t.n
