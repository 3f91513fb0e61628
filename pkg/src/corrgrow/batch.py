"""Vectorized Monte Carlo engine: many trees grown in lockstep.

A single recursively grown tree is an inherently sequential object, but a
*batch* of independent trials is not: at growth step ``t`` every trial adds
its vertex ``t`` simultaneously, so the per-step work becomes numpy
operations on arrays of width ``T`` (the number of trials in the chunk).
All heavy experiment drivers in this package are built on this module.

Layout conventions
------------------
* ``parents`` matrices have shape ``(T, n)`` (int32): row = trial, column =
  vertex, oriented toward vertex 0 with ``parents[:, 0] == -1``.  Columns
  ``0..s-1`` replicate the seed orientation and are identical across rows.
* Each trial consumes exactly one uniform double per growth step from its
  own keyed stream, in vertex order.  Growing trial ``i`` alone via
  :func:`corrgrow.tree_core.grow` with the same :class:`RngSpec` yields a
  bit-identical parent row; the test suite pins this equivalence.
* UA growth vectorizes fully (the attachment target at step ``t`` is a
  uniform label in ``[0, t)``, independent of tree shape).  PA growth keeps
  one append-only edge-endpoint array per trial (shape ``(T, 2(n-1))``) and
  loops over steps, each step a handful of width-``T`` gathers/scatters.

Subtree-size accumulation processes columns ``n-1 .. s`` in decreasing
order (valid because grown vertices only attach to earlier vertices) and
then folds the seed columns in decreasing-depth order.  Within one column
every row is touched exactly once, so plain fancy-indexed ``+=`` is safe.

Chunk width is a cache/dispatch trade-off (see :func:`default_chunk`).
Trials are deterministic functions of their stream key, so chunked and
threaded execution reduces to the same numbers in the same order; note
that the column scans hold the GIL, so thread scaling is modest and
threads exist mainly so schedule independence is an exercised guarantee.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .rng import RngSpec
from .tree_core import GrowthRule, SeedTree

_R = TypeVar("_R")

_CHUNK_SLOTS = 2_500_000


def resolve_threads(threads: int | None) -> int:
    """Explicit argument, else CORRGROW_THREADS, else available parallelism."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CORRGROW_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def default_chunk(n: int) -> int:
    """Trials per chunk.  Tuned so the per-chunk int32 matrices stay around
    10 MB: wider chunks fall out of cache during the column scans and get
    slower per trial, narrower ones pay the per-column dispatch overhead."""
    return int(np.clip(_CHUNK_SLOTS // max(1, n), 64, 4096))


def map_trials(
    worker: Callable[[int, int], _R],
    n_trials: int,
    chunk: int,
    threads: int | None = None,
) -> list[_R]:
    """Run ``worker(lo, hi)`` over trial ranges, in order.

    Results are returned in range order regardless of scheduling; workers
    must derive all randomness from trial indices.
    """
    spans = [(lo, min(lo + chunk, n_trials)) for lo in range(0, n_trials, chunk)]
    k = resolve_threads(threads)
    if k <= 1 or len(spans) <= 1:
        return [worker(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=min(k, len(spans))) as pool:
        return list(pool.map(lambda span: worker(*span), spans))


def trial_specs(base: RngSpec, lo: int, hi: int) -> list[RngSpec]:
    return [base.substream(i) for i in range(lo, hi)]


def _uniform_rows(specs: Sequence[RngSpec], cols: int) -> np.ndarray:
    """(T, cols) doubles; row i drawn from specs[i] in one call."""
    out = np.empty((len(specs), cols), dtype=np.float64)
    for i, spec in enumerate(specs):
        out[i] = spec.generator().random(cols)
    return out


def _seeded_parents(seed: SeedTree, n: int, rows: int) -> np.ndarray:
    parents = np.empty((rows, n), dtype=np.int32)
    parents[:, : seed.size] = seed.parent_to_root
    return parents


def _ua_fill(parents: np.ndarray, u: np.ndarray, lo: int) -> None:
    """Fill columns lo..n-1 with UA targets floor(u * t), clamped to t-1
    (guards the 2^-53 rounding corner where u*t could round up to t)."""
    n = parents.shape[1]
    t_vals = np.arange(lo, n, dtype=np.float64)
    idx = (u * t_vals).astype(np.int32)
    np.minimum(idx, np.arange(lo, n, dtype=np.int32) - 1, out=idx)
    parents[:, lo:] = idx


def _endpoints_from(parents: np.ndarray, upto: int, n: int) -> np.ndarray:
    """Reconstruct PA endpoint state for trees truncated at ``upto`` vertices,
    with capacity for growth to ``n``.  Order: seed edges as listed, then
    one (target, child) pair per growth step."""
    T = parents.shape[0]
    ep = np.empty((T, 2 * (n - 1)), dtype=np.int32)
    cols = np.arange(1, upto, dtype=np.int64)
    ep[:, 2 * cols - 2] = parents[:, 1:upto]
    ep[:, 2 * cols - 1] = cols.astype(np.int32)
    return ep


def _pa_fill(parents: np.ndarray, ep: np.ndarray, u: np.ndarray, lo: int) -> None:
    n = parents.shape[1]
    rows = np.arange(parents.shape[0])
    for t in range(lo, n):
        m = 2 * (t - 1)
        idx = (u[:, t - lo] * m).astype(np.int64)
        np.minimum(idx, m - 1, out=idx)
        target = ep[rows, idx]
        parents[:, t] = target
        ep[:, m] = target
        ep[:, m + 1] = t
    return


def grow_parents_batch(
    seed: SeedTree, rule: GrowthRule, n: int, specs: Sequence[RngSpec]
) -> np.ndarray:
    """Grow ``len(specs)`` independent trees; returns (T, n) parents."""
    parents = _seeded_parents(seed, n, len(specs))
    s = seed.size
    if n == s:
        return parents
    u = _uniform_rows(specs, n - s)
    if rule is GrowthRule.UA:
        _ua_fill(parents, u, s)
    else:
        ep = _endpoints_from(parents, s, n)
        _pa_fill(parents, ep, u, s)
    return parents


def extend_parents_batch(
    prefix: np.ndarray, seed: SeedTree, rule: GrowthRule, n: int,
    specs: Sequence[RngSpec],
) -> np.ndarray:
    """Continue trees given as a (T, t0) parents matrix up to ``n`` vertices."""
    T, t0 = prefix.shape
    parents = np.empty((T, n), dtype=np.int32)
    parents[:, :t0] = prefix
    if n == t0:
        return parents
    u = _uniform_rows(specs, n - t0)
    if rule is GrowthRule.UA:
        _ua_fill(parents, u, t0)
    else:
        ep = _endpoints_from(parents, t0, n)
        _pa_fill(parents, ep, u, t0)
    return parents


def correlated_parents_batch(
    seed: SeedTree, rule: GrowthRule, n: int, t_star: int,
    specs: Sequence[RngSpec],
) -> tuple[np.ndarray, np.ndarray]:
    """Grow correlated pairs: shared prefix on substream 0 of each trial
    spec, then two independent continuations on substreams 1 and 2."""
    prefix = grow_parents_batch(seed, rule, t_star, [sp.substream(0) for sp in specs])
    p1 = extend_parents_batch(prefix, seed, rule, n, [sp.substream(1) for sp in specs])
    p2 = extend_parents_batch(prefix, seed, rule, n, [sp.substream(2) for sp in specs])
    return p1, p2


# ---------------------------------------------------------------------------
# Statistics on parents matrices
# ---------------------------------------------------------------------------

def subtree_sizes_batch(parents: np.ndarray, seed: SeedTree) -> np.ndarray:
    """Subtree sizes under rooting at vertex 0, per trial: sz[i, v] counts
    v and everything below it; sz[i, 0] == n."""
    T, n = parents.shape
    s = seed.size
    sz = np.ones((T, n), dtype=np.int32)
    rows = np.arange(T)
    for v in range(n - 1, s - 1, -1):
        sz[rows, parents[:, v]] += sz[:, v]
    for v in seed.accum_order:
        sz[:, int(seed.parent_to_root[v])] += sz[:, int(v)]
    return sz


def degrees_batch(parents: np.ndarray) -> np.ndarray:
    T, n = parents.shape
    flat = parents[:, 1:].astype(np.int64) + (np.arange(T, dtype=np.int64) * n)[:, None]
    deg = np.bincount(flat.ravel(), minlength=T * n).reshape(T, n)
    deg[:, 1:] += 1
    return deg.astype(np.int32)


def max_degree_batch(parents: np.ndarray) -> np.ndarray:
    return degrees_batch(parents).max(axis=1)


def h_statistic_batch(sizes: np.ndarray) -> np.ndarray:
    """Balancedness statistic per trial: sum over edges of
    (below * above)^2 / n^4, where the edge above vertex v splits the
    tree into sz[v] and n - sz[v]."""
    T, n = sizes.shape
    x = sizes[:, 1:].astype(np.float64)
    prod = x * (n - x)
    return (prod * prod).sum(axis=1) / float(n) ** 4


def psi_all_batch(parents: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Anti-centrality of every vertex, per trial: the largest pendent
    subtree is either the biggest child subtree or the upward remainder
    n - sz[v]."""
    T, n = parents.shape
    rows = np.arange(T)
    child_max = np.zeros((T, n), dtype=np.int32)
    for v in range(1, n):
        tgt = parents[:, v]
        child_max[rows, tgt] = np.maximum(child_max[rows, tgt], sizes[:, v])
    psi = np.maximum(child_max, np.int32(n) - sizes)
    psi[:, 0] = child_max[:, 0]
    return psi


def centroid_psi_batch(
    parents: np.ndarray, sizes: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(psi, canonical centroid index) per trial; argmin takes the first
    (= smallest arrival index) minimizer."""
    psi = psi_all_batch(parents, sizes)
    return psi.min(axis=1), psi.argmin(axis=1)


def centroid_scan_batch(
    parents: np.ndarray, seed: SeedTree
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fused single scan for the centroid path: returns
    (sizes, centroid psi, canonical centroid index) per trial.

    Folds the child-max update into the subtree-size accumulation so the
    column loop runs once instead of twice; when a column is processed its
    size is final, so the parent's child-max update sees the right value.
    """
    T, n = parents.shape
    s = seed.size
    sz = np.ones((T, n), dtype=np.int32)
    cm = np.zeros((T, n), dtype=np.int32)
    rows = np.arange(T)
    for v in range(n - 1, s - 1, -1):
        tgt = parents[:, v]
        below = sz[:, v]
        sz[rows, tgt] += below
        cm[rows, tgt] = np.maximum(cm[rows, tgt], below)
    for v in seed.accum_order:
        p = int(seed.parent_to_root[v])
        sz[:, p] += sz[:, int(v)]
        np.maximum(cm[:, p], sz[:, int(v)], out=cm[:, p])
    psi = np.maximum(cm, np.int32(n) - sz)
    psi[:, 0] = cm[:, 0]
    return sz, psi.min(axis=1), psi.argmin(axis=1)
