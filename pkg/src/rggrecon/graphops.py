"""Adjacency-only combinatorial primitives.

BFS hop counts, common/exclusive neighbor counts, two-hop neighborhood sizes
and the derived deep/shallow classification.  Everything operates on the CSR
arrays of a GraphInstance and never touches positions, except greedy_path,
which is a ground-truth diagnostic by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._arrays import concat_rows, iter_row_blocks, take_chunked
from .config import Constants
from .errors import ParameterError
from .generate import GraphInstance
from .geometry import geodesic_distance

UNREACHABLE = -1

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)

# full-matrix bitset classification is quadratic in memory; beyond this size
# fall back to the per-vertex mark-array path
_BITSET_MAX_N = 40_000


def bfs(graph: GraphInstance, source: int) -> np.ndarray:
    """Exact hop counts from source; UNREACHABLE (-1) where disconnected."""
    n = graph.n
    if not (0 <= source < n):
        raise ParameterError(f"source {source} out of range")
    dist = np.full(n, UNREACHABLE, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        for block in iter_row_blocks(graph.indptr, frontier):
            cat, _ = concat_rows(graph.indptr, graph.indices, block)
            fresh = cat[take_chunked(dist, cat) == UNREACHABLE]
            dist[fresh] = level
        frontier = np.flatnonzero(dist == level)
    return dist


def common_neighbors(graph: GraphInstance, v: int, w: int) -> int:
    """|N(v) ∩ N(w)|, excluding v and w themselves."""
    if v == w:
        raise ParameterError("common_neighbors requires two distinct vertices")
    a, b = graph.neighbors(v), graph.neighbors(w)
    if a.size > b.size:
        a, b = b, a
    pos = np.searchsorted(b, a)
    pos[pos == b.size] = 0
    return int(np.count_nonzero(b[pos] == a))


def exclusive_neighbors(graph: GraphInstance, v: int, w: int) -> int:
    """|N(v) \\ N(w)|; counts w itself whenever v and w are adjacent."""
    if v == w:
        raise ParameterError("exclusive_neighbors requires two distinct vertices")
    return int(graph.degrees[v]) - common_neighbors(graph, v, w)


def graph_distance(graph: GraphInstance, v: int, w: int, max_hops: int | None = None) -> int:
    """d_G(v, w) by truncated BFS; UNREACHABLE if no path (within max_hops)."""
    if v == w:
        return 0
    dist = np.full(graph.n, UNREACHABLE, dtype=np.int32)
    dist[v] = 0
    frontier = np.array([v], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        if max_hops is not None and level > max_hops:
            return UNREACHABLE
        for block in iter_row_blocks(graph.indptr, frontier):
            cat, _ = concat_rows(graph.indptr, graph.indices, block)
            fresh = cat[take_chunked(dist, cat) == UNREACHABLE]
            dist[fresh] = level
        if dist[w] == level:
            return level
        frontier = np.flatnonzero(dist == level)
    return UNREACHABLE


def two_hop_count_single(graph: GraphInstance, v: int) -> int:
    """|{w : d_G(v, w) <= 2, w != v}| via a mark array (exact)."""
    mark = np.zeros(graph.n, dtype=bool)
    nbrs = graph.neighbors(v)
    for block in iter_row_blocks(graph.indptr, nbrs):
        cat, _ = concat_rows(graph.indptr, graph.indices, block)
        mark[cat] = True
    mark[nbrs] = True
    mark[v] = False
    return int(np.count_nonzero(mark))


def two_hop_counts(graph: GraphInstance, vertices=None) -> np.ndarray:
    """Exact two-hop neighborhood sizes for all (or the given) vertices."""
    n = graph.n
    if vertices is None and n <= _BITSET_MAX_N:
        return _two_hop_counts_bitset(graph)
    verts = np.arange(n) if vertices is None else np.asarray(vertices, dtype=np.int64)
    out = np.empty(verts.size, dtype=np.int64)
    for k, v in enumerate(verts):
        out[k] = two_hop_count_single(graph, int(v))
    return out


def _two_hop_counts_bitset(graph: GraphInstance) -> np.ndarray:
    n = graph.n
    nbytes = (n + 7) // 8
    packed = np.zeros((n, nbytes), dtype=np.uint8)
    block = max(1, (1 << 26) // max(n, 1))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        dense = np.zeros((hi - lo, n), dtype=bool)
        for v in range(lo, hi):
            dense[v - lo, graph.neighbors(v)] = True
        packed[lo:hi] = np.packbits(dense, axis=1)
    out = np.empty(n, dtype=np.int64)
    for v in range(n):
        nbrs = graph.neighbors(v)
        if nbrs.size == 0:
            out[v] = 0
            continue
        acc = np.bitwise_or.reduce(packed[nbrs], axis=0)
        acc |= packed[v]
        # v itself is always inside the union once it has a neighbor
        out[v] = int(_POPCOUNT[acc].sum()) - 1
    return out


def deep_threshold(graph: GraphInstance, constants: Constants) -> float:
    """Two-hop-count threshold deep_factor * r**m for this instance."""
    return constants.deep_factor * graph.r ** graph.domain.m


@dataclass
class DeepLabels:
    """Deep/shallow classification: a topology-only proxy for interiority."""

    threshold: float
    is_deep: np.ndarray
    two_hop_count: np.ndarray

    def deep(self, v: int) -> bool:
        return bool(self.is_deep[v])

    @property
    def deep_fraction(self) -> float:
        return float(np.mean(self.is_deep))


class LazyDeepLabels:
    """Per-vertex deep checks computed on demand and cached.

    Same classification as classify_deep, without paying for the full graph;
    the reconstruction pipeline only ever inspects a handful of vertices.
    """

    def __init__(self, graph: GraphInstance, threshold: float):
        self.graph = graph
        self.threshold = threshold
        self._cache: dict[int, int] = {}

    def count(self, v: int) -> int:
        c = self._cache.get(v)
        if c is None:
            c = two_hop_count_single(self.graph, v)
            self._cache[v] = c
        return c

    def deep(self, v: int) -> bool:
        return self.count(v) >= self.threshold


class AllDeepLabels:
    """Every vertex treated as deep (spheres have no boundary)."""

    threshold = 0.0

    def deep(self, v: int) -> bool:
        return True


def classify_deep(graph: GraphInstance, constants: Constants | None = None) -> DeepLabels:
    """Exact two-hop counts and the deep classification for every vertex."""
    constants = constants or Constants()
    counts = two_hop_counts(graph)
    thr = deep_threshold(graph, constants)
    return DeepLabels(threshold=thr, is_deep=counts >= thr, two_hop_count=counts)


@dataclass
class GreedyResult:
    path: list
    reached: bool
    stuck_at: int | None


def greedy_path(graph: GraphInstance, truth, u: int, v: int) -> GreedyResult:
    """Greedy geographic walk from u toward v (ground-truth diagnostic).

    Each step moves to the neighbor geometrically closest to v, ties broken by
    lowest vertex id; stops at v or at a local minimum.
    """
    if truth.n_realized != graph.n:
        raise ParameterError("ground truth does not match the graph")
    domain = graph.domain
    target = truth.positions[v]
    path = [u]
    cur = u
    d_cur = float(geodesic_distance(truth.positions[u], target, domain))
    for _ in range(graph.n):
        if cur == v:
            return GreedyResult(path=path, reached=True, stuck_at=None)
        nbrs = graph.neighbors(cur)
        if nbrs.size == 0:
            return GreedyResult(path=path, reached=False, stuck_at=cur)
        dists = geodesic_distance(truth.positions[nbrs], target, domain)
        k = int(np.argmin(dists))  # first minimum = lowest id (rows sorted)
        if not (dists[k] < d_cur):
            return GreedyResult(path=path, reached=False, stuck_at=cur)
        cur = int(nbrs[k])
        d_cur = float(dists[k])
        path.append(cur)
    return GreedyResult(path=path, reached=cur == v, stuck_at=None if cur == v else cur)


def ceil_guarded(x: float) -> int:
    """Ceiling with a 1e-9 relative guard against float values that land
    infinitesimally above an integer."""
    return math.ceil(x - 1e-9 * max(1.0, x))
