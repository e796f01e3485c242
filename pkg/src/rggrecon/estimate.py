"""Distance estimators from adjacency only.

Three layers:

* short-range: invert the lune/lens measure of the neighborhood overlap for
  pairs at graph distance 1 or 2 (the reference vertex must be deep);
* long-range: bracket the Euclidean distance by r * d_G with an additive
  slack term;
* hybrid: minimize (graph-distance leg to w) + (short-range leg from w) over
  every intermediate w within two hops of the deep endpoint, giving an upper
  bound on the true distance with a much smaller envelope.

`hybrid` is the per-pair reference implementation (one BFS per call);
`hybrid_field` computes the same minimum against one deep vertex for all
sources at once and is what the reconstruction pipeline uses.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._arrays import concat_rows, iter_row_blocks, row_segment_min, take_chunked
from .config import Constants
from .errors import DeepRequired, NoPath, ParameterError, WrongRange
from .generate import GraphInstance
from .geometry import LuneKernel, lune_kernel
from .graphops import UNREACHABLE, bfs, common_neighbors, exclusive_neighbors

KIND_SHORT_LUNE = "short-lune"
KIND_SHORT_LENS = "short-lens"
KIND_LONG_GRAPH = "long-graph"
KIND_HYBRID = "hybrid"


@dataclass(frozen=True)
class DistanceEstimate:
    """A distance value with provenance and a claimed error envelope.

    Hybrid estimates claim the upper-bound contract: the true distance lies in
    [value - envelope, value] (validated statistically, not per instance).
    `vacuous` marks envelopes at densities where the guarantee degenerates
    (r <= 100 sqrt(log n)).
    """

    value: float
    kind: str
    envelope: float
    vacuous: bool = False


@dataclass(frozen=True)
class HopSlack:
    """Additive slack of the graph-distance upper bound.

    slack(d) = scale * r * (d / r**(7/3) + log(n) / r**(4/3)); nonnegative and
    nondecreasing in d.
    """

    scale: float
    r: float
    n: int

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        out = self.scale * self.r * (
            d / self.r ** (7.0 / 3.0) + math.log(self.n) / self.r ** (4.0 / 3.0)
        )
        return float(out) if out.ndim == 0 else out

    @classmethod
    def for_graph(cls, graph: GraphInstance, constants: Constants) -> "HopSlack":
        return cls(scale=constants.hop_slack_scale, r=graph.r, n=graph.domain.n)


def envelopes_vacuous(graph: GraphInstance) -> bool:
    """Short-range guarantees degenerate once r <= 100 sqrt(log n)."""
    return graph.r <= 100.0 * math.sqrt(math.log(graph.domain.n))


def envelope_profile(x, r: float, n: int):
    """Normalized error profile of the combined short-range estimator.

    Four branches over [0, 2r]; multiplied by 100 sqrt(log n) it bounds the
    short-range error at separation x.  The branches agree at the breakpoints.
    """
    logn = math.log(n)
    x = np.asarray(x, dtype=float)
    b1 = logn / r
    b3 = 2.0 * r - logn ** (2.0 / 3.0) / r ** (1.0 / 3.0)
    out = np.where(
        x <= b1,
        math.sqrt(logn) / r,
        np.where(
            x <= r,
            np.sqrt(np.maximum(x, 0.0) / r),
            np.where(
                x <= b3,
                np.maximum((2.0 * r - x) / r, 0.0) ** 0.25,
                logn ** (1.0 / 6.0) / r ** (1.0 / 3.0),
            ),
        ),
    )
    return float(out) if out.ndim == 0 else out


def _require_deep(labels, v: int) -> None:
    if not labels.deep(v):
        raise DeepRequired(f"vertex {v} is not deep")


def short_range_adjacent(graph: GraphInstance, labels, v: int, w: int,
                         constants: Constants | None = None,
                         kernel: LuneKernel | None = None) -> DistanceEstimate:
    """Lune estimate for an adjacent pair; v must be deep."""
    _require_deep(labels, v)
    if v == w:
        raise ParameterError("need two distinct vertices")
    if not graph.has_edge(v, w):
        raise WrongRange(f"{v} and {w} are not adjacent")
    kernel = kernel or lune_kernel(graph.domain, graph.r)
    count = exclusive_neighbors(graph, v, w)
    value = float(kernel.inverse(min(float(count), kernel.lune_at_r)))
    logn = math.log(graph.domain.n)
    env = 100.0 * max(logn / graph.r, math.sqrt(max(value, 0.0) * logn / graph.r))
    return DistanceEstimate(value=value, kind=KIND_SHORT_LUNE, envelope=env,
                            vacuous=envelopes_vacuous(graph))


def short_range_two_apart(graph: GraphInstance, labels, v: int, w: int,
                          constants: Constants | None = None,
                          kernel: LuneKernel | None = None) -> DistanceEstimate:
    """Lens estimate for a pair at graph distance 2; v must be deep."""
    _require_deep(labels, v)
    if v == w:
        raise ParameterError("need two distinct vertices")
    common = common_neighbors(graph, v, w)
    if graph.has_edge(v, w) or common == 0:
        raise WrongRange(f"{v} and {w} are not at graph distance 2")
    kernel = kernel or lune_kernel(graph.domain, graph.r)
    value = float(kernel.inverse(max(kernel.lune_at_r, kernel.ball - float(common))))
    logn = math.log(graph.domain.n)
    r = graph.r
    env = 100.0 * max(
        logn ** (2.0 / 3.0) / r ** (1.0 / 3.0),
        (max(2.0 * r - value, 0.0) / r) ** 0.25 * math.sqrt(logn),
    )
    return DistanceEstimate(value=value, kind=KIND_SHORT_LENS, envelope=env,
                            vacuous=envelopes_vacuous(graph))


def short_range(graph: GraphInstance, labels, v: int, w: int,
                constants: Constants | None = None,
                kernel: LuneKernel | None = None) -> DistanceEstimate:
    """Short-range estimate for pairs within two hops, with the combined
    four-branch envelope profile."""
    if v == w:
        raise ParameterError("need two distinct vertices")
    _require_deep(labels, v)
    kernel = kernel or lune_kernel(graph.domain, graph.r)
    if graph.has_edge(v, w):
        est = short_range_adjacent(graph, labels, v, w, constants, kernel)
    elif common_neighbors(graph, v, w) > 0:
        est = short_range_two_apart(graph, labels, v, w, constants, kernel)
    else:
        raise WrongRange(f"{v} and {w} are more than two hops apart")
    n = graph.domain.n
    env = 100.0 * float(envelope_profile(est.value, graph.r, n)) * math.sqrt(math.log(n))
    return DistanceEstimate(value=est.value, kind=est.kind, envelope=env,
                            vacuous=est.vacuous)


def long_range_bounds(hops, r: float, slack: HopSlack):
    """Vectorized (lower, upper) Euclidean bounds from hop counts."""
    hops = np.asarray(hops, dtype=float)
    upper = r * hops
    lower = np.maximum(0.0, upper - (r + slack(upper)))
    return lower, upper


def long_range(graph: GraphInstance, u: int, v: int, slack: HopSlack | None = None,
               constants: Constants | None = None):
    """Bracket the Euclidean distance of any connected pair by hop counts."""
    slack = slack or HopSlack.for_graph(graph, constants or Constants())
    if u == v:
        return 0.0, 0.0
    hops = bfs(graph, u)[v]
    if hops == UNREACHABLE:
        raise NoPath(f"{u} and {v} are not connected")
    lower, upper = long_range_bounds(float(hops), graph.r, slack)
    return float(lower), float(upper)


# ---------------------------------------------------------------------------
# hybrid estimates


def short_leg_values(graph: GraphInstance, v: int, constants: Constants,
                     kernel: LuneKernel | None = None):
    """Intermediate-hop shell of a deep vertex and its short-leg costs.

    Returns (members, cost) where members lists every w with d_G(w, v) <= 2
    (ascending, v included) and cost[w] = short-range estimate of |w - v| plus
    the short_range_pad * sqrt(log n) upper-bound pad (zero-distance case
    included: cost at w = v is just the pad).
    """
    kernel = kernel or lune_kernel(graph.domain, graph.r)
    n = graph.n
    nbrs = graph.neighbors(v)
    near = np.zeros(n, dtype=bool)
    near[v] = True
    near[nbrs] = True
    reach = near.copy()
    for block in iter_row_blocks(graph.indptr, nbrs):
        cat, _ = concat_rows(graph.indptr, graph.indices, block)
        reach[cat] = True
    members = np.flatnonzero(reach)

    # common-neighbor counts with v for every member, in one pass
    counts = np.empty(members.size, dtype=np.int64)
    k0 = 0
    for block in iter_row_blocks(graph.indptr, members):
        cat, offs = concat_rows(graph.indptr, graph.indices, block)
        hits = near[cat] & (cat != v)
        k1 = k0 + block.size
        counts[k0:k1] = np.add.reduceat(hits.astype(np.int64), np.minimum(offs[:-1], max(cat.size - 1, 0))) \
            if cat.size else 0
        counts[k0:k1][offs[:-1] == offs[1:]] = 0
        k0 = k1

    is_self = members == v
    is_adj = near[members] & ~is_self
    two = ~near[members]
    lune_counts = float(graph.degrees[v]) - counts[is_adj]
    est = np.zeros(members.size, dtype=float)
    est[is_adj] = kernel.inverse(np.minimum(lune_counts, kernel.lune_at_r))
    est[two] = kernel.inverse(np.maximum(kernel.lune_at_r, kernel.ball - counts[two]))
    pad = constants.short_range_pad * math.sqrt(math.log(graph.domain.n))
    return members, est + pad


def hybrid(graph: GraphInstance, labels, u: int, v: int,
           slack: HopSlack | None = None, constants: Constants | None = None,
           kernel: LuneKernel | None = None) -> DistanceEstimate:
    """Hybrid upper-bound estimate of the distance from u to deep v.

    Minimizes r*d_G(u, w) + short_leg(w, v) over every w within two hops of v
    (w = v and w = u included); ties broken by the smallest w.  One BFS from u
    per call; use hybrid_field for all-u evaluation.
    """
    constants = constants or Constants()
    _require_deep(labels, v)
    if u == v:
        raise ParameterError("hybrid estimate needs two distinct vertices")
    slack = slack or HopSlack.for_graph(graph, constants)
    members, cost = short_leg_values(graph, v, constants, kernel)
    hops = bfs(graph, u)[members]
    ok = hops != UNREACHABLE
    if not np.any(ok):
        raise NoPath(f"{u} cannot reach the two-hop shell of {v}")
    cand = graph.r * hops[ok].astype(float) + cost[ok]
    k = int(np.argmin(cand))  # first minimum = smallest member id
    value = float(cand[k])
    env = float(slack(value)) + constants.envelope_pad * math.sqrt(math.log(graph.domain.n))
    return DistanceEstimate(value=value, kind=KIND_HYBRID, envelope=env,
                            vacuous=envelopes_vacuous(graph))


@dataclass
class HybridField:
    """d-hat(u, v) against one deep vertex v, for every source u at once."""

    v: int
    values: np.ndarray     # inf where unreachable; 0 at u = v by convention
    envelopes: np.ndarray
    vacuous: bool


def hybrid_field(graph: GraphInstance, labels, v: int,
                 slack: HopSlack | None = None, constants: Constants | None = None,
                 kernel: LuneKernel | None = None) -> HybridField:
    """Hybrid estimates to deep v from every vertex, by min-plus relaxation.

    The minimum over intermediates w of r*d_G(u, w) + short_leg(w, v) is the
    fixed point of val(u) = min(seed(u), r + min over neighbors), seeded with
    the short-leg costs on the two-hop shell of v.  Label-correcting from a
    tight warm start converges in a few sweeps.
    """
    constants = constants or Constants()
    _require_deep(labels, v)
    slack = slack or HopSlack.for_graph(graph, constants)
    members, cost = short_leg_values(graph, v, constants, kernel)
    r = graph.r
    hops_v = bfs(graph, v)
    reachable = hops_v != UNREACHABLE
    hop_f = hops_v.astype(float)
    pad = cost[np.searchsorted(members, v)]
    val = np.where(reachable, r * (hop_f + 2.0) + float(cost.min()), np.inf)
    np.minimum(val, np.where(reachable, r * hop_f + pad, np.inf), out=val)
    val[members] = np.minimum(val[members], cost)
    _minplus_relax(graph, val, r)
    val[v] = 0.0
    env = slack(np.where(np.isfinite(val), val, 0.0)) + \
        constants.envelope_pad * math.sqrt(math.log(graph.domain.n))
    env = np.where(np.isfinite(val), env, np.inf)
    return HybridField(v=v, values=val, envelopes=env, vacuous=envelopes_vacuous(graph))


def _minplus_relax(graph: GraphInstance, val: np.ndarray, step: float) -> None:
    """Relax val (in place) to the fixed point val[u] = min(val[u],
    step + min over neighbors of val)."""
    n = graph.n
    indptr, indices = graph.indptr, graph.indices
    all_rows = np.arange(n, dtype=np.int64)
    scratch = np.empty(n, dtype=float)
    frontier = None  # None = full sweep
    while True:
        if frontier is None:
            targets = all_rows
        else:
            touched = np.zeros(n, dtype=bool)
            for block in iter_row_blocks(indptr, frontier):
                cat, _ = concat_rows(indptr, indices, block)
                touched[cat] = True
            targets = np.flatnonzero(touched)
            if targets.size == 0:
                return
        seg = scratch[: targets.size]
        row_segment_min(indptr, indices, targets, val, seg)
        cand = seg + step
        better = cand < val[targets]
        if not np.any(better):
            return
        changed = targets[better]
        val[changed] = cand[better]
        frontier = changed
