"""Point sampling and geometric-graph construction.

Positions are sampled with numpy's PCG64 generator (seeded, splittable); the
adjacency is built exactly (strict inequality on the geodesic distance) with a
spatial cell join whose expected cost is proportional to n + |E|.

Ground truth and topology are kept in separate objects and separate files so
reconstruction code physically cannot read positions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._arrays import counting_place, index_dtype
from .config import DomainSpec, ModelParams, POISSON, SPHERE
from .errors import FormatError, ParameterError

FORMAT_VERSION = 1

# Stop buffering candidate edge chunks past this many accepted pairs and
# recompute them in the placement pass instead (memory over CPU).
_BUFFER_EDGE_LIMIT = 120_000_000
_PAIR_CHUNK = 4_000_000


@dataclass(frozen=True)
class GroundTruth:
    """Sampled vertex positions; the part reconstruction never sees."""

    domain: DomainSpec
    positions: np.ndarray  # (n_realized, ndim) float64

    @property
    def n_realized(self) -> int:
        return self.positions.shape[0]


@dataclass
class GraphInstance:
    """Adjacency-only view of one geometric graph (CSR, rows sorted)."""

    domain: DomainSpec
    r: float
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray
    params: ModelParams | None = None
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.degrees.shape[0]

    @property
    def n_realized(self) -> int:
        return self.n

    @property
    def num_edges(self) -> int:
        return self.indices.size // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, v: int, w: int) -> bool:
        row = self.neighbors(v)
        k = np.searchsorted(row, w)
        return bool(k < row.size and row[k] == w)

    @classmethod
    def from_edges(cls, domain: DomainSpec, r: float, n: int, edges: np.ndarray) -> "GraphInstance":
        """Build CSR from an (E, 2) array of undirected edges."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise FormatError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise FormatError("self-loop in edge list")
        deg = np.bincount(edges[:, 0], minlength=n) + np.bincount(edges[:, 1], minlength=n)
        indptr = np.concatenate(([0], np.cumsum(deg, dtype=np.int64)))
        indices = np.empty(int(indptr[-1]), dtype=index_dtype(n))
        cursor = indptr[:-1].copy()
        counting_place(indices, cursor, edges[:, 0], edges[:, 1].astype(indices.dtype))
        counting_place(indices, cursor, edges[:, 1], edges[:, 0].astype(indices.dtype))
        for v in range(n):
            indices[indptr[v] : indptr[v + 1]].sort()
        return cls(domain=domain, r=float(r), indptr=indptr, indices=indices,
                   degrees=deg.astype(np.int64))


def sample_positions(domain: DomainSpec, model: ModelParams, seed: int) -> GroundTruth:
    """Draw vertex positions for one instance, deterministically from the seed.

    The seed feeds a SeedSequence split into one stream for the realized count
    (Poisson model) and one for coordinates, so either model draws identical
    coordinates for the same realized count.
    """
    model.validate_for(domain)
    count_ss, coord_ss = np.random.SeedSequence(seed).spawn(2)
    if model.point_process == POISSON:
        count = int(np.random.default_rng(count_ss).poisson(domain.n))
    else:
        count = domain.n
    rng = np.random.default_rng(coord_ss)
    if domain.kind == SPHERE:
        pos = rng.standard_normal((count, 3))
        norms = np.linalg.norm(pos, axis=1)
        while np.any(norms < 1e-300):
            bad = norms < 1e-300
            pos[bad] = rng.standard_normal((int(bad.sum()), 3))
            norms = np.linalg.norm(pos, axis=1)
        pos /= norms[:, None]
    else:
        pos = rng.random((count, domain.m)) * domain.side
    return GroundTruth(domain=domain, positions=pos)


def _grid_for(domain: DomainSpec, r: float, n: int):
    """Cell grid parameters: coordinates origin, extent, threshold, and cells
    per axis (capped so the cell count stays O(n))."""
    if domain.kind == SPHERE:
        # edge rule in chord space: geodesic < r  <=>  chord < 2 sin(r / 2R)
        thresh = 2.0 * math.sin(min(r / domain.sphere_radius, math.pi) / 2.0)
        lo, extent, ndim = -1.0, 2.0, 3
    else:
        thresh, lo, extent, ndim = r, 0.0, domain.side, domain.m
    per_axis = max(1, int(extent / thresh))
    cap = max(1, int(math.ceil((4.0 * max(n, 1)) ** (1.0 / ndim))))
    per_axis = min(per_axis, cap)
    return lo, extent, thresh, per_axis, ndim


def _cell_ids(coords, lo, extent, per_axis):
    cell_len = extent / per_axis
    idx = np.ceil((coords - lo) / cell_len).astype(np.int64) - 1
    np.clip(idx, 0, per_axis - 1, out=idx)
    ndim = coords.shape[1]
    strides = per_axis ** np.arange(ndim - 1, -1, -1, dtype=np.int64)
    return idx @ strides, idx, strides


def _forward_offsets(ndim: int):
    """The zero offset plus half of the 3^ndim - 1 neighbor offsets."""
    import itertools

    out = [np.zeros(ndim, dtype=np.int64)]
    for off in itertools.product((-1, 0, 1), repeat=ndim):
        nz = next((x for x in off if x != 0), 0)
        if nz > 0:
            out.append(np.array(off, dtype=np.int64))
    return out


def _candidate_edge_chunks(pos_sorted, order, cell_ptr, axis_idx_per_cell, strides,
                           per_axis, thresh):
    """Yield (i, j) chunks of accepted edges in original vertex ids."""
    t2 = thresh * thresh
    ndim = pos_sorted.shape[1]
    occupied = np.flatnonzero(np.diff(cell_ptr) > 0)
    multi = axis_idx_per_cell  # (ncells, ndim) precomputed multi-index table
    for off in _forward_offsets(ndim):
        same = bool(np.all(off == 0))
        if same:
            base = occupied
            nbr = occupied
        else:
            shifted = multi[occupied] + off
            ok = np.all((shifted >= 0) & (shifted < per_axis), axis=1)
            base = occupied[ok]
            nbr = shifted[ok] @ strides
            keep = cell_ptr[nbr + 1] > cell_ptr[nbr]
            base, nbr = base[keep], nbr[keep]
        for cb, cn in zip(base.tolist(), nbr.tolist()):
            a0, a1 = int(cell_ptr[cb]), int(cell_ptr[cb + 1])
            b0, b1 = int(cell_ptr[cn]), int(cell_ptr[cn + 1])
            kb = b1 - b0
            rows_per_block = max(1, _PAIR_CHUNK // max(kb, 1))
            for r0 in range(a0, a1, rows_per_block):
                r1 = min(r0 + rows_per_block, a1)
                d2 = np.zeros((r1 - r0, kb))
                for ax in range(ndim):
                    diff = pos_sorted[r0:r1, ax, None] - pos_sorted[None, b0:b1, ax]
                    d2 += diff * diff
                hit = d2 < t2
                if same:
                    # strict upper triangle of the within-cell block
                    cols = np.arange(b0, b1)
                    hit &= cols[None, :] > np.arange(r0, r1)[:, None]
                ai, bj = np.nonzero(hit)
                if ai.size:
                    yield order[ai + r0], order[bj + b0]


def build_adjacency(truth: GroundTruth, r: float, model: ModelParams | None = None,
                    seed: int | None = None) -> GraphInstance:
    """Exact adjacency under the strict-inequality edge rule, via cell lists."""
    domain = truth.domain
    if r <= 0 or r >= domain.max_radius():
        raise ParameterError(f"radius {r:g} invalid for the domain")
    pos = truth.positions
    n = pos.shape[0]
    lo, extent, thresh, per_axis, ndim = _grid_for(domain, r, n)
    cell_id, _, strides = _cell_ids(pos, lo, extent, per_axis)
    order = np.argsort(cell_id, kind="stable").astype(np.int64)
    pos_sorted = pos[order]
    counts = np.bincount(cell_id, minlength=per_axis**ndim)
    cell_ptr = np.concatenate(([0], np.cumsum(counts, dtype=np.int64)))
    ncells = per_axis**ndim
    multi = np.empty((ncells, ndim), dtype=np.int64)
    rem = np.arange(ncells, dtype=np.int64)
    for ax in range(ndim):
        multi[:, ax] = rem // strides[ax]
        rem = rem % strides[ax]

    def chunks():
        return _candidate_edge_chunks(pos_sorted, order, cell_ptr, multi, strides,
                                      per_axis, thresh)

    # pass 1: degrees, buffering chunks while they fit
    deg = np.zeros(n, dtype=np.int64)
    buffered: list | None = []
    total = 0
    for i_arr, j_arr in chunks():
        deg += np.bincount(i_arr, minlength=n)
        deg += np.bincount(j_arr, minlength=n)
        total += i_arr.size
        if buffered is not None:
            buffered.append((i_arr.astype(np.int32), j_arr.astype(np.int32)))
            if total > _BUFFER_EDGE_LIMIT:
                buffered = None

    indptr = np.concatenate(([0], np.cumsum(deg)))
    dtype = index_dtype(n)
    indices = np.empty(int(indptr[-1]), dtype=dtype)
    cursor = indptr[:-1].copy()
    source = buffered if buffered is not None else chunks()
    for i_arr, j_arr in source:
        counting_place(indices, cursor, i_arr, j_arr.astype(dtype))
        counting_place(indices, cursor, j_arr, i_arr.astype(dtype))
    for v in range(n):
        indices[indptr[v] : indptr[v + 1]].sort()
    return GraphInstance(domain=domain, r=float(r), indptr=indptr, indices=indices,
                         degrees=deg, params=model, seed=seed)


# ---------------------------------------------------------------------------
# file formats (versioned JSON; strict keys)


def write_graph_json(graph: GraphInstance, path: str) -> None:
    """Topology-only graph file: 0-based edges [i, j] with i < j, sorted."""
    with open(path, "w") as f:
        f.write('{"format_version": %d, "n": %d, "r": %s, "domain": %s, "edges": ['
                % (FORMAT_VERSION, graph.n, json.dumps(graph.r),
                   json.dumps(graph.domain.to_dict(), sort_keys=True)))
        first = True
        for v in range(graph.n):
            row = graph.neighbors(v)
            up = row[row > v]
            if up.size == 0:
                continue
            body = ",".join(f"[{v},{int(j)}]" for j in up)
            f.write(body if first else "," + body)
            first = False
        f.write("]}")


def read_graph_json(path: str) -> GraphInstance:
    with open(path) as f:
        doc = json.load(f)
    _require_keys(doc, {"format_version", "n", "r", "domain", "edges"}, "graph file")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported graph format_version {doc['format_version']!r}")
    domain = DomainSpec.from_dict(doc["domain"])
    n = int(doc["n"])
    if domain.n != n:
        raise FormatError("domain.n disagrees with graph n")
    edges = np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2)
    if edges.size and np.any(edges[:, 0] >= edges[:, 1]):
        raise FormatError("edges must satisfy i < j")
    return GraphInstance.from_edges(domain, float(doc["r"]), n, edges)


def write_positions_json(truth: GroundTruth, path: str) -> None:
    with open(path, "w") as f:
        f.write('{"format_version": %d, "positions": [' % FORMAT_VERSION)
        rows = (json.dumps([float(x) for x in p]) for p in truth.positions)
        f.write(",".join(rows))
        f.write("]}")


def read_positions_json(path: str, domain: DomainSpec) -> GroundTruth:
    with open(path) as f:
        doc = json.load(f)
    _require_keys(doc, {"format_version", "positions"}, "positions file")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported positions format_version {doc['format_version']!r}")
    pos = np.asarray(doc["positions"], dtype=float)
    if pos.ndim != 2 or pos.shape[1] != domain.ndim:
        raise FormatError("positions have the wrong dimensionality for the domain")
    return GroundTruth(domain=domain, positions=pos)


def _require_keys(doc: dict, keys: set, what: str) -> None:
    if not isinstance(doc, dict):
        raise FormatError(f"{what} must be a JSON object")
    missing = keys - set(doc)
    extra = set(doc) - keys
    if missing:
        raise FormatError(f"{what} missing key(s): {sorted(missing)}")
    if extra:
        raise FormatError(f"{what} has unknown key(s): {sorted(extra)}")
