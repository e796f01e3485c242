"""Vectorized CSR helpers shared by the graph kernels.

Everything here is written to keep temporary allocations bounded (gathers and
row concatenations are chunked), since adjacency arrays reach GB scale at the
densest sweep cells.
"""

from __future__ import annotations

import numpy as np

CHUNK_ELEMS = 1 << 24


def take_chunked(arr: np.ndarray, idx: np.ndarray, chunk: int = CHUNK_ELEMS) -> np.ndarray:
    """arr[idx] with bounded index-conversion temporaries."""
    if idx.size <= chunk:
        return arr[idx]
    out = np.empty(idx.shape, dtype=arr.dtype)
    for lo in range(0, idx.size, chunk):
        hi = min(lo + chunk, idx.size)
        out[lo:hi] = arr[idx[lo:hi]]
    return out


def concat_rows(indptr: np.ndarray, indices: np.ndarray, rows: np.ndarray):
    """Concatenate CSR rows; returns (values, offsets) with offsets per row."""
    rows = np.asarray(rows)
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    offsets = np.concatenate(([0], np.cumsum(lens)))
    total = int(offsets[-1])
    if total == 0:
        return indices[:0], offsets
    pos = np.arange(total, dtype=np.int64)
    pos += np.repeat(starts - offsets[:-1], lens)
    return take_chunked(indices, pos), offsets


def iter_row_blocks(indptr: np.ndarray, rows: np.ndarray, max_elems: int = CHUNK_ELEMS):
    """Yield slices of `rows` whose concatenated adjacency stays under max_elems."""
    rows = np.asarray(rows)
    if rows.size == 0:
        return
    lens = (indptr[rows + 1] - indptr[rows]).astype(np.int64)
    cum = np.cumsum(lens)
    start = 0
    base = 0
    while start < rows.size:
        stop = int(np.searchsorted(cum, base + max_elems, side="right"))
        stop = max(stop, start + 1)
        yield rows[start:stop]
        base = cum[stop - 1]
        start = stop


def row_segment_min(indptr, indices, rows, values, out):
    """out[k] = min over the CSR row rows[k] of values[...]; inf for empty rows."""
    k0 = 0
    for block in iter_row_blocks(indptr, rows):
        cat, offs = concat_rows(indptr, indices, block)
        gathered = take_chunked(values, cat)
        k1 = k0 + block.size
        if cat.size:
            seg = np.minimum.reduceat(gathered, np.minimum(offs[:-1], cat.size - 1))
            empty = offs[:-1] == offs[1:]
            seg[empty] = np.inf
            out[k0:k1] = seg
        else:
            out[k0:k1] = np.inf
        k0 = k1
    return out


def counting_place(indices_out, cursor, i_arr, j_arr):
    """Scatter j values into CSR storage grouped by row, advancing cursors."""
    if i_arr.size == 0:
        return
    perm = np.argsort(i_arr, kind="stable")
    i_s = i_arr[perm]
    j_s = j_arr[perm]
    bounds = np.flatnonzero(np.diff(i_s)) + 1
    seg_start = np.concatenate(([0], bounds))
    seg_rows = i_s[seg_start].astype(np.int64)
    seg_len = np.diff(np.concatenate((seg_start, [i_s.size])))
    ranks = np.arange(i_s.size, dtype=np.int64) - np.repeat(seg_start, seg_len)
    dest = cursor[i_s] + ranks
    indices_out[dest] = j_s
    cursor[seg_rows] += seg_len


def index_dtype(n: int):
    return np.uint16 if n <= np.iinfo(np.uint16).max + 1 else np.int32
