"""Boundary matrices over F_p and persistence column reduction."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..complex import FilteredComplex
from ..errors import IntegrityError
from .field import check_prime, inverse_table


@dataclass(frozen=True)
class BoundaryMatrix:
    """Sparse columns in filtration order (CSC layout, rows sorted per column).

    Column ``g`` is the boundary of the g-th cell; entries are (-1)^i mod p
    for the face that drops vertex i. Row indices are int32 and
    coefficients int8 to keep large complexes in memory.
    """

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    dims: np.ndarray
    p: int

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def column(self, g: int):
        a, b = self.indptr[g], self.indptr[g + 1]
        return self.indices[a:b].astype(np.int64), self.data[a:b].astype(np.int64)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for g in range(self.n):
            rows, vals = self.column(g)
            out[rows, g] = vals
        return out

    def anti_transpose(self) -> "BoundaryMatrix":
        """Coboundary matrix with reversed index order: entry (i, j) -> (N-1-j, N-1-i)."""
        n = self.n
        counts = np.diff(self.indptr)
        new_col = (n - 1 - self.indices).astype(np.int64)
        # entries visited in decreasing column order give increasing new rows;
        # a stable sort by new column then keeps rows sorted within each column
        rev = np.arange(len(new_col) - 1, -1, -1, dtype=np.int64)
        perm = rev[np.argsort(new_col[::-1], kind="stable")]
        del rev
        new_row = np.repeat(np.arange(n - 1, -1, -1, dtype=np.int32), counts)
        indices = new_row[perm]
        del new_row
        data = self.data[perm]
        new_counts = np.bincount(new_col, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(new_counts, out=indptr[1:])
        return BoundaryMatrix(indptr, indices, data, self.dims[::-1].copy(), self.p)


def boundary_matrix(complex: FilteredComplex, p: int = 2) -> BoundaryMatrix:
    """Signed boundary matrix of a filtered complex over F_p."""
    p = check_prime(p)
    lengths = np.where(complex.order_dim > 0, complex.order_dim + 1, 0)
    indptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    if len(complex) >= 2**31:
        raise IntegrityError("complex too large for 32-bit row indices")
    indices = np.empty(indptr[-1], dtype=np.int32)
    data = np.empty(indptr[-1], dtype=np.int8)
    for k in range(1, len(complex.simplices)):
        s = complex.simplices[k]
        if s.shape[0] == 0:
            continue
        rows = np.empty((s.shape[0], k + 1), dtype=np.int64)
        for drop in range(k + 1):
            loc = complex.find(k - 1, np.delete(s, drop, axis=1))
            if np.any(loc < 0):
                bad = s[np.flatnonzero(loc < 0)[0]]
                raise IntegrityError(f"face of {tuple(bad.tolist())} is missing from the complex")
            rows[:, drop] = complex.global_index[k - 1][loc]
        signs = np.array([(-1) ** i % p for i in range(k + 1)], dtype=np.int8)
        srt = np.argsort(rows, axis=1)
        rows = np.take_along_axis(rows, srt, axis=1)
        vals = signs[srt]
        g = complex.global_index[k]
        if np.any(rows[:, -1] >= g):
            raise IntegrityError("a face appears after its coface in the filtration order")
        pos = indptr[g][:, None] + np.arange(k + 1)
        indices[pos] = rows
        data[pos] = vals
        del rows, vals, srt, pos
    return BoundaryMatrix(indptr, indices, data, complex.order_dim.copy(), p)


@numba.njit(cache=True)
def _axpy(ai, av, bi, bv, f, p):
    """Sorted sparse a - f*b mod p."""
    out_i = np.empty(len(ai) + len(bi), dtype=np.int64)
    out_v = np.empty(len(ai) + len(bi), dtype=np.int64)
    x = 0
    y = 0
    k = 0
    while x < len(ai) or y < len(bi):
        if y >= len(bi) or (x < len(ai) and ai[x] < bi[y]):
            out_i[k] = ai[x]
            out_v[k] = av[x]
            x += 1
            k += 1
        elif x >= len(ai) or bi[y] < ai[x]:
            out_i[k] = bi[y]
            out_v[k] = (p - (f * bv[y]) % p) % p
            y += 1
            k += 1
        else:
            v = (av[x] - f * bv[y]) % p
            if v != 0:
                out_i[k] = ai[x]
                out_v[k] = v
                k += 1
            x += 1
            y += 1
    return out_i[:k], out_v[:k]


@numba.njit(cache=True)
def _reduce_kernel(indptr, indices, data, order, clearing, p, inv, keep_columns):
    n = len(indptr) - 1
    low = np.full(n, -1, dtype=np.int64)
    pivot_of_row = np.full(n, -1, dtype=np.int64)
    cleared = np.zeros(n, dtype=np.bool_)
    # reduced columns live in one growable pool
    start = np.full(n, -1, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    cap = max(1024, min(len(indices), 1 << 22))
    pool_i = np.empty(cap, dtype=np.int64)
    pool_v = np.empty(cap, dtype=np.int64)
    used = 0
    additions = 0
    for j in order:
        if cleared[j]:
            continue
        ci = indices[indptr[j]:indptr[j + 1]].astype(np.int64)
        cv = data[indptr[j]:indptr[j + 1]].astype(np.int64) % p
        while len(ci) > 0:
            l = ci[-1]
            k = pivot_of_row[l]
            if k < 0:
                break
            a = start[k]
            b = a + length[k]
            f = (cv[-1] * inv[pool_v[b - 1]]) % p
            ci, cv = _axpy(ci, cv, pool_i[a:b], pool_v[a:b], f, p)
            additions += 1
        if len(ci) > 0 or keep_columns:
            if used + len(ci) > cap:
                cap = max(2 * cap, used + len(ci))
                grown_i = np.empty(cap, dtype=np.int64)
                grown_v = np.empty(cap, dtype=np.int64)
                grown_i[:used] = pool_i[:used]
                grown_v[:used] = pool_v[:used]
                pool_i = grown_i
                pool_v = grown_v
            start[j] = used
            length[j] = len(ci)
            pool_i[used:used + len(ci)] = ci
            pool_v[used:used + len(ci)] = cv
            used += len(ci)
        if len(ci) > 0:
            l = ci[-1]
            low[j] = l
            pivot_of_row[l] = j
            if clearing:
                cleared[l] = True
    return low, start, length, pool_i[:used], pool_v[:used], additions


@dataclass(frozen=True)
class Reduction:
    """Result of reducing a boundary (or anti-transposed coboundary) matrix.

    ``low[j]`` is the lowest nonzero row of reduced column j (-1 if zero or
    skipped). ``pairs`` holds (birth cell, death cell) in filtration order
    and ``essential`` the unpaired cells of the processed dimensions.
    """

    low: np.ndarray
    pairs: np.ndarray
    essential: np.ndarray
    columns: dict
    additions: int


def _process_order(dims: np.ndarray, dim_sequence) -> np.ndarray:
    return np.concatenate([np.flatnonzero(dims == k) for k in dim_sequence] or [np.empty(0, np.int64)]).astype(np.int64)


def reduce_columns(matrix: BoundaryMatrix, order=None, clearing: bool = False, keep_columns: bool = False):
    """Run the column reduction over ``order`` (default: left to right).

    Returns (low, columns, additions) where ``columns`` maps column index
    to the reduced (rows, values) when stored.
    """
    if order is None:
        order = np.arange(matrix.n, dtype=np.int64)
    order = np.asarray(order, dtype=np.int64)
    low, start, length, pool_i, pool_v, adds = _reduce_kernel(
        matrix.indptr, matrix.indices, matrix.data, order, clearing, matrix.p, inverse_table(matrix.p), keep_columns
    )
    columns = {}
    if keep_columns:
        for j in np.flatnonzero(start >= 0):
            a, b = start[j], start[j] + length[j]
            columns[int(j)] = (pool_i[a:b].copy(), pool_v[a:b].copy())
    return low, columns, adds


def reduce(matrix: BoundaryMatrix, clearing: bool = False, max_hom_dim: int | None = None,
           cohomology: bool = False, keep_columns: bool = False) -> Reduction:
    """Persistence pairing of a boundary matrix.

    With ``cohomology`` the anti-transposed coboundary matrix is reduced
    (dimensions ascending, which is what makes clearing effective); the
    pairs are the same. ``max_hom_dim`` limits the work to the columns
    needed for homology through that dimension.
    """
    if cohomology:
        return reduce_coboundary(matrix.anti_transpose(), clearing, max_hom_dim, keep_columns)
    n = matrix.n
    dims = matrix.dims
    top = int(dims.max()) if n else -1
    q = top if max_hom_dim is None else min(max_hom_dim, top)
    order = _process_order(dims, range(min(q + 1, top), 0, -1))
    low, columns, adds = reduce_columns(matrix, order, clearing, keep_columns)
    cols = np.flatnonzero(low >= 0)
    pairs = np.stack([low[cols], cols], axis=1) if cols.size else np.empty((0, 2), dtype=np.int64)
    return _finish(low, pairs, dims, q, columns, adds)


def reduce_coboundary(cob: BoundaryMatrix, clearing: bool = False, max_hom_dim: int | None = None,
                      keep_columns: bool = False) -> Reduction:
    """Pairing from an anti-transposed coboundary matrix, reported in the
    original (homology) filtration indices."""
    n = cob.n
    dims = cob.dims[::-1]
    top = int(dims.max()) if n else -1
    q = top if max_hom_dim is None else min(max_hom_dim, top)
    order = _process_order(cob.dims, range(0, q + 1))
    low, columns, adds = reduce_columns(cob, order, clearing, keep_columns)
    cols = np.flatnonzero(low >= 0)
    birth = n - 1 - cols
    death = n - 1 - low[cols]
    pairs = np.stack([birth, death], axis=1) if cols.size else np.empty((0, 2), dtype=np.int64)
    low_h = np.full(n, -1, dtype=np.int64)
    low_h[death] = birth
    return _finish(low_h, pairs, dims, q, columns, adds)


def _finish(low, pairs, dims, q, columns, adds) -> Reduction:
    n = len(dims)
    pairs = pairs[np.argsort(pairs[:, 0], kind="stable")] if len(pairs) else pairs
    used = np.zeros(n, dtype=bool)
    used[pairs.ravel()] = True
    essential = np.flatnonzero(~used & (dims <= q))
    return Reduction(low, pairs, essential, columns, adds)
