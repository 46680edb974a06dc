"""Filtered simplicial complexes, Vietoris-Rips filtrations and Rips cover complexes."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from .covers import Cover
from .errors import IntegrityError, ResourceCapError
from .metric import DissimilaritySpace

log = logging.getLogger(__name__)

_INT64_LIMIT = 2**62


def canonical(simplex: Iterable[int]) -> tuple:
    """Strictly increasing vertex tuple; raises on repeated vertices."""
    s = tuple(sorted(int(v) for v in simplex))
    if len(set(s)) != len(s):
        raise ValueError(f"simplex {s} repeats a vertex")
    return s


class _KeyIndex:
    """Lookup of rows (sorted vertex tuples of one dimension) by integer key."""

    def __init__(self, rows: np.ndarray, base: int):
        self.base = base
        self.width = rows.shape[1]
        self.packed = base ** self.width < _INT64_LIMIT
        if self.packed:
            self.keys = encode(rows, base)
        else:
            self.table = {r.tobytes(): i for i, r in enumerate(np.ascontiguousarray(rows))}

    def find(self, rows: np.ndarray) -> np.ndarray:
        """Positions of ``rows``; -1 where absent. Requires key-sorted storage."""
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        if self.packed:
            q = encode(rows, self.base)
            pos = np.searchsorted(self.keys, q)
            pos = np.minimum(pos, max(len(self.keys) - 1, 0))
            hit = (len(self.keys) > 0) & (self.keys[pos] == q) if len(self.keys) else np.zeros(len(q), bool)
            return np.where(hit, pos, -1)
        return np.array([self.table.get(r.tobytes(), -1) for r in rows], dtype=np.int64)


def encode(rows: np.ndarray, base: int) -> np.ndarray:
    """Pack vertex rows into int64 keys that sort lexicographically."""
    key = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(rows.shape[1]):
        key = key * base + rows[:, c]
    return key


def _lex_sort(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    return np.lexsort(rows.T[::-1])


class FilteredComplex:
    """A finite simplicial complex with a real filtration value on every cell.

    Cells are stored per dimension (``simplices[k]`` has shape (m_k, k+1)
    with increasing vertices, lexicographically sorted). The filtration
    order sorts cells by (value, dimension, lexicographic vertices), which
    puts faces before cofaces whenever values are monotone.

    ``max_dim`` is the dimension cap the complex was built with. ``None``
    means the complex is complete in every dimension (nothing truncated).
    ``r_max`` is the largest parameter through which the filtration is exact.
    """

    def __init__(
        self,
        simplices: Sequence[np.ndarray],
        values: Sequence[np.ndarray],
        max_dim: int | None = None,
        n_vertices: int | None = None,
        r_max: float = np.inf,
        check: bool = True,
    ):
        simp, vals = [], []
        for k, (s, v) in enumerate(zip(simplices, values)):
            s = np.asarray(s, dtype=np.int64).reshape(-1, k + 1)
            v = np.asarray(v, dtype=np.float64).reshape(-1)
            if s.shape[0] != v.shape[0]:
                raise ValueError(f"dimension {k}: {s.shape[0]} cells but {v.shape[0]} values")
            if s.shape[0] and k and np.any(np.diff(s, axis=1) <= 0):
                raise ValueError(f"dimension {k}: vertices must be strictly increasing")
            order = _lex_sort(s)
            simp.append(s[order])
            vals.append(v[order])
        while simp and simp[-1].shape[0] == 0 and (max_dim is None or len(simp) - 1 > max_dim):
            simp.pop()
            vals.pop()
        if n_vertices is None:
            n_vertices = int(simp[0].max()) + 1 if simp and simp[0].size else 1
        self.n_vertices = int(n_vertices)
        self.max_dim = max_dim
        self.r_max = float(r_max)
        self.simplices = tuple(simp)
        self.values = tuple(vals)
        for a in self.simplices + self.values:
            a.setflags(write=False)
        self._index = [None] * len(simp)
        self._build_order()
        if check:
            self.validate()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_cells(cls, cells: Iterable, max_dim: int | None = None, n_vertices: int | None = None,
                   check: bool = True, r_max: float = np.inf) -> "FilteredComplex":
        """Build from ``(simplex, value)`` pairs (any vertex order)."""
        by_dim: dict[int, list] = {}
        for simplex, value in cells:
            s = canonical(simplex)
            by_dim.setdefault(len(s) - 1, []).append((s, float(value)))
        top = max(by_dim) if by_dim else -1
        simp, vals = [], []
        for k in range(top + 1):
            items = by_dim.get(k, [])
            simp.append(np.array([s for s, _ in items], dtype=np.int64).reshape(-1, k + 1))
            vals.append(np.array([v for _, v in items], dtype=np.float64))
        if len({s for items in by_dim.values() for s, _ in items}) != sum(len(x) for x in by_dim.values()):
            raise IntegrityError("duplicate simplex")
        return cls(simp, vals, max_dim=max_dim, n_vertices=n_vertices, check=check, r_max=r_max)

    def _build_order(self):
        dims, vals, local = [], [], []
        for k, v in enumerate(self.values):
            dims.append(np.full(v.shape[0], k, dtype=np.int64))
            vals.append(v)
            local.append(np.arange(v.shape[0], dtype=np.int64))
        if dims:
            dims = np.concatenate(dims)
            vals = np.concatenate(vals)
            local = np.concatenate(local)
        else:
            dims = np.empty(0, np.int64)
            vals = np.empty(0)
            local = np.empty(0, np.int64)
        # local index is the lexicographic rank within its dimension
        order = np.lexsort((local, dims, vals))
        self.order_dim = dims[order]
        self.order_local = local[order]
        self.order_value = vals[order]
        self.global_index = []
        for k in range(len(self.values)):
            g = np.empty(self.values[k].shape[0], dtype=np.int64)
            sel = self.order_dim == k
            g[self.order_local[sel]] = np.flatnonzero(sel)
            self.global_index.append(g)
        for a in (self.order_dim, self.order_local, self.order_value):
            a.setflags(write=False)

    def key_index(self, k: int) -> _KeyIndex:
        if self._index[k] is None:
            self._index[k] = _KeyIndex(self.simplices[k], self.n_vertices)
        return self._index[k]

    # -- basic queries -------------------------------------------------------

    def __len__(self):
        return int(self.order_dim.shape[0])

    @property
    def dim(self) -> int:
        """Largest dimension with at least one cell (-1 when empty)."""
        for k in range(len(self.simplices) - 1, -1, -1):
            if self.simplices[k].shape[0]:
                return k
        return -1

    @property
    def complete_through(self) -> float:
        """Largest homology dimension whose barcode this complex determines."""
        return np.inf if self.max_dim is None else self.max_dim - 1

    def count(self, k: int) -> int:
        return self.simplices[k].shape[0] if k < len(self.simplices) else 0

    def counts(self) -> list[int]:
        return [s.shape[0] for s in self.simplices]

    def cell(self, g: int) -> tuple:
        k, i = int(self.order_dim[g]), int(self.order_local[g])
        return tuple(int(x) for x in self.simplices[k][i]), float(self.values[k][i])

    @property
    def cells(self) -> list:
        """``(vertex tuple, value)`` pairs in filtration order."""
        return [self.cell(g) for g in range(len(self))]

    def find(self, k: int, rows: np.ndarray) -> np.ndarray:
        """Local indices of dimension-k rows (-1 when absent)."""
        if k >= len(self.simplices) or self.simplices[k].shape[0] == 0:
            return np.full(np.asarray(rows).shape[0], -1, dtype=np.int64)
        return self.key_index(k).find(np.asarray(rows, dtype=np.int64).reshape(-1, k + 1))

    def index(self, simplex) -> int:
        """Filtration-order position of a simplex; KeyError when absent."""
        s = canonical(simplex)
        k = len(s) - 1
        loc = int(self.find(k, np.array([s]))[0])
        if loc < 0:
            raise KeyError(s)
        return int(self.global_index[k][loc])

    def __contains__(self, simplex) -> bool:
        try:
            self.index(simplex)
        except (KeyError, ValueError):
            return False
        return True

    def value(self, simplex) -> float:
        return float(self.order_value[self.index(simplex)])

    def cell_dict(self) -> dict:
        return {s: v for s, v in self.cells}

    def same_cells(self, other: "FilteredComplex") -> bool:
        """Cell-for-cell equality including filtration values."""
        if len(self.simplices) != len(other.simplices):
            a, b = self.counts(), other.counts()
            a = a + [0] * (len(b) - len(a))
            b = b + [0] * (len(a) - len(b))
            if a != b:
                return False
        for k in range(min(len(self.simplices), len(other.simplices))):
            if not (np.array_equal(self.simplices[k], other.simplices[k])
                    and np.array_equal(self.values[k], other.values[k])):
                return False
        return True

    def validate(self) -> None:
        """Check downward closure and monotone values (faces no later than cofaces)."""
        for k in range(1, len(self.simplices)):
            s = self.simplices[k]
            if s.shape[0] == 0:
                continue
            for drop in range(k + 1):
                faces = np.delete(s, drop, axis=1)
                loc = self.find(k - 1, faces)
                if np.any(loc < 0):
                    bad = s[np.flatnonzero(loc < 0)[0]]
                    raise IntegrityError(f"face of {tuple(bad.tolist())} missing")
                if np.any(self.values[k - 1][loc] > self.values[k]):
                    bad = s[np.flatnonzero(self.values[k - 1][loc] > self.values[k])[0]]
                    raise IntegrityError(f"face of {tuple(bad.tolist())} appears after it")

    # -- derived complexes ---------------------------------------------------

    def select(self, masks: Sequence[np.ndarray], r_max: float | None = None) -> "FilteredComplex":
        simp = [s[m] for s, m in zip(self.simplices, masks)]
        vals = [v[m] for v, m in zip(self.values, masks)]
        return FilteredComplex(simp, vals, max_dim=self.max_dim, n_vertices=self.n_vertices,
                               r_max=self.r_max if r_max is None else r_max, check=False)

    def subcomplex_at(self, t: float) -> "FilteredComplex":
        """Cells with value <= t."""
        return self.select([v <= t for v in self.values])

    def restrict_to(self, vertices) -> "FilteredComplex":
        """Cells whose vertices all lie in ``vertices``."""
        keep = np.zeros(self.n_vertices, dtype=bool)
        keep[np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices, dtype=np.int64)] = True
        return self.select([keep[s].all(axis=1) if s.size else np.zeros(0, bool) for s in self.simplices])

    def truncate_dim(self, max_dim: int) -> "FilteredComplex":
        simp = list(self.simplices[: max_dim + 1])
        vals = list(self.values[: max_dim + 1])
        cap = max_dim if self.max_dim is None else min(max_dim, self.max_dim)
        return FilteredComplex(simp, vals, max_dim=cap, n_vertices=self.n_vertices, r_max=self.r_max, check=False)

    # -- text format ----------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for g in range(len(self)):
            s, v = self.cell(g)
            lines.append(" ".join([str(len(s) - 1), *map(str, s), repr(v)]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, max_dim: int | None = None, n_vertices: int | None = None) -> "FilteredComplex":
        cells = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            k = int(parts[0])
            verts = [int(x) for x in parts[1 : k + 2]]
            if len(parts) != k + 3:
                raise ValueError(f"malformed cell line: {line!r}")
            cells.append((verts, float(parts[k + 2])))
        return cls.from_cells(cells, max_dim=max_dim, n_vertices=n_vertices)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def read(cls, path, **kw) -> "FilteredComplex":
        with open(path) as fh:
            return cls.from_text(fh.read(), **kw)

    def __repr__(self):
        return f"FilteredComplex(counts={self.counts()}, max_dim={self.max_dim}, r_max={self.r_max})"


# -- clique enumeration ------------------------------------------------------


def _cliques(d: np.ndarray, verts: np.ndarray, r_max: float, max_dim: int):
    """Flag simplices of diameter <= r_max inside ``verts`` (sorted global indices).

    Returns per-dimension (rows of global vertices, values). Expansion adds a
    vertex larger than the current last one that is within r_max of every
    vertex, tracking the running diameter.
    """
    sub = d[np.ix_(verts, verts)]
    m = len(verts)
    adj = sub <= r_max
    out_rows = [verts.reshape(-1, 1)]
    out_vals = [np.zeros(m)]
    cur = np.arange(m, dtype=np.int64).reshape(-1, 1)
    cur_val = np.zeros(m)
    later = np.triu(np.ones((m, m), dtype=bool), k=1)
    for _ in range(max_dim):
        if cur.shape[0] == 0:
            break
        ok = later[cur[:, -1]].copy()
        for c in range(cur.shape[1]):
            ok &= adj[cur[:, c]]
        r, v = np.nonzero(ok)
        if r.size == 0:
            cur = np.empty((0, cur.shape[1] + 1), dtype=np.int64)
            break
        val = cur_val[r]
        for c in range(cur.shape[1]):
            np.maximum(val, sub[cur[r, c], v], out=val)
        cur = np.hstack([cur[r], v[:, None]])
        cur_val = val
        out_rows.append(verts[cur])
        out_vals.append(cur_val)
    return out_rows, out_vals


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RIPSCOVER_THREADS", "1")))
    except ValueError:
        return 1


def decode(keys: np.ndarray, base: int, width: int) -> np.ndarray:
    """Inverse of :func:`encode`."""
    rows = np.empty((keys.shape[0], width), dtype=np.int64)
    k = keys.copy()
    for c in range(width - 1, -1, -1):
        rows[:, c] = k % base
        k //= base
    return rows


class _Merger:
    """Accumulates per-set simplices and removes duplicates by content.

    Rows are packed into int64 keys when they fit, and the buffer is
    compacted whenever it grows past ``chunk`` entries, so peak memory
    tracks the deduplicated size rather than the sum over cover sets.
    """

    def __init__(self, n: int, max_dim: int, chunk: int = 1 << 22):
        self.n = n
        self.max_dim = max_dim
        self.chunk = chunk
        self.packed = [n ** (k + 1) < _INT64_LIMIT for k in range(max_dim + 1)]
        self.buf = [[] for _ in range(max_dim + 1)]
        self.vals = [[] for _ in range(max_dim + 1)]
        self.size = [0] * (max_dim + 1)

    def add(self, rows_by_dim, vals_by_dim) -> None:
        for k, (rows, vals) in enumerate(zip(rows_by_dim, vals_by_dim)):
            if rows.shape[0] == 0:
                continue
            self.buf[k].append(encode(rows, self.n) if self.packed[k] else rows)
            self.vals[k].append(vals)
            self.size[k] += rows.shape[0]
            if self.size[k] > self.chunk and len(self.buf[k]) > 1:
                self._compact(k)
                # a compacted buffer still over budget means the next
                # compaction should wait for more data
                self.chunk = max(self.chunk, 2 * self.size[k])

    def _compact(self, k: int) -> None:
        items = np.concatenate(self.buf[k])
        vals = np.concatenate(self.vals[k])
        if self.packed[k]:
            items, first = np.unique(items, return_index=True)
        else:
            items, first = np.unique(items, axis=0, return_index=True)
        self.buf[k] = [items]
        self.vals[k] = [vals[first]]
        self.size[k] = len(items)

    def result(self, k: int):
        if not self.buf[k]:
            return np.empty((0, k + 1), dtype=np.int64), np.empty(0)
        self._compact(k)
        items, vals = self.buf[k][0], self.vals[k][0]
        self.buf[k], self.vals[k] = [], []
        rows = decode(items, self.n, k + 1) if self.packed[k] else items
        return rows, vals


def _assemble(parts, n: int, max_dim: int, r_max: float, max_cells: int | None) -> FilteredComplex:
    merger = _Merger(n, max_dim)
    for rows, vals in parts:
        merger.add(rows, vals)
        if max_cells is not None and sum(merger.size) > max_cells:
            _compact_all(merger)
            if sum(merger.size) > max_cells:
                raise ResourceCapError(
                    f"complex exceeds {max_cells} cells",
                    {f"dim{j}": c for j, c in enumerate(merger.size)},
                )
    simp, vals = [], []
    for k in range(max_dim + 1):
        r, v = merger.result(k)
        simp.append(r)
        vals.append(v)
    if max_cells is not None and sum(len(x) for x in simp) > max_cells:
        raise ResourceCapError(f"complex exceeds {max_cells} cells",
                               {f"dim{j}": len(x) for j, x in enumerate(simp)})
    return FilteredComplex(simp, vals, max_dim=max_dim, n_vertices=n, r_max=r_max, check=False)


def _compact_all(merger: _Merger) -> None:
    for k in range(merger.max_dim + 1):
        if len(merger.buf[k]) > 1:
            merger._compact(k)


def _default_r_max(space: DissimilaritySpace, r_max):
    return space.enclosing_radius() if r_max is None else float(r_max)


def rips(space: DissimilaritySpace, r_max: float | None = None, max_dim: int = 2,
         max_cells: int | None = None) -> FilteredComplex:
    """Vietoris-Rips filtration: all simplices of dim <= max_dim and diameter <= r_max.

    ``r_max`` defaults to the enclosing radius of the space.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    r = _default_r_max(space, r_max)
    if r < 0:
        raise ValueError("r_max must be nonnegative")
    part = _cliques(space.d, np.arange(space.n, dtype=np.int64), r, max_dim)
    return _assemble([part], space.n, max_dim, r, max_cells)


def rips_cover(space: DissimilaritySpace, cover: Cover, r_max: float | None = None, max_dim: int = 2,
               max_cells: int | None = None) -> FilteredComplex:
    """Rips cover complex: Rips simplices whose vertices lie in at least one cover set."""
    if cover.n != space.n:
        raise ValueError(f"cover is over {cover.n} points but the space has {space.n}")
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    r = _default_r_max(space, r_max)
    if r < 0:
        raise ValueError("r_max must be nonnegative")
    work = lambda s: _cliques(space.d, s, r, max_dim)
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cx = _assemble(pool.map(work, cover.sets), space.n, max_dim, r, max_cells)
    else:
        cx = _assemble(map(work, cover.sets), space.n, max_dim, r, max_cells)
    log.info("cover complex cells per dimension: %s", cx.counts())
    return cx


def subcomplex_at(complex: FilteredComplex, t: float) -> FilteredComplex:
    return complex.subcomplex_at(t)


def restrict_to(complex: FilteredComplex, vertices) -> FilteredComplex:
    return complex.restrict_to(vertices)
