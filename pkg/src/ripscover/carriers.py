"""Filtered carriers and the inductive extension of chain maps through them."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .complex import FilteredComplex
from .covers import Cover
from .errors import AcyclicityViolation, IntegrityError
from .homology.barcode import barcode, reduced_intervals
from .homology.field import check_prime, nullspace_mod_p, rank_mod_p, solve_mod_p
from .metric import DissimilaritySpace


def identity(t: float) -> float:
    return t


def _faces(cell: tuple):
    """(sign exponent, face) pairs of a simplex."""
    return [(i, cell[:i] + cell[i + 1:]) for i in range(len(cell))] if len(cell) > 1 else []


class FilteredCarrier:
    """Assignment of each source cell to a downward closed set of target cells.

    ``cells[g]`` is a sorted array of target filtration indices assigned to
    the source cell with filtration index g. Filtration values come from
    the target.
    """

    def __init__(self, source: FilteredComplex, target: FilteredComplex, cells: Sequence[np.ndarray],
                 check: bool = True, monotone: bool = True):
        if len(cells) != len(source):
            raise ValueError("one carrier subcomplex is needed per source cell")
        self.source = source
        self.target = target
        self.cells = [np.unique(np.asarray(c, dtype=np.int64)) for c in cells]
        if check:
            self.validate(monotone)

    @classmethod
    def from_vertex_sets(cls, source: FilteredComplex, target: FilteredComplex, vertex_sets: Sequence,
                         **kw) -> "FilteredCarrier":
        """Carrier of each source cell = target cells spanned by the given vertices."""
        masks = []
        for vs in vertex_sets:
            m = np.zeros(target.n_vertices, dtype=bool)
            m[np.asarray(list(vs), dtype=np.int64)] = True
            masks.append(m)
        cells = []
        for m in masks:
            sel = [target.global_index[k][m[s].all(axis=1)] for k, s in enumerate(target.simplices)]
            cells.append(np.concatenate(sel) if sel else np.empty(0, np.int64))
        return cls(source, target, cells, **kw)

    def validate(self, monotone: bool = True) -> None:
        """Downward closure of every carrier and, optionally, monotonicity."""
        sets = [set(c.tolist()) for c in self.cells]
        for g, c in enumerate(self.cells):
            for h in c.tolist():
                cell, _ = self.target.cell(h)
                for _, f in _faces(cell):
                    if self.target.index(f) not in sets[g]:
                        raise IntegrityError(f"carrier of source cell {g} is not closed under faces")
        if monotone:
            for g in range(len(self.source)):
                cell, _ = self.source.cell(g)
                for _, f in _faces(cell):
                    if not sets[self.source.index(f)] <= sets[g]:
                        raise IntegrityError(f"carrier of a face of {cell} is not inside the carrier of {cell}")

    def subcomplex(self, g: int, t: float | None = None) -> FilteredComplex:
        """The carrier of source cell g as a filtered complex (optionally cut at t)."""
        c = self.cells[g]
        if t is not None:
            c = c[self.target.order_value[c] <= t]
        cells = [self.target.cell(h) for h in c.tolist()]
        return FilteredComplex.from_cells(cells, max_dim=self.target.max_dim, n_vertices=self.target.n_vertices,
                                          check=False)


@dataclass
class ShiftChainMap:
    """Chain map from ``source`` to ``target`` over F_p with shift alpha.

    ``images[g]`` is a pair (target indices, coefficients) for the source
    cell with filtration index g. In dimension k the image of a cell with
    value s may use target cells up to beta^k(alpha(s)).
    """

    source: FilteredComplex
    target: FilteredComplex
    images: dict
    p: int = 2
    alpha: Callable[[float], float] = identity
    beta: Callable[[float], float] = identity
    meta: dict = field(default_factory=dict)

    def level(self, g: int) -> float:
        k = int(self.source.order_dim[g])
        t = self.alpha(float(self.source.order_value[g]))
        for _ in range(k):
            t = self.beta(t)
        return t

    def image(self, g: int):
        return self.images.get(g, (np.empty(0, np.int64), np.empty(0, np.int64)))

    def apply(self, chain: dict) -> dict:
        """Image of a chain given as {source index: coefficient}."""
        out: dict = {}
        for g, a in chain.items():
            rows, vals = self.image(g)
            for h, v in zip(rows.tolist(), vals.tolist()):
                out[h] = (out.get(h, 0) + a * v) % self.p
        return {h: v for h, v in out.items() if v}

    def to_json(self) -> dict:
        doc = []
        for g in range(len(self.source)):
            cell, value = self.source.cell(g)
            rows, vals = self.image(g)
            doc.append({"cell": list(cell), "value": value,
                        "image": [[list(self.target.cell(h)[0]), int(v)] for h, v in zip(rows.tolist(), vals.tolist())]})
        return {"p": self.p, "cells": doc}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def boundary_chain(complex: FilteredComplex, g: int, p: int) -> dict:
    """Boundary of cell g as {filtration index: coefficient}."""
    cell, _ = complex.cell(g)
    return {complex.index(f): ((-1) ** i) % p for i, f in _faces(cell)}


def _chain_boundary(complex: FilteredComplex, chain: dict, p: int) -> dict:
    out: dict = {}
    for h, a in chain.items():
        for f, s in boundary_chain(complex, h, p).items():
            out[f] = (out.get(f, 0) + a * s) % p
    return {h: v for h, v in out.items() if v}


def _sparse(chain: dict):
    keys = np.array(sorted(chain), dtype=np.int64)
    return keys, np.array([chain[k] for k in keys.tolist()], dtype=np.int64)


def vertex_map(source: FilteredComplex, target: FilteredComplex, assignment: dict, p: int = 2,
               alpha: Callable[[float], float] = identity, beta: Callable[[float], float] = identity) -> ShiftChainMap:
    """Augmentation preserving map sending source vertex v to target vertex ``assignment[v]``."""
    images = {}
    for v, w in assignment.items():
        images[source.index((int(v),))] = (np.array([target.index((int(w),))]), np.array([1]))
    return ShiftChainMap(source, target, images, check_prime(p), alpha, beta)


def check_carrier_acyclic(carrier: FilteredCarrier, alpha: Callable[[float], float] = identity,
                          beta: Callable[[float], float] = identity, p: int = 2, max_hom_dim: int = 1):
    """Whether each carrier is beta-acyclic from alpha(s) onward.

    Every reduced interval (b, d) of the carrier of a cell at value s with
    d > alpha(s) must satisfy d <= beta(max(b, alpha(s))); the carrier must
    also be nonempty by beta(alpha(s)). Returns ``(ok, witness)`` with the
    witness a (source cell, interval) pair.
    """
    p = check_prime(p)
    src = carrier.source
    for g in range(len(src)):
        cell, s = src.cell(g)
        a = alpha(s)
        sub = carrier.subcomplex(g)
        if len(sub) == 0 or sub.order_value.min() > beta(a):
            return False, (cell, (-1, a, math.inf if len(sub) == 0 else float(sub.order_value.min())))
        bc = barcode(sub, p, max_hom_dim)
        for k, b, d in reduced_intervals(bc):
            if d > a and d > beta(max(b, a)):
                return False, (cell, (int(k), float(b), float(d)))
    return True, None


def extend_chain_map(carrier: FilteredCarrier, initial: ShiftChainMap, p: int = 2, up_to_dim: int = 1) -> ShiftChainMap:
    """Extend a vertex map to all source cells through ``up_to_dim``.

    Cells are processed in filtration order. The image of a k-cell x at
    value s solves d(y) = F(dx) using only the k-cells of the carrier of x
    with value at most beta^k(alpha(s)); the canonical pivot solution of
    the elimination is taken.
    """
    p = check_prime(p)
    src, tgt = carrier.source, carrier.target
    if initial.source is not src or initial.target is not tgt:
        raise ValueError("initial map and carrier disagree on source or target")
    out = ShiftChainMap(src, tgt, {}, p, initial.alpha, initial.beta, {"extended_through": up_to_dim})
    tdims = tgt.order_dim
    tvals = tgt.order_value
    for g in range(len(src)):
        k = int(src.order_dim[g])
        if k > up_to_dim:
            continue
        cell, s = src.cell(g)
        level = out.level(g)
        allowed = carrier.cells[g]
        if k == 0:
            rows, vals = initial.image(g)
            if rows.size == 0:
                raise ValueError(f"initial map has no image for vertex {cell}")
            if not np.isin(rows, allowed).all() or np.any(tvals[rows] > level):
                raise AcyclicityViolation(f"initial image of {cell} leaves its carrier", cell=cell)
            out.images[g] = (rows.copy(), vals % p)
            continue
        rhs = out.apply(boundary_chain(src, g, p))
        cols = allowed[(tdims[allowed] == k) & (tvals[allowed] <= level)]
        if not rhs and cols.size == 0:
            out.images[g] = (np.empty(0, np.int64), np.empty(0, np.int64))
            continue
        row_ids = set(rhs)
        col_bd = [boundary_chain(tgt, h, p) for h in cols.tolist()]
        for bd in col_bd:
            row_ids.update(bd)
        row_ids = sorted(row_ids)
        pos = {h: i for i, h in enumerate(row_ids)}
        a = np.zeros((len(row_ids), len(cols)), dtype=np.int64)
        for j, bd in enumerate(col_bd):
            for h, v in bd.items():
                a[pos[h], j] = v
        b = np.zeros(len(row_ids), dtype=np.int64)
        for h, v in rhs.items():
            b[pos[h]] = v
        x = solve_mod_p(a, b, p) if len(row_ids) else np.zeros(len(cols), dtype=np.int64)
        if x is None:
            raise AcyclicityViolation(f"no chain in the carrier of {cell} at level {level} bounds its image",
                                      cell=cell)
        nz = np.flatnonzero(x)
        out.images[g] = (cols[nz], x[nz])
    return out


def verify_chain_map(fmap: ShiftChainMap, carrier: FilteredCarrier | None = None) -> bool:
    """Boundary commutation, carrier containment and shift bounds."""
    p = fmap.p
    src, tgt = fmap.source, fmap.target
    for g, (rows, vals) in fmap.images.items():
        if rows.size and np.any(tgt.order_value[rows] > fmap.level(g) + 1e-12):
            return False
        if rows.size and np.any(tgt.order_dim[rows] != src.order_dim[g]):
            return False
        if carrier is not None and rows.size and not np.isin(rows, carrier.cells[g]).all():
            return False
        lhs = _chain_boundary(tgt, {h: v for h, v in zip(rows.tolist(), (vals % p).tolist()) if v}, p)
        rhs = fmap.apply(boundary_chain(src, g, p))
        if lhs != rhs:
            return False
    return True


def _matrix(complex: FilteredComplex, k: int, t: float, p: int):
    """Boundary matrix from k-cells to (k-1)-cells of the subcomplex at t (filtration indices)."""
    keep = complex.order_value <= t
    cols = np.flatnonzero(keep & (complex.order_dim == k))
    rows = np.flatnonzero(keep & (complex.order_dim == k - 1)) if k else np.empty(0, np.int64)
    pos = {h: i for i, h in enumerate(rows.tolist())}
    m = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for j, g in enumerate(cols.tolist()):
        for h, v in boundary_chain(complex, g, p).items():
            m[pos[h], j] = v
    return m, rows, cols


def homology_maps_equal(f: ShiftChainMap, g: ShiftChainMap, dims: Sequence[int] | None = None) -> bool:
    """Whether f and g induce the same map H_k(source_s) -> H_k(target_alpha(s))
    at every source value s.

    For each cycle z in a basis of Z_k at s, (f - g)(z) must be a boundary
    in the target at the larger of the two levels.
    """
    if f.p != g.p:
        raise ValueError("maps over different fields")
    p = f.p
    src, tgt = f.source, f.target
    top = max((k for k in range(len(src.simplices)) if src.count(k)), default=0)
    dims = range(top + 1) if dims is None else dims
    for s in np.unique(src.order_value):
        for k in dims:
            bd, _, cols = _matrix(src, k, s, p)
            if cols.size == 0:
                continue
            z = nullspace_mod_p(bd, p) if bd.shape[0] else np.eye(len(cols), dtype=np.int64)
            if z.shape[1] == 0:
                continue
            tk = max(_dim_level(f, k, s), _dim_level(g, k, s))
            tb, trows, _ = _matrix(tgt, k + 1, tk, p)
            keep = tgt.order_value <= tk
            kcells = np.flatnonzero(keep & (tgt.order_dim == k))
            pos = {h: i for i, h in enumerate(kcells.tolist())}
            base_rank = rank_mod_p(tb, p) if tb.size else 0
            for j in range(z.shape[1]):
                chain = {int(cols[i]): int(z[i, j]) for i in np.flatnonzero(z[:, j])}
                diff = f.apply(chain)
                for h, v in g.apply(chain).items():
                    diff[h] = (diff.get(h, 0) - v) % p
                vec = np.zeros(len(kcells), dtype=np.int64)
                for h, v in diff.items():
                    if v % p:
                        if h not in pos:
                            return False
                        vec[pos[h]] = v % p
                if not vec.any():
                    continue
                aug = np.hstack([tb, vec[:, None]]) if tb.size else vec[:, None]
                if rank_mod_p(aug, p) != base_rank:
                    return False
    return True


def _dim_level(fmap: ShiftChainMap, k: int, s: float) -> float:
    t = fmap.alpha(float(s))
    for _ in range(k):
        t = fmap.beta(t)
    return t


def identity_carrier(complex: FilteredComplex) -> FilteredCarrier:
    """Each cell carried to its own closure."""
    cells = []
    for g in range(len(complex)):
        cell, _ = complex.cell(g)
        sub = [complex.index(f) for size in range(1, len(cell) + 1) for f in combinations(cell, size)]
        cells.append(np.array(sub, dtype=np.int64))
    return FilteredCarrier(complex, complex, cells)


def witness_carrier(space: DissimilaritySpace, cover: Cover, full: FilteredComplex,
                    covered: FilteredComplex) -> FilteredCarrier:
    """Carrier of a full-complex cell T: the covered-complex cells spanned by Xbar(T)."""
    from .bounds import _witness_masks

    _, xbar = _witness_masks(space, full)
    sets = [np.flatnonzero(xbar[int(full.order_dim[g])][int(full.order_local[g])]) for g in range(len(full))]
    return FilteredCarrier.from_vertex_sets(full, covered, sets)
