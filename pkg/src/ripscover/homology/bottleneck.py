"""Bottleneck distance between persistence diagrams."""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .barcode import Barcode, PersistenceDiagram


def _as_diagram(d) -> PersistenceDiagram:
    if isinstance(d, Barcode):
        return d.diagram()
    if isinstance(d, PersistenceDiagram):
        return d
    raise TypeError(f"expected a Barcode or PersistenceDiagram, got {type(d).__name__}")


def _feasible(cost: np.ndarray, ha: np.ndarray, hb: np.ndarray, eps: float) -> bool:
    """Perfect matching with every edge cost <= eps on the diagonal-augmented graph.

    Left: points of A then diagonal copies of B. Right: points of B then
    diagonal copies of A.
    """
    m, n = cost.shape
    top = np.hstack([cost <= eps, np.diag(ha <= eps) if m else np.zeros((0, m), bool)])
    bottom = np.hstack([np.diag(hb <= eps) if n else np.zeros((0, n), bool), np.ones((n, m), dtype=bool)])
    graph = csr_matrix(np.vstack([top, bottom]).astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def finite_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    """Bottleneck distance between two finite point sets (birth, death)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    ha = (a[:, 1] - a[:, 0]) / 2
    hb = (b[:, 1] - b[:, 0]) / 2
    if len(a) == 0 and len(b) == 0:
        return 0.0
    cost = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2) if len(a) and len(b) else np.zeros((len(a), len(b)))
    cands = np.unique(np.concatenate([cost.ravel(), ha, hb, [0.0]]))
    lo, hi = 0, len(cands) - 1
    # the largest candidate is always feasible (everything to the diagonal)
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(cost, ha, hb, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def essential_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    """Cost of matching essential births; +inf when the counts differ."""
    a = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    if len(a) != len(b):
        return math.inf
    return float(np.abs(a - b).max()) if len(a) else 0.0


def bottleneck(d1, d2, dim: int) -> float:
    """Bottleneck distance in one homology dimension.

    Unmatched finite points pay half their persistence; essential points
    only match essential points.
    """
    a, b = _as_diagram(d1), _as_diagram(d2)
    ess = essential_bottleneck(a.essentials(dim), b.essentials(dim))
    if math.isinf(ess):
        return math.inf
    return max(ess, finite_bottleneck(a.finite(dim), b.finite(dim)))
