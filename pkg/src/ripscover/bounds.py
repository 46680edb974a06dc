"""Witness sets, the thresholds R1 <= R2 <= R3, sparse certificates and
barcode-level interleaving checks."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .complex import FilteredComplex, rips, rips_cover
from .covers import Cover, landmark_cover, nerve
from .homology.barcode import Barcode, reduced_betti
from .homology.field import check_prime
from .metric import DissimilaritySpace, LandmarkSequence, _index_array, tuple_diameter

log = logging.getLogger(__name__)


def _fmt(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


# -- witness sets ------------------------------------------------------------


@dataclass(frozen=True)
class WitnessSets:
    """Witness sets of a simplex T with diameter r.

    ``X`` holds the points within r of every vertex, ``Xbar`` the union of
    X(S) over nonempty S in T and ``restricted`` the distinct nonempty sets
    V & Xbar for V in the refined cover (sorted index arrays).
    """

    simplex: tuple
    r: float
    X: np.ndarray
    Xbar: np.ndarray
    restricted: tuple


def _witness_mask(d: np.ndarray, verts: np.ndarray) -> np.ndarray:
    verts = np.asarray(verts, dtype=np.int64)
    r = d[np.ix_(verts, verts)].max() if verts.size else 0.0
    return np.all(d[verts] <= r, axis=0)


def witness_sets(space: DissimilaritySpace, cover: Cover, simplex: Sequence[int]) -> WitnessSets:
    """X(T), Xbar(T) and the refined cover restricted to Xbar(T)."""
    s = np.unique(_index_array(simplex, space.n, "simplex"))
    d = space.d
    X = _witness_mask(d, s)
    Xbar = np.zeros(space.n, dtype=bool)
    for k in range(1, len(s) + 1):
        for sub in combinations(s.tolist(), k):
            Xbar |= _witness_mask(d, np.array(sub))
    member = cover.membership()[Xbar]
    pts = np.flatnonzero(Xbar)
    # minimal refined sets are the points sharing a membership pattern;
    # every refined set is an intersection of original sets
    seen = {}
    frontier = []
    for j in range(member.shape[1]):
        if member[:, j].any():
            key = member[:, j].tobytes()
            if key not in seen:
                seen[key] = member[:, j].copy()
                frontier.append(member[:, j].copy())
    while frontier:
        nxt = []
        for w in frontier:
            for j in range(member.shape[1]):
                v = w & member[:, j]
                if v.any():
                    key = v.tobytes()
                    if key not in seen:
                        seen[key] = v
                        nxt.append(v)
        frontier = nxt
    restricted = tuple(sorted((pts[m] for m in seen.values()), key=lambda a: (len(a), a.tolist())))
    return WitnessSets(tuple(int(v) for v in s), float(tuple_diameter(space, s)), np.flatnonzero(X),
                       pts, restricted)


# -- thresholds --------------------------------------------------------------


def _candidates(space: DissimilaritySpace) -> np.ndarray:
    iu = np.triu_indices(space.n, 1)
    return np.unique(np.concatenate([[0.0], space.d[iu]]))


def _below(cands: np.ndarray, delta: float) -> float:
    """Largest candidate strictly below delta (+inf when delta is +inf)."""
    if math.isinf(delta):
        return math.inf
    i = int(np.searchsorted(cands, delta, side="left"))
    return float(cands[i - 1]) if i > 0 else -math.inf


def _full_rips(space: DissimilaritySpace, max_dim: int) -> FilteredComplex:
    return rips(space, r_max=math.inf, max_dim=max_dim)


def compute_R1(space: DissimilaritySpace, cover: Cover, max_dim: int = 2):
    """Largest r such that every tuple of at most max_dim + 1 points with
    diameter <= r lies in a cover set.

    Returns ``(R1, witness)`` where the witness is an uncovered tuple of
    smallest diameter (None when every tuple is covered).
    """
    if max_dim < 1:
        raise ValueError("max_dim must be at least 1")
    if cover.n != space.n:
        raise ValueError("cover and space disagree on the number of points")
    full = _full_rips(space, max_dim)
    cov = rips_cover(space, cover, r_max=math.inf, max_dim=max_dim)
    delta, witness = math.inf, None
    for k in range(len(full.simplices)):
        rows = full.simplices[k]
        if rows.shape[0] == 0:
            continue
        missing = cov.find(k, rows) < 0
        if missing.any():
            vals = full.values[k][missing]
            i = int(np.argmin(vals))
            if vals[i] < delta:
                delta = float(vals[i])
                witness = tuple(int(v) for v in rows[missing][i])
    return _below(_candidates(space), delta), witness


def _maximal_sets(cols: np.ndarray) -> np.ndarray:
    """Distinct columns (as sets of rows) not contained in another column."""
    if cols.shape[1] == 0:
        return cols
    cols = np.unique(cols, axis=1)
    inter = cols.T.astype(np.int64) @ cols.astype(np.int64)
    size = np.diag(inter)
    # column i is dominated when some other column contains it
    contained = (inter == size[:, None]) & ~np.eye(len(size), dtype=bool)
    return cols[:, ~contained.any(axis=1)]


def restricted_nerve_acyclic(member: np.ndarray, p: int = 2) -> bool:
    """Whether the nerve of the sets given by the columns of ``member``
    (rows are points) has vanishing reduced homology over F_p.

    The refined cover has a nerve with the same homology as the cover
    itself, and sets contained in another set can be dropped without
    changing the homotopy type, so only the maximal sets are examined.
    """
    cols = member[:, member.any(axis=0)]
    if cols.shape[1] == 0:
        return False
    cols = _maximal_sets(cols)
    m = cols.shape[1]
    if m == 1 or cols.all(axis=1).any():
        return True
    sets = [np.flatnonzero(cols[:, j]) for j in range(m)]
    nv = nerve(Cover(sets, n=cols.shape[0], check=False), max_dim=m - 1)
    fc = nv.to_filtered_complex()
    rb = reduced_betti(fc, 0.0, p, max_hom_dim=max(m - 2, 0))
    return (not rb.empty) and not any(rb.betti)


@dataclass(frozen=True)
class ThresholdReport:
    """R1 <= R2 <= R3 for a space and cover, valid for homology through
    ``max_dim - 1`` (tuples of at most ``max_dim + 1`` points are examined).

    ``raw`` keeps the unclamped values. R2 and R3 are raised to the
    previous threshold when the raw value falls below it, since for r <= R1
    the two complexes coincide and the identity interleaving applies.
    ``metric`` records whether the space satisfies the triangle inequality;
    the 3r regime relies on it, so ``to_json`` flags R3 when it fails.
    """

    R1: float
    R2: float
    R3: float
    witness_R1: tuple | None
    witness_R2: tuple | None
    witness_R3: tuple | None
    max_dim: int
    p: int
    raw: dict = field(default_factory=dict)
    metric: bool | None = None

    def regimes(self) -> list[tuple]:
        """(label, r_star, factor) per regime."""
        return [("R1", self.R1, 1.0), ("R2", self.R2, 2.0), ("R3", self.R3, 3.0)]

    def to_json(self) -> dict:
        doc = asdict(self)
        for k in ("R1", "R2", "R3"):
            doc[k] = _fmt(doc[k])
        doc["raw"] = {k: _fmt(v) for k, v in self.raw.items()}
        for k in ("witness_R1", "witness_R2", "witness_R3"):
            doc[k] = list(doc[k]) if doc[k] is not None else None
        doc["unsupported_without_metric"] = ["R3"] if self.metric is False else []
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _witness_masks(space: DissimilaritySpace, full: FilteredComplex):
    """Per dimension, boolean (cells, n) masks of X(T) and Xbar(T)."""
    d = space.d
    X, Xbar = [], []
    for k, rows in enumerate(full.simplices):
        vals = full.values[k]
        m = np.ones((rows.shape[0], space.n), dtype=bool)
        for j in range(k + 1):
            m &= d[rows[:, j]] <= vals[:, None]
        xb = m.copy()
        for drop in range(k + 1) if k else ():
            loc = full.find(k - 1, np.delete(rows, drop, axis=1))
            xb |= Xbar[k - 1][loc]
        X.append(m)
        Xbar.append(xb)
    return X, Xbar


def compute_R2_R3(space: DissimilaritySpace, cover: Cover, max_dim: int = 2, p: int = 2):
    """Raw R2 and R3 with their limiting tuples.

    Returns ``(R2, R3, witness_R2, witness_R3)``. Tuples are scanned in
    order of diameter; the scan stops at the first tuple whose restricted
    nerve is not acyclic.
    """
    if max_dim < 1:
        raise ValueError("max_dim must be at least 1")
    if cover.n != space.n:
        raise ValueError("cover and space disagree on the number of points")
    p = check_prime(p)
    full = _full_rips(space, max_dim)
    member = cover.membership()
    X, Xbar = _witness_masks(space, full)
    # dom[y, z]: every set holding y also holds z
    mi = member.astype(np.int64)
    dom = (mi @ mi.T) == mi.sum(axis=1)[:, None]
    witness_ok = []
    for k in range(len(full.simplices)):
        hits = (X[k].astype(np.int64) @ dom.T.astype(np.int64)) > 0
        witness_ok.append(~(Xbar[k] & ~hits).any(axis=1))
    cache: dict[bytes, bool] = {}
    delta2 = delta3 = math.inf
    w2 = w3 = None
    for g in range(len(full)):
        k, i = int(full.order_dim[g]), int(full.order_local[g])
        v = float(full.order_value[g])
        if v > delta2 and v > delta3:
            break
        cell = tuple(int(x) for x in full.simplices[k][i])
        if not witness_ok[k][i] and v < delta2:
            delta2, w2 = v, cell
        if v >= delta3:
            continue
        xb = Xbar[k][i]
        key = np.packbits(xb).tobytes()
        ok = cache.get(key)
        if ok is None:
            ok = restricted_nerve_acyclic(member[xb], p)
            cache[key] = ok
        if not ok:
            delta3, w3 = v, cell
            if v < delta2:
                delta2, w2 = v, cell
            break
    cands = _candidates(space)
    return _below(cands, delta2), _below(cands, delta3), w2, w3


def thresholds(space: DissimilaritySpace, cover: Cover, max_dim: int = 2, p: int = 2) -> ThresholdReport:
    """All three thresholds; R2 and R3 are clamped to keep R1 <= R2 <= R3."""
    r1, w1 = compute_R1(space, cover, max_dim)
    r2, r3, w2, w3 = compute_R2_R3(space, cover, max_dim, p)
    raw = {"R1": r1, "R2": r2, "R3": r3}
    c2 = max(r1, r2)
    c3 = max(c2, r3)
    if (c2, c3) != (r2, r3):
        log.info("thresholds clamped: raw R2=%s R3=%s, R1=%s", r2, r3, r1)
    metric = space.metric
    if not metric:
        log.warning("dissimilarity violates the triangle inequality; the 3r regime is not guaranteed")
    return ThresholdReport(r1, c2, c3, w1, w2, w3, max_dim, p, raw, metric)


# -- sparse certificates -----------------------------------------------------


@dataclass(frozen=True)
class SparseCertificate:
    """Per-simplex witness landmarks for a landmark cover with c > 1.

    Arrays are aligned with ``simplices`` (list of vertex tuples):
    ``radius`` the diameter r, ``landmark`` the chosen l, ``witness`` the
    largest d(x_j, l), ``in_sets`` whether l lies in every U_{x_j} and
    ``cone`` the largest distance from l to a vertex of the carrier.
    """

    c: float
    alpha: float
    simplices: list
    radius: np.ndarray
    landmark: np.ndarray
    witness: np.ndarray
    in_sets: np.ndarray
    cone: np.ndarray

    @property
    def witness_bound(self) -> np.ndarray:
        return self.c * self.radius / (self.c - 1)

    @property
    def cone_bound(self) -> np.ndarray:
        return 2 * self.c * self.radius / (self.c - 1)

    @property
    def passed(self) -> np.ndarray:
        tol = 1e-12 * np.maximum(1.0, self.radius)
        return (self.in_sets & (self.witness <= self.witness_bound + tol)
                & (self.cone <= self.cone_bound + tol))

    @property
    def ok(self) -> bool:
        return bool(self.passed.all())

    def violations(self) -> list:
        return [self.simplices[i] for i in np.flatnonzero(~self.passed)]

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "alpha": self.alpha,
            "simplices": len(self.simplices),
            "passed": int(self.passed.sum()),
            "ok": self.ok,
            "max_witness_ratio": _ratio(self.witness, self.radius),
            "max_cone_ratio": _ratio(self.cone, self.radius),
            "violations": [list(s) for s in self.violations()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _ratio(a: np.ndarray, r: np.ndarray) -> float:
    pos = r > 0
    return float((a[pos] / r[pos]).max()) if pos.any() else 0.0


def alpha_for_c(c: float) -> float:
    """Multiplicative interleaving factor 2c/(c-1) of the sparse cover."""
    if c <= 1:
        raise ValueError("sparse certificates need c > 1")
    return 2 * c / (c - 1)


def c_for_alpha(alpha: float) -> float:
    """Inverse of alpha_for_c: alpha = 1 + eps gives c = (eps + 1)/(eps - 1)."""
    eps = alpha - 1
    if eps <= 1:
        raise ValueError("alpha must exceed 2")
    return (eps + 1) / (eps - 1)


def _choose_landmarks(d: np.ndarray, lm: LandmarkSequence, rows: np.ndarray, vals: np.ndarray, c: float):
    """Nearest landmark to the first vertex among the prefix of length i + 1,
    with i the largest index such that lambda_i >= r/(c - 1)."""
    radii = np.asarray(lm.radii, dtype=np.float64)
    order = np.asarray(lm.order)
    n = len(order)
    out = rows[:, 0].copy()
    pos = vals > 0
    if not pos.any():
        return out
    t = vals[pos] / (c - 1)
    # radii[0] = inf and radii is non-increasing
    i = np.searchsorted(-radii[: n + 1], -t, side="right") - 1
    i = np.clip(i, 0, n - 1)
    dist = d[rows[pos, 0]][:, order]
    allowed = np.arange(n)[None, :] <= i[:, None]
    dist = np.where(allowed, dist, np.inf)
    out[pos] = order[np.argmin(dist, axis=1)]
    return out


def sparse_certify(space: DissimilaritySpace, landmarks: LandmarkSequence, c: float, max_dim: int = 2,
                   r_max: float = math.inf, cover: Cover | None = None) -> SparseCertificate:
    """Certify every simplex of diameter <= r_max against the sparse bounds."""
    alpha = alpha_for_c(c)
    if len(landmarks) != space.n:
        raise ValueError("sparse certificates need a full greedy permutation")
    cover = cover or landmark_cover(space, landmarks, c)
    member = cover.membership()
    full = rips(space, r_max=r_max, max_dim=max_dim)
    d = space.d
    chosen = []
    simplices, radius, lmk, wit, ins, cone = [], [], [], [], [], []
    for k, rows in enumerate(full.simplices):
        vals = full.values[k]
        ell = _choose_landmarks(d, landmarks, rows, vals, c)
        chosen.append(ell)
        w = d[rows, ell[:, None]].max(axis=1)
        inside = member[ell[:, None], rows].all(axis=1)
        cl = np.zeros(rows.shape[0])
        for size in range(1, k + 2):
            for sub in combinations(range(k + 1), size):
                loc = full.find(size - 1, rows[:, sub])
                cl = np.maximum(cl, d[chosen[size - 1][loc], ell])
        simplices.extend(tuple(int(v) for v in r) for r in rows)
        radius.append(vals)
        lmk.append(ell)
        wit.append(w)
        ins.append(inside)
        cone.append(cl)
    cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.empty(0, dt))
    return SparseCertificate(float(c), alpha, simplices, cat(radius, np.float64), cat(lmk, np.int64),
                             cat(wit, np.float64), cat(ins, bool), cat(cone, np.float64))


# -- interleaving at the barcode level ---------------------------------------


@dataclass(frozen=True)
class RegimeResult:
    label: str
    r_star: float
    factor: float
    dims: dict
    passed: bool
    note: str = ""


@dataclass(frozen=True)
class InterleavingReport:
    regimes: list
    beyond: str

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.regimes)

    def regime(self, label: str) -> RegimeResult:
        for r in self.regimes:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "regimes": [{"label": r.label, "r_star": _fmt(r.r_star), "factor": r.factor,
                         "dims": {str(k): v for k, v in r.dims.items()}, "passed": r.passed,
                         "note": r.note} for r in self.regimes],
            "beyond": self.beyond,
        }


def _clip(bars: np.ndarray, limit: float):
    """Keep bars born by ``limit``; deaths past it become (limit, open)."""
    bars = bars[bars[:, 0] <= limit]
    open_ = bars[:, 1] > limit
    deaths = np.where(open_, limit, bars[:, 1])
    return bars[:, 0], deaths, open_


def _leq(a, a_open, b, b_open):
    """(a, open flag) <= (b, open flag) where an open value sits just above it."""
    return (a < b) | ((a == b) & (~a_open | b_open))


def match_bars(full: np.ndarray, covered: np.ndarray, r_star: float, factor: float, rel_tol: float = 1e-9):
    """Bipartite feasibility of the truncated one-sided interleaving.

    Full bars (b, d) are clipped to [0, r_star] and covered bars to
    [0, factor * r_star]. A full bar may be matched to a covered bar
    (b', d') when b <= b' <= factor * b and d <= d' <= factor * d, and a bar
    with death beyond ``factor`` times its birth must be matched.
    Returns ``(ok, unmatched)`` where ``unmatched`` counts forced bars left
    without a partner.
    """
    if math.isinf(r_star):
        lim_f = lim_c = math.inf
    else:
        lim_f, lim_c = r_star, factor * r_star
    fb, fd, fo = _clip(np.asarray(full, dtype=np.float64).reshape(-1, 2), lim_f)
    cb, cd, co = _clip(np.asarray(covered, dtype=np.float64).reshape(-1, 2), lim_c)
    nf, nc = len(fb), len(cb)
    slack = 1 + rel_tol
    must_f = ~_leq(fd, fo, factor * fb * slack, np.zeros(nf, bool))
    must_c = ~_leq(cd, co, factor * cb * slack, np.zeros(nc, bool))
    inf_f, inf_c = np.isinf(fd), np.isinf(cd)
    ok_birth = (fb[:, None] <= cb[None, :] * slack) & (cb[None, :] <= factor * fb[:, None] * slack)
    with np.errstate(invalid="ignore"):
        lo = _leq(fd[:, None], fo[:, None], cd[None, :] * slack, co[None, :]) | (inf_c[None, :])
        hi = _leq(cd[None, :], co[None, :], factor * fd[:, None] * slack, fo[:, None]) | inf_f[:, None]
    both_inf = inf_f[:, None] & inf_c[None, :]
    lo = np.where(inf_f[:, None], both_inf, lo)
    hi = np.where(inf_c[None, :], both_inf, hi)
    adj = ok_birth & lo & hi
    # left: full bars then diagonal copies of covered bars; right: covered bars then copies of full bars
    size = nf + nc
    a = np.zeros((size, size), dtype=bool)
    a[:nf, :nc] = adj
    a[np.flatnonzero(~must_f), nc + np.flatnonzero(~must_f)] = True
    a[nf + np.flatnonzero(~must_c), np.flatnonzero(~must_c)] = True
    a[nf:, nc:] = True
    if size == 0:
        return True, 0
    match = maximum_bipartite_matching(csr_matrix(a), perm_type="column")
    unmatched = int(np.sum(match < 0))
    return unmatched == 0, unmatched


def interleaving_check(full: Barcode, covered: Barcode, report: ThresholdReport | Sequence[float],
                       dim: int | None = None, r_max: float = math.inf) -> InterleavingReport:
    """Barcode consequences of the (id, alpha) interleaving per regime.

    ``report`` supplies R1, R2, R3 (a ThresholdReport or a triple). Regime
    R1 uses factor 1, R2 factor 2 and R3 factor 3; each regime is examined
    up to ``min(R, r_max / factor)`` so the covered complex is exact where
    needed. Past R3 no interleaving is claimed.
    """
    if full.p != covered.p:
        raise ValueError("barcodes were computed over different fields")
    if full.max_hom_dim != covered.max_hom_dim:
        raise ValueError("barcodes were computed through different dimensions")
    if isinstance(report, ThresholdReport):
        rs = (report.R1, report.R2, report.R3)
    else:
        rs = tuple(float(x) for x in report)
    dims = range(full.max_hom_dim + 1) if dim is None else [dim]
    out = []
    for label, r, factor in zip(("R1", "R2", "R3"), rs, (1.0, 2.0, 3.0)):
        r_star = min(r, r_max / factor)
        note = "" if r_star == r else f"truncated to r_max/{factor:g}"
        if r_star < 0:
            out.append(RegimeResult(label, r_star, factor, {}, True, "empty regime"))
            continue
        per = {}
        for k in dims:
            ok, unmatched = match_bars(full.in_dim(k), covered.in_dim(k), r_star, factor)
            per[k] = {"passed": ok, "unmatched": unmatched}
        out.append(RegimeResult(label, r_star, factor, per, all(v["passed"] for v in per.values()), note))
    beyond = "past R3 an interleaving may not exist; no claim is made"
    return InterleavingReport(out, beyond)
