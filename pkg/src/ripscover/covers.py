"""Covers of a finite vertex set: construction, refinement and nerves."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CoverageError
from .metric import DissimilaritySpace, LandmarkSequence


@dataclass(frozen=True)
class Cover:
    """Named index sets whose union is {0, ..., n-1}. Sets are sorted int arrays."""

    sets: tuple
    names: tuple
    n: int

    def __init__(self, sets, n: int | None = None, names=None, check: bool = True):
        arrs = tuple(np.unique(np.asarray(s, dtype=np.int64)) for s in sets)
        for a in arrs:
            a.setflags(write=False)
        if n is None:
            n = int(max(a.max() for a in arrs if a.size) + 1) if arrs else 0
        if names is None:
            names = tuple(f"U{i}" for i in range(len(arrs)))
        names = tuple(str(x) for x in names)
        if len(names) != len(arrs):
            raise ValueError("one name per set is required")
        if len(set(names)) != len(names):
            raise ValueError("cover set names must be unique")
        object.__setattr__(self, "sets", arrs)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "n", int(n))
        if check:
            self.validate()

    def validate(self) -> None:
        if not self.sets:
            raise CoverageError("cover has no sets")
        covered = np.zeros(self.n, dtype=bool)
        for name, s in zip(self.names, self.sets):
            if s.size == 0:
                raise CoverageError(f"cover set {name} is empty")
            if s[0] < 0 or s[-1] >= self.n:
                raise CoverageError(f"cover set {name} has indices outside 0..{self.n - 1}")
            covered[s] = True
        if not covered.all():
            missing = int(np.flatnonzero(~covered)[0])
            raise CoverageError(f"point {missing} is not covered", point=missing)

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i):
        return self.sets[i]

    def membership(self) -> np.ndarray:
        """Boolean (n, number of sets) incidence matrix."""
        m = np.zeros((self.n, len(self.sets)), dtype=bool)
        for j, s in enumerate(self.sets):
            m[s, j] = True
        return m

    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.sets])

    def to_json(self) -> dict:
        return {"n": self.n, "sets": {name: s.tolist() for name, s in zip(self.names, self.sets)}}

    @classmethod
    def from_json(cls, doc: dict) -> "Cover":
        names = list(doc["sets"].keys())
        return cls([doc["sets"][k] for k in names], n=doc.get("n"), names=names)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def read(cls, path) -> "Cover":
        with open(Path(path)) as fh:
            return cls.from_json(json.load(fh))


def trivial_cover(n: int) -> Cover:
    return Cover([np.arange(n)], n=n, names=["X"])


def pullback_cover(values: Sequence[float], intervals: Sequence[tuple]) -> Cover:
    """Set j holds the points whose value lies in the closed interval ``intervals[j]``."""
    v = np.asarray(values, dtype=np.float64)
    sets = [np.flatnonzero((v >= lo) & (v <= hi)) for lo, hi in intervals]
    covered = np.zeros(v.size, dtype=bool)
    for s in sets:
        covered[s] = True
    if not covered.all():
        i = int(np.flatnonzero(~covered)[0])
        raise CoverageError(f"point {i} with value {v[i]!r} lies in no interval", point=i)
    keep = [j for j, s in enumerate(sets) if s.size]
    return Cover([sets[j] for j in keep], n=v.size, names=[f"I{j}" for j in keep])


def interval_cover(values: Sequence[float], count: int = 8, overlap: float = 0.25) -> list[tuple]:
    """``count`` equal intervals over the range of ``values``, each widened so
    that neighbours share a fraction ``overlap`` of an interval's length."""
    if count < 1:
        raise ValueError("count must be positive")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    step = (hi - lo) / count
    pad = 0.5 * overlap * step / (1 - overlap)
    out = []
    for j in range(count):
        a = lo + j * step - (pad if j else 0.0)
        b = lo + (j + 1) * step + (pad if j < count - 1 else 0.0)
        out.append((a, hi if j == count - 1 else b))
    return out


def circular_pullback_cover(angles: Sequence[float], arcs: int = 8, overlap: float = 0.25) -> Cover:
    """Pull back ``arcs`` equal overlapping sectors of the circle.

    Sector j is centred at ``2*pi*(j + 0.5)/arcs`` and has angular width
    ``(2*pi/arcs) / (1 - overlap)``, so adjacent sectors share a fraction
    ``overlap`` of their width.
    """
    if arcs < 3:
        raise ValueError("at least 3 arcs are needed to cover a circle")
    if not 0 < overlap < 1:
        raise ValueError("overlap must lie in (0, 1)")
    a = np.mod(np.asarray(angles, dtype=np.float64), 2 * np.pi)
    step = 2 * np.pi / arcs
    half = 0.5 * step / (1 - overlap)
    sets = []
    for j in range(arcs):
        centre = step * (j + 0.5)
        delta = np.abs(np.angle(np.exp(1j * (a - centre))))
        s = np.flatnonzero(delta <= half)
        if s.size == 0:
            raise CoverageError(f"sector {j} captures no points")
        sets.append(s)
    return Cover(sets, n=a.size, names=[f"A{j}" for j in range(arcs)])


def knn_cover(space: DissimilaritySpace, k: int) -> Cover:
    """One set per point: the point and its k nearest neighbours (ties to smaller index)."""
    n = space.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n = {n}")
    sets = []
    for x in range(n):
        row = space.d[x].copy()
        row[x] = -np.inf
        nbrs = np.argsort(row, kind="stable")[: k + 1]
        sets.append(nbrs)
    return Cover(sets, n=n, names=[f"N{x}" for x in range(n)])


def landmark_cover(space: DissimilaritySpace, landmarks: LandmarkSequence, c: float = 1.0) -> Cover:
    """Sparse cover from a full greedy permutation.

    U_x collects every landmark l inserted at position m with
    d(l, x) <= c * lambda_i for some i >= max(m, 1). Since the radii are
    non-increasing the loosest test is at i = max(m, 1).
    """
    if c < 1:
        raise ValueError("c must be at least 1")
    n = space.n
    if len(landmarks) != n:
        raise ValueError("landmark cover needs a full greedy permutation of the points")
    order = np.asarray(landmarks.order)
    radii = np.asarray(landmarks.radii)
    m = np.arange(n)
    thresh = c * radii[np.maximum(m, 1)]
    # rows: landmarks in insertion order; columns: points
    inside = space.d[order] <= thresh[:, None]
    sets = [np.sort(order[inside[:, x]]) for x in range(n)]
    return Cover(sets, n=n, names=[f"L{x}" for x in range(n)])


@dataclass(frozen=True)
class RefinedCover:
    """All distinct nonempty intersections of a cover.

    ``families[i]`` lists every original set containing ``sets[i]`` (the
    largest generating family); ``arity[i]`` is the smallest number of
    original sets whose intersection gives ``sets[i]``.
    """

    sets: tuple
    families: tuple
    arity: tuple
    n: int

    def __len__(self):
        return len(self.sets)

    def as_cover(self) -> Cover:
        return Cover(self.sets, n=self.n, names=[f"V{i}" for i in range(len(self.sets))], check=False)

    def contains(self, i: int, j: int) -> bool:
        """True when sets[j] is a subset of sets[i]."""
        return bool(np.isin(self.sets[j], self.sets[i], assume_unique=True).all())


def refine(cover: Cover, max_arity: int | None = None) -> RefinedCover:
    """Close a cover under nonempty intersection, merging equal contents."""
    member = cover.membership()
    nsets = len(cover)
    masks = [member[:, j] for j in range(nsets)]
    seen: dict[bytes, int] = {}
    contents, arity = [], []
    frontier = []
    for j in range(nsets):
        key = np.packbits(masks[j]).tobytes()
        if key not in seen:
            seen[key] = len(contents)
            contents.append(masks[j])
            arity.append(1)
            frontier.append(len(contents) - 1)
    level = 1
    while frontier and (max_arity is None or level < max_arity):
        level += 1
        nxt = []
        for idx in frontier:
            base = contents[idx]
            for j in range(nsets):
                w = base & member[:, j]
                if not w.any():
                    continue
                key = np.packbits(w).tobytes()
                if key in seen:
                    continue
                seen[key] = len(contents)
                contents.append(w)
                arity.append(level)
                nxt.append(len(contents) - 1)
        frontier = nxt
    sets = tuple(np.flatnonzero(w) for w in contents)
    families = tuple(tuple(np.flatnonzero(member[s].all(axis=0)).tolist()) for s in sets)
    return RefinedCover(sets, families, tuple(arity), cover.n)


@dataclass(frozen=True)
class NerveComplex:
    """Families of cover sets (sorted index tuples) with nonempty common intersection.

    ``simplices[k]`` is an int array of shape (count, k + 1).
    """

    simplices: tuple
    n_sets: int
    max_dim: int

    def __len__(self):
        return sum(len(s) for s in self.simplices)

    def simplex_set(self) -> set:
        return {tuple(int(v) for v in row) for arr in self.simplices for row in arr}

    def to_filtered_complex(self):
        from .complex import FilteredComplex

        return FilteredComplex(
            [np.asarray(s) for s in self.simplices],
            [np.zeros(len(s)) for s in self.simplices],
            max_dim=self.max_dim,
            n_vertices=max(self.n_sets, 1),
        )


def nerve(cover, max_dim: int = 2, max_simplices: int | None = None) -> NerveComplex:
    """Nerve of a cover up to ``max_dim``.

    Families are grown one set at a time (largest index last); a family is
    only extended when its own intersection is nonempty, so every face of a
    produced simplex is already present.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    sets = cover.sets if hasattr(cover, "sets") else cover
    n = cover.n if hasattr(cover, "n") else int(max(int(np.max(s)) for s in sets) + 1)
    m = len(sets)
    member = np.zeros((m, n), dtype=bool)
    for j, s in enumerate(sets):
        member[j, np.asarray(s, dtype=np.int64)] = True
    bits = np.packbits(member, axis=1)
    nonempty = bits.any(axis=1)
    verts = np.flatnonzero(nonempty)
    simplices = [verts.reshape(-1, 1).astype(np.int64)]
    inter = bits[verts]
    total = len(verts)
    for _ in range(1, max_dim + 1):
        prev = simplices[-1]
        if prev.shape[0] == 0:
            break
        rows, cols = [], []
        new_inter = []
        # extend each family by every larger set index
        for j in range(m):
            if not nonempty[j]:
                continue
            cand = prev[:, -1] < j
            if not cand.any():
                continue
            idx = np.flatnonzero(cand)
            w = inter[idx] & bits[j]
            ok = w.any(axis=1)
            rows.append(idx[ok])
            cols.append(np.full(int(ok.sum()), j, dtype=np.int64))
            new_inter.append(w[ok])
        if not rows:
            break
        r = np.concatenate(rows)
        cidx = np.concatenate(cols)
        nxt = np.hstack([prev[r], cidx[:, None]])
        order = np.lexsort(nxt.T[::-1])
        nxt = nxt[order]
        inter = np.concatenate(new_inter)[order]
        total += len(nxt)
        if max_simplices is not None and total > max_simplices:
            from .errors import ResourceCapError

            raise ResourceCapError("nerve exceeds simplex cap", {"simplices": total})
        simplices.append(nxt)
    while len(simplices) < max_dim + 1:
        simplices.append(np.empty((0, len(simplices) + 1), dtype=np.int64))
    return NerveComplex(tuple(simplices), m, max_dim)
