"""Point clouds, dissimilarity spaces and greedy landmark sequences."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DimensionError

METRIC_TOL = 1e-9


@dataclass(frozen=True)
class PointCloud:
    """A finite set of points in R^dim, stored as an (n, dim) float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = _as_point_array(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    @classmethod
    def read(cls, path) -> "PointCloud":
        """Read a cloud from CSV (one point per row) or JSON ``{"points": [...]}``."""
        path = Path(path)
        if path.suffix.lower() == ".json":
            with open(path) as fh:
                doc = json.load(fh)
            return cls(doc["points"])
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                rows.append([float(v) for v in row])
        return cls(rows)

    def write(self, path) -> None:
        path = Path(path)
        if path.suffix.lower() == ".json":
            with open(path, "w") as fh:
                json.dump({"points": self.points.tolist()}, fh)
            return
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for p in self.points:
                writer.writerow([repr(float(v)) for v in p])


def _as_point_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.array(points, dtype=np.float64)
    else:
        rows = [list(p) for p in points]
        if len({len(r) for r in rows}) > 1:
            raise DimensionError("points have mismatched coordinate lengths")
        arr = np.array(rows, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 1)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise DimensionError(f"expected an (n, dim) array of points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DissimilaritySpace:
    """Symmetric nonnegative dissimilarity on {0, ..., n-1} with zero diagonal.

    ``is_metric`` records whether the triangle inequality is known to hold;
    ``None`` means it has not been checked (see :meth:`check_metric`).
    """

    d: np.ndarray
    is_metric: bool | None = None
    _checked: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = np.array(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionError(f"dissimilarity must be square, got shape {d.shape}")
        if d.shape[0] < 1:
            raise ValueError("dissimilarity space must contain at least one point")
        if np.any(np.diag(d) != 0):
            raise ValueError("dissimilarity must vanish on the diagonal")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("dissimilarity must be finite and nonnegative")
        if not np.array_equal(d, d.T):
            if not np.allclose(d, d.T, rtol=0, atol=1e-12):
                raise ValueError("dissimilarity must be symmetric")
            upper = np.triu(d)
            d = upper + upper.T
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __len__(self):
        return self.n

    def check_metric(self, tol: float = METRIC_TOL) -> bool:
        """Test the triangle inequality d(i,j) <= d(i,k) + d(k,j) + tol."""
        if tol not in self._checked:
            d = self.d
            ok = True
            for k in range(self.n):
                if np.any(d > d[:, k : k + 1] + d[k : k + 1, :] + tol):
                    ok = False
                    break
            self._checked[tol] = ok
        return self._checked[tol]

    @property
    def metric(self) -> bool:
        """Metric flag; checked lazily when it was not supplied."""
        if self.is_metric is None:
            return self.check_metric()
        return self.is_metric

    def enclosing_radius(self) -> float:
        """min over points of the max distance to any other point."""
        return float(self.d.max(axis=1).min())

    def write_csv(self, path) -> None:
        np.savetxt(path, self.d, delimiter=",", fmt="%.17g")


def euclidean_dissimilarity(cloud) -> DissimilaritySpace:
    """Pairwise Euclidean distances of a point cloud."""
    pts = cloud.points if isinstance(cloud, PointCloud) else _as_point_array(cloud)
    if pts.shape[0] < 1:
        raise ValueError("point cloud is empty")
    if pts.shape[0] == 1:
        return DissimilaritySpace(np.zeros((1, 1)), is_metric=True)
    # squareform(pdist) is exactly symmetric
    return DissimilaritySpace(squareform(pdist(pts)), is_metric=True)


def _index_array(indices: Iterable[int], n: int, what: str = "index set") -> np.ndarray:
    idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError(f"{what} must be nonempty")
    if idx.min() < 0 or idx.max() >= n:
        raise IndexError(f"{what} has indices outside 0..{n - 1}")
    return idx


def tuple_diameter(space: DissimilaritySpace, simplex: Sequence[int]) -> float:
    """Largest pairwise dissimilarity within a vertex tuple; 0 for a singleton."""
    idx = _index_array(simplex, space.n, "tuple")
    return float(space.d[np.ix_(idx, idx)].max())


def hausdorff(space: DissimilaritySpace, A: Sequence[int], B: Sequence[int]) -> float:
    """Hausdorff distance between two nonempty index sets."""
    a = _index_array(A, space.n, "A")
    b = _index_array(B, space.n, "B")
    sub = space.d[np.ix_(a, b)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


@dataclass(frozen=True)
class LandmarkSequence:
    """Greedy (farthest point) landmark order with its covering radii.

    ``radii[i]`` is the Hausdorff distance from the first ``i`` landmarks to
    the whole space, so ``radii[0] = inf`` and ``radii`` has ``len(order) + 1``
    entries. The last entry is 0 when every point is a landmark.
    """

    order: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        for name in ("order", "radii"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.order)

    def positions(self, n: int) -> np.ndarray:
        """Insertion position of each point, -1 for points that are not landmarks."""
        pos = np.full(n, -1, dtype=np.int64)
        pos[self.order] = np.arange(len(self.order))
        return pos


def greedy_landmarks(space: DissimilaritySpace, seed: int = 0, count: int | None = None) -> LandmarkSequence:
    """Farthest point sampling starting from ``seed``; ties go to the smallest index."""
    n = space.n
    if count is None:
        count = n
    if count > n:
        raise ValueError(f"cannot choose {count} landmarks from {n} points")
    if count < 1:
        raise ValueError("count must be positive")
    if not 0 <= seed < n:
        raise IndexError(f"seed {seed} outside 0..{n - 1}")
    d = space.d
    order = np.empty(count, dtype=np.int64)
    radii = np.empty(count + 1, dtype=np.float64)
    radii[0] = np.inf
    chosen = np.zeros(n, dtype=bool)
    order[0] = seed
    chosen[seed] = True
    mind = d[seed].copy()
    for i in range(1, count):
        radii[i] = mind.max()
        # argmax returns the first maximizer; chosen points are excluded so
        # zero-distance duplicates still get picked exactly once
        cand = np.where(chosen, -1.0, mind)
        j = int(np.argmax(cand))
        order[i] = j
        chosen[j] = True
        np.minimum(mind, d[j], out=mind)
    radii[count] = mind.max()
    return LandmarkSequence(order, radii)
