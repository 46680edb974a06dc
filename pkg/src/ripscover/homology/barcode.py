"""Barcodes, persistence diagrams, Betti numbers and acyclicity checks."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from ..complex import FilteredComplex
from ..errors import DimensionError
from .field import check_prime
from .reduction import boundary_matrix, reduce, reduce_coboundary


def _fmt(x: float):
    return "inf" if math.isinf(x) else float(x)


def _parse(x) -> float:
    return math.inf if isinstance(x, str) and x.lower() in ("inf", "+inf", "infinity") else float(x)


@dataclass(frozen=True)
class Barcode:
    """Multiset of (dim, birth, death) intervals; death may be +inf.

    ``horizon`` is the largest filtration value of the source complex and is
    used to measure essential bars. Zero-length intervals dropped during
    construction are kept in ``zero_length`` for diagnostics.
    """

    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    p: int = 2
    max_hom_dim: int = 0
    horizon: float = 0.0
    zero_length: np.ndarray = field(default_factory=lambda: np.empty((0, 3)), repr=False)

    def __post_init__(self):
        d = np.asarray(self.dims, dtype=np.int64).reshape(-1)
        b = np.asarray(self.births, dtype=np.float64).reshape(-1)
        e = np.asarray(self.deaths, dtype=np.float64).reshape(-1)
        if not (len(d) == len(b) == len(e)):
            raise ValueError("dims, births and deaths must have equal length")
        if np.any(e < b):
            raise ValueError("every interval needs birth <= death")
        order = np.lexsort((e, b, d))
        for name, arr in (("dims", d[order]), ("births", b[order]), ("deaths", e[order])):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_intervals(cls, intervals, p: int = 2, max_hom_dim: int | None = None, horizon: float | None = None):
        iv = [(int(k), float(b), float(d)) for k, b, d in intervals]
        arr = np.array(iv, dtype=np.float64).reshape(-1, 3)
        keep = arr[:, 1] < arr[:, 2]
        if max_hom_dim is None:
            max_hom_dim = int(arr[:, 0].max()) if len(arr) else 0
        if horizon is None:
            finite = arr[:, 1:][np.isfinite(arr[:, 1:])]
            horizon = float(finite.max()) if finite.size else 0.0
        return cls(arr[keep, 0], arr[keep, 1], arr[keep, 2], p=p, max_hom_dim=max_hom_dim,
                   horizon=horizon, zero_length=arr[~keep])

    def __len__(self):
        return len(self.dims)

    @property
    def intervals(self) -> list:
        return [(int(k), float(b), float(d)) for k, b, d in zip(self.dims, self.births, self.deaths)]

    def in_dim(self, k: int) -> np.ndarray:
        """(m, 2) array of (birth, death) in dimension k."""
        sel = self.dims == k
        return np.stack([self.births[sel], self.deaths[sel]], axis=1)

    def essential_counts(self) -> list[int]:
        return [int(np.sum((self.dims == k) & np.isinf(self.deaths))) for k in range(self.max_hom_dim + 1)]

    def betti_at(self, t: float) -> list[int]:
        """Ranks of H_k at parameter t for k = 0..max_hom_dim."""
        alive = (self.births <= t) & (t < self.deaths)
        return [int(np.sum(alive & (self.dims == k))) for k in range(self.max_hom_dim + 1)]

    def persistence(self) -> np.ndarray:
        """d - b with essential bars measured up to the horizon."""
        d = np.where(np.isinf(self.deaths), max(self.horizon, 0.0), self.deaths)
        return np.maximum(d - self.births, 0.0)

    def prominent_mask(self, gamma: float = 0.5) -> np.ndarray:
        """Essential bars, plus bars whose persistence is at least gamma times
        the largest persistence in their dimension."""
        pers = self.persistence()
        mask = np.isinf(self.deaths).copy()
        for k in np.unique(self.dims):
            sel = self.dims == k
            top = pers[sel].max()
            mask[sel] |= (pers[sel] >= gamma * top) & (top > 0)
        return mask

    def prominent_counts(self, gamma: float = 0.5) -> list[int]:
        mask = self.prominent_mask(gamma)
        return [int(np.sum(mask & (self.dims == k))) for k in range(self.max_hom_dim + 1)]

    def prominent(self, gamma: float = 0.5, dim: int | None = None) -> np.ndarray:
        """(m, 3) array of prominent (dim, birth, death), optionally in one dimension."""
        mask = self.prominent_mask(gamma)
        if dim is not None:
            mask &= self.dims == dim
        return np.stack([self.dims[mask], self.births[mask], self.deaths[mask]], axis=1)

    def diagram(self) -> "PersistenceDiagram":
        return PersistenceDiagram.from_barcode(self)

    def restrict_dims(self, max_dim: int) -> "Barcode":
        sel = self.dims <= max_dim
        return Barcode(self.dims[sel], self.births[sel], self.deaths[sel], self.p, min(max_dim, self.max_hom_dim),
                       self.horizon)

    def same_intervals(self, other: "Barcode") -> bool:
        return (np.array_equal(self.dims, other.dims) and np.array_equal(self.births, other.births)
                and np.array_equal(self.deaths, other.deaths))

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "max_hom_dim": self.max_hom_dim,
            "horizon": _fmt(self.horizon),
            "intervals": [{"dim": k, "birth": _fmt(b), "death": _fmt(d)} for k, b, d in self.intervals],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, doc: dict) -> "Barcode":
        iv = [(r["dim"], _parse(r["birth"]), _parse(r["death"])) for r in doc["intervals"]]
        arr = np.array(iv, dtype=np.float64).reshape(-1, 3)
        mhd = doc.get("max_hom_dim", int(arr[:, 0].max()) if len(arr) else 0)
        hz = _parse(doc["horizon"]) if "horizon" in doc else None
        if hz is None:
            fin = arr[:, 1:][np.isfinite(arr[:, 1:])]
            hz = float(fin.max()) if fin.size else 0.0
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], p=int(doc["p"]), max_hom_dim=int(mhd), horizon=hz)

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def read_json(cls, path) -> "Barcode":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dim", "birth", "death"])
        for k, b, d in self.intervals:
            w.writerow([k, repr(b), "inf" if math.isinf(d) else repr(d)])
        return buf.getvalue()

    def to_svg(self, title: str = "", size: int = 360) -> str:
        return diagram_svg(self, title=title, size=size)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Per-dimension finite points and essential births (lossless view of a barcode)."""

    points: dict
    essential: dict
    p: int = 2

    @classmethod
    def from_barcode(cls, bc: Barcode) -> "PersistenceDiagram":
        pts, ess = {}, {}
        for k in range(bc.max_hom_dim + 1):
            iv = bc.in_dim(k)
            fin = np.isfinite(iv[:, 1])
            pts[k] = iv[fin]
            ess[k] = np.sort(iv[~fin, 0])
        return cls(pts, ess, bc.p)

    @classmethod
    def from_arrays(cls, points: dict, essential: dict | None = None, p: int = 2):
        pts = {k: np.asarray(v, dtype=np.float64).reshape(-1, 2) for k, v in points.items()}
        ess = {k: np.sort(np.asarray(v, dtype=np.float64).reshape(-1)) for k, v in (essential or {}).items()}
        return cls(pts, ess, p)

    def finite(self, k: int) -> np.ndarray:
        return self.points.get(k, np.empty((0, 2)))

    def essentials(self, k: int) -> np.ndarray:
        return self.essential.get(k, np.empty(0))

    def to_barcode(self) -> Barcode:
        iv = []
        for k, pts in self.points.items():
            iv += [(k, b, d) for b, d in pts]
        for k, bs in self.essential.items():
            iv += [(k, b, math.inf) for b in bs]
        dims = list(self.points) + list(self.essential)
        return Barcode.from_intervals(iv, p=self.p, max_hom_dim=max(dims) if dims else 0)


class ReducedBetti(NamedTuple):
    betti: tuple
    empty: bool


def _require_dims(complex: FilteredComplex, max_hom_dim: int) -> None:
    if max_hom_dim < 0:
        raise ValueError("max_hom_dim must be nonnegative")
    if complex.max_dim is not None and complex.max_dim < max_hom_dim + 1:
        raise DimensionError(
            f"homology through dimension {max_hom_dim} needs cells through dimension {max_hom_dim + 1}; "
            f"the complex was built with max_dim={complex.max_dim}"
        )


def barcode(complex: FilteredComplex, p: int = 2, max_hom_dim: int = 1, method: str = "cohomology",
            clearing: bool = True) -> Barcode:
    """Persistence barcode of a filtered complex over F_p through ``max_hom_dim``.

    ``method`` is "cohomology" (reduce the anti-transposed coboundary,
    dimensions ascending) or "homology" (boundary columns, dimensions
    descending). Both give identical intervals.
    """
    p = check_prime(p)
    _require_dims(complex, max_hom_dim)
    if method not in ("cohomology", "homology"):
        raise ValueError(f"unknown method {method!r}")
    bm = boundary_matrix(complex, p)
    if method == "cohomology":
        cob = bm.anti_transpose()
        del bm
        red = reduce_coboundary(cob, clearing=clearing, max_hom_dim=max_hom_dim)
        del cob
    else:
        red = reduce(bm, clearing=clearing, max_hom_dim=max_hom_dim)
        del bm
    vals = complex.order_value
    cdims = complex.order_dim
    iv_d = [cdims[red.pairs[:, 0]], cdims[red.essential]]
    iv_b = [vals[red.pairs[:, 0]], vals[red.essential]]
    iv_e = [vals[red.pairs[:, 1]], np.full(len(red.essential), np.inf)]
    dims = np.concatenate(iv_d)
    births = np.concatenate(iv_b)
    deaths = np.concatenate(iv_e)
    keep = (dims <= max_hom_dim) & (births < deaths)
    zero = (dims <= max_hom_dim) & (births == deaths)
    horizon = float(vals.max()) if len(vals) else 0.0
    if math.isfinite(complex.r_max):
        horizon = max(horizon, complex.r_max)
    zl = np.stack([dims[zero], births[zero], deaths[zero]], axis=1).astype(np.float64)
    return Barcode(dims[keep], births[keep], deaths[keep], p=p, max_hom_dim=max_hom_dim, horizon=horizon,
                   zero_length=zl)


def reduced_betti(complex: FilteredComplex, t: float, p: int = 2, max_hom_dim: int = 1) -> ReducedBetti:
    """Reduced Betti numbers of the subcomplex at parameter t."""
    bc = barcode(complex, p, max_hom_dim)
    betti = bc.betti_at(t)
    if betti[0] == 0:
        return ReducedBetti(tuple(0 for _ in betti), True)
    betti[0] -= 1
    return ReducedBetti(tuple(betti), False)


def reduced_intervals(bc: Barcode) -> np.ndarray:
    """(m, 3) intervals of reduced homology: the oldest H_0 bar is removed."""
    arr = np.stack([bc.dims, bc.births, bc.deaths], axis=1)
    h0 = np.flatnonzero((bc.dims == 0) & np.isinf(bc.deaths))
    if h0.size:
        oldest = h0[np.argmin(bc.births[h0])]
        arr = np.delete(arr, oldest, axis=0)
    return arr


def check_alpha_acyclic(complex: FilteredComplex, alpha: Callable[[float], float] | None = None, p: int = 2,
                        max_hom_dim: int = 1):
    """True when every reduced interval (b, d) satisfies d <= alpha(b).

    Returns ``(ok, witness)`` where the witness is a violating (dim, birth,
    death) interval or None.
    """
    alpha = alpha or (lambda t: t)
    bc = barcode(complex, p, max_hom_dim)
    for k, b, d in reduced_intervals(bc):
        if d > alpha(b):
            return False, (int(k), float(b), float(d))
    return True, None


def diagram_svg(bc: Barcode, title: str = "", size: int = 360) -> str:
    """Persistence diagram as a standalone SVG scatter plot.

    Births on x, deaths on y, the diagonal as a line and essential points on
    a band above a dashed line at the top.
    """
    pad = 36
    band = 24
    fin = np.concatenate([bc.births, bc.deaths[np.isfinite(bc.deaths)]])
    top = float(fin.max()) if fin.size else 1.0
    top = top if top > 0 else 1.0
    span = size - 2 * pad
    sx = lambda v: pad + span * v / top
    sy = lambda v: size - pad - span * v / top
    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + band}" '
        f'viewBox="0 {-band} {size} {size + band}">',
        '<rect x="0" y="-24" width="100%" height="100%" fill="white"/>',
        f'<line x1="{sx(0):.2f}" y1="{sy(0):.2f}" x2="{sx(top):.2f}" y2="{sy(top):.2f}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad - band / 2:.2f}" x2="{size - pad}" y2="{pad - band / 2:.2f}" '
        'stroke="red" stroke-dasharray="4,3"/>',
        f'<text x="{size / 2}" y="{size - 6}" font-size="11" text-anchor="middle">birth</text>',
        f'<text x="10" y="{size / 2}" font-size="11" transform="rotate(-90 10 {size / 2})" '
        'text-anchor="middle">death</text>',
    ]
    if title:
        out.append(f'<text x="{size / 2}" y="-8" font-size="12" text-anchor="middle">{title}</text>')
    for k, b, d in bc.intervals:
        y = pad - band if math.isinf(d) else sy(d)
        out.append(f'<circle cx="{sx(b):.2f}" cy="{y:.2f}" r="3" fill="{colours[k % len(colours)]}" '
                   f'fill-opacity="0.7"><title>H{k} ({b:.4g}, {d:.4g})</title></circle>')
    for k in range(bc.max_hom_dim + 1):
        out.append(f'<text x="{size - pad - 40}" y="{pad + 14 * (k + 1)}" font-size="11" '
                   f'fill="{colours[k % len(colours)]}">H{k}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
