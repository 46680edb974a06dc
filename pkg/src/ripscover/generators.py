"""Synthetic samples of the flat torus and of d-dimensional Klein bottles of image patches."""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .metric import PointCloud, euclidean_dissimilarity, greedy_landmarks

DIRECTION_SEED = 20240229
DIRECTION_POOL = 4000


@dataclass(frozen=True)
class TorusSpiralConfig:
    n: int = 500
    winding: int = 25

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.winding < 1:
            raise ValueError("winding must be positive")


def flat_torus_spiral(config: TorusSpiralConfig | None = None, **kw) -> PointCloud:
    """Points (cos 2 pi t, sin 2 pi t, cos 2 pi w t, sin 2 pi w t) with t = i/n."""
    cfg = config or TorusSpiralConfig(**kw)
    t = np.arange(cfg.n) / cfg.n
    u = 2 * np.pi * t
    v = 2 * np.pi * cfg.winding * t
    return PointCloud(np.stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)], axis=1))


@dataclass(frozen=True)
class KleinPatchConfig:
    """Patch model p(x; theta, phi) = cos(theta) (x.phi)^2 + sin(theta) (x.phi).

    ``phi_range`` is the angular range of the circle of directions when d = 2.
    The default pi samples each line through the origin once; with 2*pi the
    patches at (theta, phi + pi) and (pi - theta, phi) coincide in pairs. ``directions`` counts directions; for d = 3 they are
    greedy landmarks from a seeded uniform sample of the sphere.
    """

    d: int = 2
    thetas: int = 20
    directions: int = 50
    grid: tuple = ()
    normalize: bool = True
    phi_range: float = np.pi
    seed: int = DIRECTION_SEED
    pool: int = DIRECTION_POOL

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError("only d = 2 and d = 3 are supported")
        if not self.grid:
            object.__setattr__(self, "grid", (-1.0, 0.0, 1.0) if self.d == 2 else (-1.0, -0.5, 0.0, 0.5, 1.0))
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.thetas < 1 or self.directions < 1:
            raise ValueError("thetas and directions must be positive")

    @classmethod
    def for_dimension(cls, d: int, **kw) -> "KleinPatchConfig":
        if d == 3:
            kw.setdefault("thetas", 20)
            kw.setdefault("directions", 150)
        return cls(d=d, **kw)

    def to_json(self) -> dict:
        return asdict(self) | {"grid": list(self.grid)}


def grid_points(grid, d: int) -> np.ndarray:
    """All grid positions x in R^d, row-major with x_1 varying fastest."""
    g = np.asarray(grid, dtype=np.float64)
    combos = np.array(list(itertools.product(g, repeat=d)))
    # product varies the last factor fastest; reverse so x_1 is fastest
    return combos[:, ::-1]


def sphere_directions(count: int, pool: int = DIRECTION_POOL, seed: int = DIRECTION_SEED) -> np.ndarray:
    """``count`` greedy landmarks from ``pool`` seeded uniform points on S^2."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((pool, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    lm = greedy_landmarks(euclidean_dissimilarity(pts), seed=0, count=count)
    return pts[lm.order]


def klein_directions(cfg: KleinPatchConfig) -> np.ndarray:
    if cfg.d == 2:
        phi = cfg.phi_range * np.arange(cfg.directions) / cfg.directions
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return sphere_directions(cfg.directions, cfg.pool, cfg.seed)


def patch(x: np.ndarray, theta: float, phi: np.ndarray) -> np.ndarray:
    """Patch values at grid positions ``x`` (m, d)."""
    proj = x @ np.asarray(phi, dtype=np.float64)
    return np.cos(theta) * proj**2 + np.sin(theta) * proj


def klein_patches(config: KleinPatchConfig | None = None, **kw) -> PointCloud:
    """One flattened patch per (theta, phi), theta outer and phi inner."""
    cfg = config or KleinPatchConfig(**kw)
    x = grid_points(cfg.grid, cfg.d)
    phis = klein_directions(cfg)
    thetas = 2 * np.pi * np.arange(cfg.thetas) / cfg.thetas
    proj = phis @ x.T
    out = (np.cos(thetas)[:, None, None] * proj[None] ** 2 + np.sin(thetas)[:, None, None] * proj[None])
    out = out.reshape(-1, x.shape[0])
    if cfg.normalize:
        norms = np.linalg.norm(out, axis=1)
        if np.any(norms == 0):
            raise ValueError("a patch vanishes on the grid and cannot be normalized")
        out = out / norms[:, None]
    return PointCloud(out)


def klein_integral_homology(d: int) -> list:
    """Integral homology of K^d as (free rank, number of Z/2 summands) per degree."""
    if d < 1:
        raise ValueError("d must be positive")
    out = []
    for k in range(d + 1):
        if k == 0:
            out.append((1, 0))
        elif k == d and d % 2 == 1:
            out.append((1, 0))
        elif k == d - 1 and d % 2 == 0:
            out.append((1, 1))
        elif 0 < k < d - 1 and k % 2 == 1:
            out.append((0, 2))
        else:
            out.append((0, 0))
    return out


def expected_homology(space: str, d: int | None = None, p: int = 2) -> tuple:
    """Betti numbers over F_p of the torus ("T2") or the Klein bottle K^d ("Kd")."""
    from .homology.field import check_prime

    p = check_prime(p)
    if space == "T2":
        return (1, 2, 1)
    if space != "Kd" or d not in (2, 3):
        raise ValueError(f"unsupported space {space!r} with d={d!r}")
    integral = klein_integral_homology(d)
    betti = []
    for k, (free, tors) in enumerate(integral):
        # universal coefficients: Tor(H_{k-1}, F_p) adds torsion from one degree down
        below = integral[k - 1][1] if k else 0
        extra = (tors + below) if p == 2 else 0
        betti.append(free + extra)
    return tuple(betti)
