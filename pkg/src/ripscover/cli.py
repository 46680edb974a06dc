"""Command line front end: generate, cover, persist, thresholds, certify, compare."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .bounds import c_for_alpha, interleaving_check, sparse_certify, thresholds
from .complex import rips, rips_cover
from .covers import (
    Cover,
    circular_pullback_cover,
    interval_cover,
    knn_cover,
    landmark_cover,
    pullback_cover,
    trivial_cover,
)
from .errors import CoverageError, DimensionError, IntegrityError, ResourceCapError, RipsCoverError
from .generators import KleinPatchConfig, TorusSpiralConfig, flat_torus_spiral, klein_patches
from .homology.barcode import Barcode, barcode, diagram_svg
from .homology.bottleneck import bottleneck
from .metric import PointCloud, euclidean_dissimilarity, greedy_landmarks

log = logging.getLogger("ripscover")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RESOURCE = 4
THRESHOLD_CAP = 120


class UsageError(RipsCoverError):
    """Invalid combination of options."""


@dataclass
class ExperimentConfig:
    """Everything needed to rerun one experiment; round-trips through JSON."""

    generator: dict | None = None
    input: str | None = None
    cover: dict = field(default_factory=lambda: {"type": "trivial"})
    r_max: float | None = None
    max_hom_dim: int = 1
    p: int = 2
    out_dir: str = "."
    gamma: float = 0.5
    full: bool = False

    def to_json(self) -> dict:
        doc = asdict(self)
        if doc["r_max"] is not None and math.isinf(doc["r_max"]):
            doc["r_max"] = "inf"
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise UsageError(f"unknown config keys: {sorted(extra)}")
        doc = dict(doc)
        if doc.get("r_max") == "inf":
            doc["r_max"] = math.inf
        return cls(**doc)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        return cls.from_json(json.loads(text))


# -- shared helpers ----------------------------------------------------------


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _generate(spec: dict) -> PointCloud:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "torus":
        return flat_torus_spiral(TorusSpiralConfig(**spec))
    if kind == "klein":
        d = int(spec.pop("d", 2))
        return klein_patches(KleinPatchConfig.for_dimension(d, **spec))
    raise UsageError(f"unknown generator kind {kind!r}")


def _load_cloud(cfg: ExperimentConfig) -> PointCloud:
    if cfg.input:
        return PointCloud.read(cfg.input)
    if cfg.generator:
        return _generate(cfg.generator)
    raise UsageError("an input file or a generator spec is required")


def _column(cloud: PointCloud, i) -> np.ndarray:
    i = int(i)
    if not 0 <= i < cloud.points.shape[1]:
        raise UsageError(f"coordinate {i} out of range for {cloud.points.shape[1]}-dimensional points")
    return cloud.points[:, i]


def _angles(cloud: PointCloud, coords) -> np.ndarray:
    i, j = (coords or (0, 1))
    return np.arctan2(_column(cloud, j), _column(cloud, i))


def build_cover(cloud: PointCloud, space, spec: dict) -> Cover:
    """Cover from a spec {"type": ..., parameters}."""
    spec = dict(spec)
    kind = spec.get("type", "trivial")
    if kind == "trivial":
        return trivial_cover(space.n)
    if kind == "file":
        return Cover.read(spec["path"])
    if kind == "knn":
        return knn_cover(space, int(spec.get("k", 20)))
    if kind == "landmark":
        lm = greedy_landmarks(space, seed=int(spec.get("seed", 0)))
        return landmark_cover(space, lm, float(spec.get("c", 1.0)))
    if kind == "circular":
        return circular_pullback_cover(_angles(cloud, spec.get("coords")), int(spec.get("arcs", 8)),
                                       float(spec.get("overlap", 0.25)))
    if kind == "pullback":
        values = _column(cloud, spec.get("coord", 0))
        iv = interval_cover(values, int(spec.get("count", 8)), float(spec.get("overlap", 0.25)))
        return pullback_cover(values, iv)
    raise UsageError(f"unknown cover type {kind!r}")


def _flag_count_report(space, r_max: float) -> dict:
    """Exact vertex, edge and triangle counts of the full Rips complex at r_max."""
    a = (space.d <= r_max).astype(np.float64)
    np.fill_diagonal(a, 0)
    edges = int(a.sum() // 2)
    tri = int(round(np.trace(a @ a @ a) / 6))
    return {"0": space.n, "1": edges, "2": tri}


# -- subcommands -------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = {"kind": args.kind}
    if args.kind == "torus":
        spec.update(n=args.n, winding=args.winding)
    else:
        spec.update(d=args.d, normalize=not args.no_normalize)
        for key in ("thetas", "directions", "seed", "phi_range"):
            val = getattr(args, key)
            if val is not None:
                spec[key] = val
    cloud = _generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    cloud.write(out)
    meta = {"generator": spec, "n": cloud.n, "dim": cloud.dim}
    if args.kind == "klein":
        meta["config"] = KleinPatchConfig.for_dimension(spec["d"], **{k: v for k, v in spec.items()
                                                                      if k not in ("kind", "d")}).to_json()
    _write_json(out.with_name(out.name + ".meta.json"), meta)
    log.info("wrote %d points in R^%d to %s", cloud.n, cloud.dim, out)
    return EXIT_OK


def cmd_cover(args) -> int:
    cfg = _config(args)
    cloud = _load_cloud(cfg)
    space = euclidean_dissimilarity(cloud)
    cover = build_cover(cloud, space, cfg.cover)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    cover.write(out)
    sizes = cover.sizes()
    log.info("cover with %d sets, sizes %d..%d", len(cover), sizes.min(), sizes.max())
    return EXIT_OK


def cmd_persist(args) -> int:
    cfg = _config(args)
    cloud = _load_cloud(cfg)
    space = euclidean_dissimilarity(cloud)
    r_max = space.enclosing_radius() if cfg.r_max is None else cfg.r_max
    max_dim = cfg.max_hom_dim + 1
    max_cells = args.max_cells
    if cfg.full:
        cx = rips(space, r_max=r_max, max_dim=max_dim, max_cells=max_cells)
    else:
        cover = build_cover(cloud, space, cfg.cover)
        cx = rips_cover(space, cover, r_max=r_max, max_dim=max_dim, max_cells=max_cells)
    bc = barcode(cx, cfg.p, cfg.max_hom_dim)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "barcode.json", bc.to_json())
    (out / "barcode.csv").write_text(bc.to_csv())
    (out / "diagram.svg").write_text(diagram_svg(bc, title=f"F_{cfg.p}"))
    report = {
        "config": cfg.to_json(),
        "r_max": r_max,
        "counts": {"covered" if not cfg.full else "full": cx.counts(),
                   "full_low_dims": _flag_count_report(space, r_max)},
        "essential": bc.essential_counts(),
        "prominent": bc.prominent_counts(cfg.gamma),
    }
    if not cfg.full and cfg.cover.get("type") == "landmark" and float(cfg.cover.get("c", 1.0)) <= 1:
        report["certificate"] = "none: interleaving bounds for landmark covers need c > 1"
    _write_json(out / "report.json", report)
    log.info("cells %s, prominent %s", cx.counts(), report["prominent"])
    print(json.dumps({"prominent": report["prominent"], "essential": report["essential"]}))
    return EXIT_OK


def cmd_thresholds(args) -> int:
    cfg = _config(args)
    cloud = _load_cloud(cfg)
    if cloud.n > args.cap:
        raise ResourceCapError(
            f"threshold search is brute force; {cloud.n} points exceeds the cap of {args.cap} "
            "(subsample the input or raise --cap)", {"points": cloud.n, "cap": args.cap})
    space = euclidean_dissimilarity(cloud)
    cover = build_cover(cloud, space, cfg.cover)
    rep = thresholds(space, cover, max_dim=cfg.max_hom_dim + 1, p=cfg.p)
    doc = rep.to_json()
    _emit(args, doc)
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _config(args)
    c = c_for_alpha(args.alpha) if args.alpha is not None else float(cfg.cover.get("c", 0.0))
    if c <= 1:
        raise UsageError("sparse certificates need c > 1: the witness bound c r/(c-1) is unbounded at c = 1")
    cloud = _load_cloud(cfg)
    if cloud.n > args.cap:
        raise ResourceCapError(f"{cloud.n} points exceeds the cap of {args.cap}", {"points": cloud.n, "cap": args.cap})
    space = euclidean_dissimilarity(cloud)
    lm = greedy_landmarks(space, seed=int(cfg.cover.get("seed", 0)))
    r_max = math.inf if cfg.r_max is None else cfg.r_max
    cert = sparse_certify(space, lm, c, max_dim=cfg.max_hom_dim + 1, r_max=r_max)
    doc = cert.to_json()
    doc["alpha_from_c"] = f"alpha = 2c/(c-1) = {cert.alpha:.6g}; conversely c = (eps+1)/(eps-1) for alpha = 1+eps"
    _emit(args, doc)
    return EXIT_OK if cert.ok else 1


def cmd_compare(args) -> int:
    full = Barcode.read_json(args.full)
    covered = Barcode.read_json(args.covered)
    if full.p != covered.p:
        raise UsageError(f"barcodes use different fields (F_{full.p} and F_{covered.p})")
    if full.max_hom_dim != covered.max_hom_dim:
        raise UsageError("barcodes were computed through different dimensions")
    doc = {"bottleneck": {str(k): bottleneck(full.diagram(), covered.diagram(), k)
                          for k in range(full.max_hom_dim + 1)}}
    doc["bottleneck"] = {k: ("inf" if math.isinf(v) else v) for k, v in doc["bottleneck"].items()}
    if args.thresholds:
        with open(args.thresholds) as fh:
            t = json.load(fh)
        rs = [math.inf if t[k] == "inf" else (-math.inf if t[k] == "-inf" else float(t[k])) for k in ("R1", "R2", "R3")]
        r_max = math.inf if args.r_max is None else args.r_max
        doc["interleaving"] = interleaving_check(full, covered, rs, r_max=r_max).to_json()
    _emit(args, doc)
    return EXIT_OK


# -- argument handling -------------------------------------------------------


def _emit(args, doc) -> None:
    if getattr(args, "out", None):
        _write_json(Path(args.out), doc)
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))


def _cover_spec(args, base: dict) -> dict:
    spec = dict(base)
    if args.cover is not None:
        if args.cover != spec.get("type"):
            spec = {}
        spec["type"] = args.cover
    for key in ("k", "c", "seed", "arcs", "overlap", "count", "coord"):
        val = getattr(args, f"cover_{key}", None)
        if val is not None:
            spec[key] = val
    if args.cover_file:
        spec = {"type": "file", "path": args.cover_file}
    if getattr(args, "coords", None):
        spec["coords"] = list(args.coords)
    return spec


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.loads(fh.read())
    if args.input:
        cfg.input = args.input
        cfg.generator = None
    cfg.cover = _cover_spec(args, cfg.cover)
    for key in ("r_max", "max_hom_dim", "p", "out_dir", "gamma"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "full", False):
        cfg.full = True
    if args.save_config:
        Path(args.save_config).write_text(cfg.dumps() + "\n")
    return cfg


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--input", help="point cloud (CSV or JSON)")
    p.add_argument("--cover", choices=["trivial", "knn", "landmark", "circular", "pullback"])
    p.add_argument("--cover-file", help="cover JSON written by the cover command")
    p.add_argument("--k", dest="cover_k", type=int, help="neighbours for the knn cover")
    p.add_argument("--c", dest="cover_c", type=float, help="landmark cover parameter")
    p.add_argument("--seed", dest="cover_seed", type=int, help="first landmark index")
    p.add_argument("--arcs", dest="cover_arcs", type=int)
    p.add_argument("--overlap", dest="cover_overlap", type=float)
    p.add_argument("--count", dest="cover_count", type=int, help="intervals for the pullback cover")
    p.add_argument("--coord", dest="cover_coord", type=int, help="coordinate pulled back by the pullback cover")
    p.add_argument("--coords", type=int, nargs=2, help="coordinates whose angle drives the circular cover")
    p.add_argument("--r-max", type=float)
    p.add_argument("--max-hom-dim", type=int)
    p.add_argument("--p", type=int, help="prime field characteristic")
    p.add_argument("--gamma", type=float, help="prominence threshold")
    p.add_argument("--save-config", help="write the resolved config to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ripscover", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic point cloud")
    g.add_argument("kind", choices=["torus", "klein"])
    g.add_argument("--n", type=int, default=500)
    g.add_argument("--winding", type=int, default=25)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--thetas", type=int)
    g.add_argument("--directions", type=int)
    g.add_argument("--seed", type=int, help="seed of the sphere direction pool (d = 3)")
    g.add_argument("--phi-range", type=float, help="angular range of directions for d = 2")
    g.add_argument("--no-normalize", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cover", help="build a cover and write it as JSON")
    _add_experiment_args(c)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_cover)

    p = sub.add_parser("persist", help="barcode of the cover complex (or the full complex)")
    _add_experiment_args(p)
    p.add_argument("--full", action="store_true", help="use the full Rips complex")
    p.add_argument("--out-dir")
    p.add_argument("--max-cells", type=int, help="abort when the complex exceeds this many cells")
    p.set_defaults(func=cmd_persist)

    t = sub.add_parser("thresholds", help="R1, R2, R3 for a small space and cover")
    _add_experiment_args(t)
    t.add_argument("--cap", type=int, default=THRESHOLD_CAP)
    t.add_argument("--out")
    t.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("certify", help="sparse landmark cover certificates (c > 1)")
    _add_experiment_args(s)
    s.add_argument("--alpha", type=float, help="target factor; sets c = (eps+1)/(eps-1) with alpha = 1+eps")
    s.add_argument("--cap", type=int, default=THRESHOLD_CAP)
    s.add_argument("--out")
    s.set_defaults(func=cmd_certify)

    m = sub.add_parser("compare", help="bottleneck distances and interleaving regimes of two barcodes")
    m.add_argument("--full", required=True, help="barcode JSON of the full complex")
    m.add_argument("--covered", required=True, help="barcode JSON of the cover complex")
    m.add_argument("--thresholds", help="threshold JSON from the thresholds command")
    m.add_argument("--r-max", type=float)
    m.add_argument("--out")
    m.set_defaults(func=cmd_compare)
    return parser


def _fail(code: int, exc: Exception, **extra) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc)} | extra
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ResourceCapError as exc:
        return _fail(EXIT_RESOURCE, exc, counts=exc.counts)
    except CoverageError as exc:
        return _fail(EXIT_INPUT, exc, point=exc.point)
    except (UsageError, DimensionError) as exc:
        return _fail(EXIT_USAGE, exc)
    except (OSError, IntegrityError, json.JSONDecodeError, KeyError) as exc:
        return _fail(EXIT_INPUT, exc)
    except (ValueError, TypeError) as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
