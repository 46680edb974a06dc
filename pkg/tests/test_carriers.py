import math

import numpy as np
import pytest

from ripscover.bounds import thresholds
from ripscover.carriers import (
    FilteredCarrier,
    ShiftChainMap,
    check_carrier_acyclic,
    extend_chain_map,
    homology_maps_equal,
    identity_carrier,
    verify_chain_map,
    vertex_map,
    witness_carrier,
)
from ripscover.complex import FilteredComplex, rips, rips_cover
from ripscover.covers import knn_cover
from ripscover.errors import AcyclicityViolation, IntegrityError
from ripscover.metric import euclidean_dissimilarity


def cone_instance(rng, p, seeds=(1, 2), alpha=None):
    """Random source complex, a cone target and a monotone cone carrier."""
    n = int(rng.integers(4, 9))
    src = rips(euclidean_dissimilarity(rng.random((n, 2))), r_max=math.inf, max_dim=2)
    m = int(rng.integers(3, 8))
    base = rips(euclidean_dissimilarity(rng.random((m, 2))), r_max=0.6, max_dim=2)
    apex = m
    cells = list(base.cells) + [((apex,), 0.0)] + [(c + (apex,), v) for c, v in base.cells if len(c) <= 2]
    tgt = FilteredComplex.from_cells(cells, max_dim=3, n_vertices=m + 1)
    W = {v: set(rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False).tolist()) | {apex}
         for v in range(n)}
    vs = [set().union(*[W[v] for v in src.cell(g)[0]]) for g in range(len(src))]
    car = FilteredCarrier.from_vertex_sets(src, tgt, vs)
    maps = []
    for seed in seeds:
        r2 = np.random.default_rng(seed)
        asg = {}
        for v in range(n):
            s = src.value((v,))
            asg[v] = int(r2.choice([w for w in sorted(W[v]) if tgt.value((w,)) <= s]))
        init = vertex_map(src, tgt, asg, p)
        maps.append(extend_chain_map(car, init, p, 2))
    return car, maps


def test_identity_extension():
    sp = euclidean_dissimilarity(np.random.default_rng(0).random((8, 2)))
    cx = rips(sp, r_max=math.inf, max_dim=2)
    car = identity_carrier(cx)
    f = extend_chain_map(car, vertex_map(cx, cx, {v: v for v in range(8)}), 2, 2)
    assert verify_chain_map(f, car)
    for g in range(len(cx)):
        rows, vals = f.image(g)
        assert rows.tolist() == [g] and vals.tolist() == [1]


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cone_extension(p):
    rng = np.random.default_rng(p)
    for _ in range(4):
        car, (f, g) = cone_instance(rng, p)
        assert check_carrier_acyclic(car, p=p)[0]
        assert verify_chain_map(f, car) and verify_chain_map(g, car)
        assert homology_maps_equal(f, g)


def test_corrupted_coefficient_detected():
    car, (f, _) = cone_instance(np.random.default_rng(3), 3)
    g = next(g for g in sorted(f.images, reverse=True) if f.images[g][0].size)
    rows, vals = f.images[g]
    f.images[g] = (rows, (vals + 1) % 3)
    assert not verify_chain_map(f, car)


def test_hand_built_triangle_map():
    tri = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((2,), 0), ((0, 1), 1), ((0, 2), 1), ((1, 2), 1),
                                      ((0, 1, 2), 1)])
    # collapse vertex 2 onto vertex 1: edges (0,2) -> (0,1), (1,2) -> 0, triangle -> 0
    img = {tri.index((0,)): [(0,)], tri.index((1,)): [(1,)], tri.index((2,)): [(1,)],
           tri.index((0, 1)): [(0, 1)], tri.index((0, 2)): [(0, 1)]}
    images = {g: (np.array([tri.index(c) for c in cs]), np.array([1])) for g, cs in img.items()}
    fmap = ShiftChainMap(tri, tri, images, 2)
    assert verify_chain_map(fmap)


def test_circle_carrier_not_acyclic():
    n = 5
    circle = [((i,), 0.0) for i in range(n)] + [(tuple(sorted((i, (i + 1) % n))), 0.0) for i in range(n)]
    tgt = FilteredComplex.from_cells(circle, max_dim=2)
    src = FilteredComplex.from_cells([((0,), 0.0)], max_dim=2)
    car = FilteredCarrier(src, tgt, [np.arange(len(tgt))])
    ok, witness = check_carrier_acyclic(car)
    assert not ok and witness[1][0] == 1


def test_extension_fails_in_hollow_carrier():
    n = 4
    circle = [((i,), 0.0) for i in range(n)] + [(tuple(sorted((i, (i + 1) % n))), 0.0) for i in range(n)]
    tgt = FilteredComplex.from_cells(circle, max_dim=2)
    src = FilteredComplex.from_cells([((0,), 0.0), ((1,), 0.0), ((0, 1), 0.0)], max_dim=2)
    # vertices 0 and 1 map to opposite corners; the edge's carrier omits both connecting paths
    cells = [np.array([tgt.index((0,))]), np.array([tgt.index((2,))]),
             np.array([tgt.index((0,)), tgt.index((2,))])]
    car = FilteredCarrier(src, tgt, cells)
    init = vertex_map(src, tgt, {0: 0, 1: 2})
    with pytest.raises(AcyclicityViolation) as exc:
        extend_chain_map(car, init, 2, 1)
    assert exc.value.cell == (0, 1)


def test_carrier_must_be_closed_and_monotone():
    tgt = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((0, 1), 0)])
    src = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((0, 1), 0)])
    with pytest.raises(IntegrityError):
        FilteredCarrier(src, tgt, [[0], [1], [2]])
    with pytest.raises(IntegrityError):
        FilteredCarrier(src, tgt, [[0, 1], [1], [1]])


def test_identity_beta_keeps_shift():
    car, (f, _) = cone_instance(np.random.default_rng(4), 2)
    for g in range(len(car.source)):
        assert f.level(g) == car.source.order_value[g]


def test_witness_carrier_two_r():
    rng = np.random.default_rng(5)
    for _ in range(4):
        n = int(rng.integers(8, 15))
        sp = euclidean_dissimilarity(rng.random((n, 2)))
        cov = knn_cover(sp, 3)
        rep = thresholds(sp, cov, max_dim=2)
        full = rips(sp, r_max=rep.R2, max_dim=2)
        cc = rips_cover(sp, cov, r_max=math.inf, max_dim=3)
        car = witness_carrier(sp, cov, full, cc)
        assert check_carrier_acyclic(car, beta=lambda t: 2 * t, p=2, max_hom_dim=1)[0]


def test_chain_map_json():
    car, (f, _) = cone_instance(np.random.default_rng(6), 2)
    doc = f.to_json()
    assert len(doc["cells"]) == len(car.source)
