import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripscover.complex import FilteredComplex, rips
from ripscover.errors import DimensionError, IntegrityError
from ripscover.homology import (
    Barcode,
    Fp,
    PersistenceDiagram,
    barcode,
    bottleneck,
    boundary_matrix,
    check_alpha_acyclic,
    finite_bottleneck,
    is_prime,
    rank_mod_p,
    reduce,
    reduced_betti,
    solve_mod_p,
)
from ripscover.metric import DissimilaritySpace, euclidean_dissimilarity

from oracles import betti_dense, bottleneck_exhaustive, reduced_betti_dense


def random_complex(rng, n=None, max_dim=3):
    """Random filtered complex: a random flag complex with random monotone values."""
    n = n or int(rng.integers(3, 13))
    if rng.random() < 0.5:
        sp = euclidean_dissimilarity(rng.random((n, 2)))
        return rips(sp, r_max=float(rng.uniform(0.2, 1.5)), max_dim=max_dim)
    cells = {(v,): float(rng.integers(0, 3)) for v in range(n)}
    keep = 0.6
    for k in range(1, max_dim + 1):
        for s in itertools.combinations(range(n), k + 1):
            faces = [s[:i] + s[i + 1:] for i in range(k + 1)]
            if all(f in cells for f in faces) and rng.random() < keep:
                cells[s] = max(cells[f] for f in faces) + float(rng.integers(0, 3))
        keep *= 0.8
    return FilteredComplex.from_cells(cells.items(), max_dim=max_dim)


def test_field_arithmetic():
    assert is_prime(5) and not is_prime(9)
    a = Fp(3, 7)
    assert a * a.inverse() == 1
    assert (a / 3) == 1 and (a - 5) == 5 and a ** 6 == 1
    with pytest.raises(ValueError):
        Fp(1, 4)


def test_linear_algebra_mod_p():
    rng = np.random.default_rng(0)
    for p in (2, 3, 5):
        a = rng.integers(0, p, (5, 7))
        x = rng.integers(0, p, 7)
        b = a @ x % p
        sol = solve_mod_p(a, b, p)
        assert sol is not None and np.array_equal(a @ sol % p, b)
    assert rank_mod_p(np.array([[1, 1], [1, 1]]), 2) == 1
    assert solve_mod_p(np.array([[1, 0], [1, 0]]), np.array([0, 1]), 2) is None


def test_boundary_columns():
    cx = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((0, 1), 1)])
    bm = boundary_matrix(cx, 3)
    assert bm.column(0)[0].size == 0
    rows, vals = bm.column(2)
    assert rows.tolist() == [0, 1] and vals.tolist() == [2, 1]


def test_boundary_squared_zero():
    rng = np.random.default_rng(1)
    for p in (2, 3, 5):
        cx = random_complex(rng, 9)
        m = boundary_matrix(cx, p).to_dense()
        assert not (m @ m % p).any()


def test_missing_face_rejected():
    cx = FilteredComplex([np.array([[0], [1]]), np.array([[0, 1]]), np.array([[0, 1, 2]])],
                         [np.zeros(2), np.ones(1), np.ones(1)], check=False)
    with pytest.raises(IntegrityError):
        boundary_matrix(cx, 2)


def test_reduce_trivial_cases():
    cx = FilteredComplex.from_cells([((0,), 0), ((1,), 0)])
    red = reduce(boundary_matrix(cx, 2))
    assert len(red.pairs) == 0 and len(red.essential) == 2
    cx = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((0, 1), 1)])
    red = reduce(boundary_matrix(cx, 2))
    assert red.pairs.tolist() == [[1, 2]] and red.essential.tolist() == [0]


def test_cycle_graph_circle():
    n = 6
    cells = [((i,), 0.0) for i in range(n)] + [(tuple(sorted((i, (i + 1) % n))), 1.0) for i in range(n)]
    bc = barcode(FilteredComplex.from_cells(cells, max_dim=2), 2, 1)
    assert bc.essential_counts() == [1, 1]


def test_equilateral_zero_length_dropped():
    d = np.ones((3, 3)) - np.eye(3)
    bc = barcode(rips(DissimilaritySpace(d), r_max=1, max_dim=2), 2, 1)
    assert bc.betti_at(1.0) == [1, 0]
    assert len(bc.in_dim(1)) == 0 and len(bc.zero_length) > 0


def test_dimension_coverage_error():
    cx = rips(euclidean_dissimilarity(np.random.default_rng(0).random((5, 2))), max_dim=1)
    with pytest.raises(DimensionError):
        barcode(cx, 2, 1)


def test_random_rips_betti_oracle():
    rng = np.random.default_rng(2)
    sp = euclidean_dissimilarity(rng.random((20, 2)))
    cx = rips(sp, r_max=0.45, max_dim=2)
    bc = barcode(cx, 2, 1)
    for t in np.unique(cx.order_value):
        cells = [s for s, v in cx.cells if v <= t]
        assert bc.betti_at(t) == betti_dense(cells, 2, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3, 5]))
def test_methods_and_clearing_agree(seed, p):
    cx = random_complex(np.random.default_rng(seed))
    ref = barcode(cx, p, 2, method="homology", clearing=False)
    for method in ("homology", "cohomology"):
        for clearing in (False, True):
            assert barcode(cx, p, 2, method=method, clearing=clearing).same_intervals(ref)


def test_reduced_betti():
    simplex = FilteredComplex.from_cells([((i,), 0) for i in range(3)] + [((0, 1), 0), ((0, 2), 0), ((1, 2), 0),
                                                                          ((0, 1, 2), 0)])
    assert reduced_betti(simplex, 0, 2, 1).betti == (0, 0)
    two = FilteredComplex.from_cells([((0,), 0), ((1,), 0)], max_dim=1)
    assert reduced_betti(two, 0, 2, 0).betti == (1,)
    rb = reduced_betti(two, -1, 2, 0)
    assert rb.empty and rb.betti == (0,)
    rng = np.random.default_rng(3)
    for _ in range(10):
        cx = random_complex(rng, 8)
        t = float(np.median(cx.order_value))
        cells = [s for s, v in cx.cells if v <= t]
        assert list(reduced_betti(cx, t, 3, 2).betti) == reduced_betti_dense(cells, 3, 2)


def test_alpha_acyclic():
    cone = FilteredComplex.from_cells([((0,), 0), ((1,), 0), ((2,), 0), ((0, 1), 0), ((0, 2), 0), ((1, 2), 1),
                                       ((0, 1, 2), 1)])
    assert check_alpha_acyclic(cone)[0]
    n = 5
    cells = [((i,), 0.0) for i in range(n)] + [(tuple(sorted((i, (i + 1) % n))), 0.0) for i in range(n)]
    ok, w = check_alpha_acyclic(FilteredComplex.from_cells(cells, max_dim=2))
    assert not ok and w[0] == 1 and math.isinf(w[2])


def test_barcode_json_roundtrip(tmp_path):
    cx = random_complex(np.random.default_rng(4), 9)
    bc = barcode(cx, 3, 2)
    bc.write_json(tmp_path / "b.json")
    back = Barcode.read_json(tmp_path / "b.json")
    assert back.same_intervals(bc) and back.p == 3 and back.max_hom_dim == 2
    assert bc.diagram().to_barcode().same_intervals(bc)
    assert bc.to_csv().startswith("dim,birth,death")
    assert bc.to_svg().startswith("<svg")


def test_prominence_rule():
    bc = Barcode.from_intervals([(0, 0, math.inf), (1, 0, 1.0), (1, 0.2, 0.6), (1, 0.1, 0.3), (2, 0.5, 0.6)],
                                horizon=2.0)
    assert bc.prominent_counts(0.5) == [1, 1, 1]
    assert bc.prominent_counts(0.3) == [1, 2, 1]


def test_bottleneck_basic():
    a = PersistenceDiagram.from_arrays({0: [[0, 2]]})
    e = PersistenceDiagram.from_arrays({0: np.empty((0, 2))})
    assert bottleneck(a, a, 0) == 0
    assert bottleneck(a, e, 0) == 1
    f = PersistenceDiagram.from_arrays({0: []}, {0: [0.0]})
    g = PersistenceDiagram.from_arrays({0: []}, {0: [0.0, 1.0]})
    assert math.isinf(bottleneck(f, g, 0))


def test_bottleneck_exhaustive_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = np.sort(rng.random((int(rng.integers(0, 6)), 2)), axis=1)
        b = np.sort(rng.random((int(rng.integers(0, 6)), 2)), axis=1)
        assert abs(finite_bottleneck(a, b) - bottleneck_exhaustive(a, b)) < 1e-9
