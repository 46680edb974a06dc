import math

import numpy as np
import pytest

from ripscover.complex import FilteredComplex, restrict_to, rips, rips_cover, subcomplex_at
from ripscover.covers import Cover, trivial_cover
from ripscover.errors import IntegrityError, ResourceCapError
from ripscover.metric import DissimilaritySpace, euclidean_dissimilarity

from oracles import cover_cells, rips_cells


def _equilateral():
    d = np.ones((3, 3)) - np.eye(3)
    return DissimilaritySpace(d)


def test_equilateral():
    cx = rips(_equilateral(), r_max=1, max_dim=2)
    assert cx.counts() == [3, 3, 1]
    assert list(cx.values[1]) == [1, 1, 1] and cx.values[2][0] == 1


def test_zero_radius_vertices_only():
    sp = euclidean_dissimilarity(np.random.default_rng(0).random((6, 2)))
    assert rips(sp, r_max=0, max_dim=2).counts()[:2] == [6, 0]


def test_rips_matches_oracle():
    rng = np.random.default_rng(1)
    for _ in range(5):
        sp = euclidean_dissimilarity(rng.random((10, 3)))
        r = float(rng.uniform(0.3, 1.2))
        cx = rips(sp, r_max=r, max_dim=3)
        assert cx.cell_dict() == rips_cells(sp.d, r, 3)


def test_rips_cover_matches_oracle():
    rng = np.random.default_rng(2)
    for _ in range(5):
        sp = euclidean_dissimilarity(rng.random((15, 2)))
        member = rng.random((15, 3)) < 0.5
        member[np.arange(15), rng.integers(0, 3, 15)] = True
        cov = Cover([np.flatnonzero(member[:, j]) for j in range(3)], n=15)
        cx = rips_cover(sp, cov, r_max=math.inf, max_dim=3)
        assert cx.cell_dict() == cover_cells(sp.d, cov.sets, math.inf, 3)


def test_trivial_cover_equals_rips():
    sp = euclidean_dissimilarity(np.random.default_rng(3).random((12, 2)))
    assert rips_cover(sp, trivial_cover(12), max_dim=3).same_cells(rips(sp, max_dim=3))


def test_disjoint_cover_never_mixes():
    sp = euclidean_dissimilarity(np.random.default_rng(4).random((4, 2)))
    cx = rips_cover(sp, Cover([[0, 1], [2, 3]], n=4), r_max=math.inf, max_dim=2)
    for s, _ in cx.cells:
        assert set(s) <= {0, 1} or set(s) <= {2, 3}


def test_subcomplex_and_restrict():
    cx = rips(_equilateral(), r_max=1, max_dim=2)
    assert len(subcomplex_at(cx, -1)) == 0
    assert subcomplex_at(cx, 5).same_cells(cx)
    assert subcomplex_at(cx, 0.5).counts()[0] == 3 and len(subcomplex_at(cx, 0.5)) == 3
    assert restrict_to(cx, [0, 1, 2]).same_cells(cx)
    assert restrict_to(cx, [1]).cells == [((1,), 0.0)]


def test_filtration_order_faces_first():
    sp = euclidean_dissimilarity(np.random.default_rng(5).random((15, 3)))
    cx = rips(sp, max_dim=3)
    for g in range(len(cx)):
        s, v = cx.cell(g)
        for i in range(len(s)) if len(s) > 1 else ():
            assert cx.index(s[:i] + s[i + 1:]) < g


def test_validate_rejects_bad_complexes():
    with pytest.raises(IntegrityError):
        FilteredComplex.from_cells([((0,), 0.0), ((0, 1), 1.0)])
    with pytest.raises(IntegrityError):
        FilteredComplex.from_cells([((0,), 2.0), ((1,), 0.0), ((0, 1), 1.0)])


def test_text_roundtrip(tmp_path):
    sp = euclidean_dissimilarity(np.random.default_rng(6).random((8, 2)))
    cx = rips(sp, max_dim=2)
    cx.write(tmp_path / "c.txt")
    assert FilteredComplex.read(tmp_path / "c.txt").same_cells(cx)


def test_resource_cap_reports_counts():
    sp = euclidean_dissimilarity(np.random.default_rng(7).random((30, 2)))
    with pytest.raises(ResourceCapError) as exc:
        rips(sp, r_max=math.inf, max_dim=3, max_cells=100)
    assert exc.value.counts


def test_thread_env_gives_same_complex(monkeypatch):
    sp = euclidean_dissimilarity(np.random.default_rng(8).random((40, 2)))
    cov = Cover([np.arange(0, 25), np.arange(15, 40)], n=40)
    monkeypatch.setenv("RIPSCOVER_THREADS", "1")
    a = rips_cover(sp, cov, max_dim=3)
    monkeypatch.setenv("RIPSCOVER_THREADS", "3")
    b = rips_cover(sp, cov, max_dim=3)
    assert a.same_cells(b)
