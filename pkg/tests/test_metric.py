import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripscover.errors import DimensionError
from ripscover.metric import (
    DissimilaritySpace,
    PointCloud,
    euclidean_dissimilarity,
    greedy_landmarks,
    hausdorff,
    tuple_diameter,
)


def test_single_point_zero_matrix():
    sp = euclidean_dissimilarity([[1.0, 2.0]])
    assert sp.d.shape == (1, 1) and sp.d[0, 0] == 0


def test_three_four_five():
    assert euclidean_dissimilarity([[0, 0], [3, 4]]).d[0, 1] == 5


def test_matches_double_loop():
    pts = np.random.default_rng(3).random((10, 4))
    d = euclidean_dissimilarity(pts).d
    for i in range(10):
        for j in range(10):
            assert abs(d[i, j] - np.sqrt(((pts[i] - pts[j]) ** 2).sum())) < 1e-12


def test_mismatched_lengths():
    with pytest.raises(DimensionError):
        euclidean_dissimilarity([[0, 0], [1, 2, 3]])


def test_dissimilarity_validation():
    with pytest.raises(ValueError):
        DissimilaritySpace(np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        DissimilaritySpace(np.array([[1.0]]))
    with pytest.raises(ValueError):
        DissimilaritySpace(np.array([[0, -1], [-1, 0]]))


def test_non_metric_flag():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    assert not DissimilaritySpace(d).metric
    assert euclidean_dissimilarity(np.random.default_rng(0).random((8, 2))).check_metric()


def test_tuple_diameter():
    sp = euclidean_dissimilarity([[0, 0], [3, 4], [1, 1], [7, 7]])
    assert tuple_diameter(sp, [2]) == 0
    assert tuple_diameter(sp, [0, 1]) == 5
    s = [0, 1, 2, 3]
    assert tuple_diameter(sp, s) == max(sp.d[a, b] for a in s for b in s)
    with pytest.raises(ValueError):
        tuple_diameter(sp, [])


def test_hausdorff():
    rng = np.random.default_rng(5)
    sp = euclidean_dissimilarity(rng.random((12, 2)))
    assert hausdorff(sp, [1, 2], [2, 1]) == 0
    sp2 = euclidean_dissimilarity([[0, 0], [3, 4]])
    assert hausdorff(sp2, [0], [1]) == 5
    for _ in range(20):
        a = rng.choice(12, size=rng.integers(1, 12), replace=False)
        b = rng.choice(12, size=rng.integers(1, 12), replace=False)
        oracle = max(max(min(sp.d[x, y] for y in b) for x in a), max(min(sp.d[x, y] for x in a) for y in b))
        assert hausdorff(sp, a, b) == pytest.approx(oracle, abs=1e-15)
    with pytest.raises(ValueError):
        hausdorff(sp, [], [1])


def test_greedy_collinear():
    sp = euclidean_dissimilarity([[0.0], [1.0], [10.0]])
    lm = greedy_landmarks(sp, seed=0)
    assert lm.order[1] == 2
    assert lm.radii[-1] == 0
    with pytest.raises(ValueError):
        greedy_landmarks(sp, count=4)


def test_greedy_radii_match_hausdorff():
    sp = euclidean_dissimilarity(np.random.default_rng(11).random((20, 3)))
    lm = greedy_landmarks(sp, seed=4)
    assert sorted(lm.order) == list(range(20))
    assert np.isinf(lm.radii[0])
    assert np.all(np.diff(lm.radii[1:]) <= 0)
    for i in range(1, 21):
        assert lm.radii[i] == pytest.approx(hausdorff(sp, lm.order[:i], range(20)), abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10_000))
def test_greedy_is_farthest_point(n, seed):
    pts = np.random.default_rng(seed).random((n, 2))
    sp = euclidean_dissimilarity(pts)
    lm = greedy_landmarks(sp, seed=seed % n)
    for i in range(1, n):
        dist = sp.d[lm.order[:i]].min(axis=0)
        assert dist[lm.order[i]] == dist.max()


def test_cloud_roundtrip(tmp_path):
    pc = PointCloud(np.random.default_rng(0).random((5, 3)))
    for name in ("a.csv", "a.json"):
        pc.write(tmp_path / name)
        assert np.array_equal(PointCloud.read(tmp_path / name).points, pc.points)
