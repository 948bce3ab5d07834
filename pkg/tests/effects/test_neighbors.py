import logging

import numpy as np
import pytest

from acee.effects import build_neighbor_index, knn_query
from acee.utils.error_handling import DomainError, EstimationError


def _brute_force(points, labels, query, arm, N, keys):
    members = [i for i in range(len(labels)) if labels[i] == arm]
    ranked = sorted(members, key=lambda i: (float(np.sum((points[i] - query) ** 2)), keys[i]))
    return ranked[:N]


def test_nearest_controls_of_a_query():
    points = np.array([[0.0], [1.0], [5.0], [3.0]])
    labels = np.array([0, 0, 1, 0])
    assert knn_query(points, labels, [0.9], 0, 2).tolist() == [1, 0]


def test_n_at_least_arm_size_returns_whole_arm():
    points = np.array([[0.0], [1.0], [5.0], [3.0]])
    labels = np.array([0, 0, 1, 0])
    assert knn_query(points, labels, [2.9], 0, 10).tolist() == [3, 1, 0]


def test_duplicate_points_break_ties_by_key():
    points = np.zeros((4, 2))
    labels = np.array([1, 1, 1, 1])
    assert knn_query(points, labels, [0.0, 0.0], 1, 2).tolist() == [0, 1]
    assert knn_query(points, labels, [0.0, 0.0], 1, 2, tie_keys=np.array([9, 7, 8, 6])).tolist() == [3, 1]


def test_query_matches_brute_force():
    gen = np.random.default_rng(7)
    for _ in range(200):
        n = int(gen.integers(2, 30))
        points = gen.integers(-3, 4, (n, 2)).astype(float)
        labels = gen.integers(0, 2, n)
        labels[0] = 1
        query = gen.integers(-3, 4, 2).astype(float)
        N = int(gen.integers(1, 6))
        keys = gen.permutation(n)
        expected = _brute_force(points, labels, query, 1, N, keys)
        assert knn_query(points, labels, query, 1, N, tie_keys=keys).tolist() == expected


def test_index_matches_per_unit_queries():
    gen = np.random.default_rng(8)
    for _ in range(20):
        n = int(gen.integers(4, 40))
        F = gen.integers(-2, 3, (n, 2)).astype(float)
        D = gen.integers(0, 2, n)
        D[0], D[1] = 0, 1
        ids = gen.permutation(n) + 100
        index = build_neighbor_index(F, D, 3, ids, standardize=False)
        for arm in (0, 1):
            for i in range(n):
                expected = knn_query(F, D, F[i], arm, 3, tie_keys=ids)
                np.testing.assert_array_equal(index.neighbors[arm][i], expected)


def test_matching_counts_are_conserved():
    gen = np.random.default_rng(9)
    n = 57
    D = gen.integers(0, 2, n)
    index = build_neighbor_index(gen.standard_normal((n, 3)), D, 4)
    assert index.counts.sum() == n * (index.n_neighbors[0] + index.n_neighbors[1])
    for arm in (0, 1):
        assert index.counts[D == arm].sum() == n * index.n_neighbors[arm]
        assert np.all(D[index.neighbors[arm]] == arm)


def test_excluding_self():
    gen = np.random.default_rng(10)
    n = 30
    D = gen.integers(0, 2, n)
    D[:2] = [0, 1]
    index = build_neighbor_index(gen.standard_normal((n, 2)), D, 3, include_self=False)
    for i in range(n):
        assert i not in index.neighbors[D[i]][i]
    assert not index.include_self


def test_n_is_clipped_to_the_arm(caplog):
    D = np.array([0, 0, 0, 1, 1, 1, 1, 1])
    F = np.arange(8.0)[:, None]
    with caplog.at_level(logging.WARNING, logger="acee"):
        index = build_neighbor_index(F, D, 5, include_self=False)
    assert index.n_neighbors == {0: 2, 1: 4}
    assert "clipping" in caplog.text


def test_argument_errors():
    F = np.zeros((3, 1))
    with pytest.raises(EstimationError):
        build_neighbor_index(F, np.array([1, 1, 1]), 1)
    with pytest.raises(EstimationError):
        build_neighbor_index(F, np.array([0, 1, 1]), 1, include_self=False)
    with pytest.raises(DomainError):
        build_neighbor_index(F, np.array([0, 1, 1]), 0)
    with pytest.raises(EstimationError):
        knn_query(F, np.array([1, 1, 1]), [0.0], 0, 1)
