import itertools

import numpy as np
import pytest

from popseq.clustering import (
    ElbowCurve,
    ShapeMemory,
    _lloyd,
    assign_nearest,
    build_memory,
    elbow_scan,
    kmeans,
    lookup,
)

LINE = np.array([[0.0], [1.0], [9.0], [10.0]])


def brute_force_inertia(points, k):
    """Best SSE over every assignment of points to k non-empty clusters."""
    n = points.shape[0]
    best = np.inf
    for labels in itertools.product(range(k), repeat=n):
        labels = np.asarray(labels)
        if len(set(labels.tolist())) < k:
            continue
        sse = 0.0
        for j in range(k):
            members = points[labels == j]
            sse += ((members - members.mean(axis=0)) ** 2).sum()
        best = min(best, sse)
    return best


class TestKMeans:
    def test_line_matches_exhaustive_optimum(self):
        for k in (1, 2, 3, 4):
            result = kmeans(LINE, k, seed=0)
            assert result.inertia == pytest.approx(brute_force_inertia(LINE, k), abs=1e-9)

    def test_line_k2_inertia_one(self):
        result = kmeans(LINE, 2, seed=0)
        assert result.inertia == pytest.approx(1.0, abs=1e-12)
        # the split must be {0,1} vs {9,10}
        assert result.assignments[0] == result.assignments[1]
        assert result.assignments[2] == result.assignments[3]
        assert result.assignments[0] != result.assignments[2]

    def test_assignments_are_nearest(self):
        rng = np.random.default_rng(3)
        points = rng.random((60, 5))
        result = kmeans(points, 4, seed=1)
        np.testing.assert_array_equal(
            result.assignments, assign_nearest(points, result.centroids))

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        points = rng.random((40, 3))
        a = kmeans(points, 3, seed=9)
        b = kmeans(points, 3, seed=9)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        np.testing.assert_array_equal(a.assignments, b.assignments)
        assert a.inertia == b.inertia

    def test_restarts_never_hurt(self):
        rng = np.random.default_rng(11)
        points = rng.random((50, 2))
        single = kmeans(points, 5, seed=2, restarts=1)
        many = kmeans(points, 5, seed=2, restarts=10)
        assert many.inertia <= single.inertia + 1e-12

    def test_k_equals_n_reaches_zero(self):
        result = kmeans(LINE, 4, seed=0)
        assert result.inertia == pytest.approx(0.0, abs=1e-12)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            kmeans(LINE, 0)
        with pytest.raises(ValueError):
            kmeans(LINE, 5)

    def test_more_iterations_never_hurt(self):
        # same seeding, longer run: inertia must be non-increasing in max_iter
        rng = np.random.default_rng(13)
        points = rng.random((80, 4))
        inertias = [kmeans(points, 6, seed=3, restarts=1, max_iter=m, tol=0.0).inertia
                    for m in (1, 2, 5, 20, 100)]
        assert all(a >= b - 1e-9 for a, b in zip(inertias, inertias[1:]))

    def test_empty_cluster_reseeded(self):
        # two initial centroids far outside the data both start empty
        init = np.array([[0.5], [100.0], [200.0]])
        result = _lloyd(LINE, init, max_iter=50, tol=1e-6)
        assert len(set(result.assignments.tolist())) == 3
        assert result.inertia == pytest.approx(0.5, abs=1e-12)


class TestAssignNearest:
    def test_tie_goes_to_lowest_index(self):
        centroids = np.array([[0.0], [2.0]])
        labels = assign_nearest(np.array([[1.0]]), centroids)
        assert labels[0] == 0

    def test_basic(self):
        centroids = np.array([[0.0, 0.0], [10.0, 10.0]])
        points = np.array([[1.0, 1.0], [9.0, 9.0]])
        np.testing.assert_array_equal(assign_nearest(points, centroids), [0, 1])


class TestElbow:
    def test_non_increasing(self):
        rng = np.random.default_rng(21)
        points = np.sort(rng.random((40, 10)), axis=1)  # shape-slice-like rows
        curve = elbow_scan(points, (1, 10), seed=0, restarts=3)
        inertias = [v for _, v in curve.entries]
        assert all(a >= b - 1e-9 for a, b in zip(inertias, inertias[1:]))
        assert [k for k, _ in curve.entries] == list(range(1, 11))

    def test_line_curve_values(self):
        curve = elbow_scan(LINE, (1, 4), seed=0)
        inertias = [v for _, v in curve.entries]
        np.testing.assert_allclose(inertias, [82.0, 1.0, 0.5, 0.0], atol=1e-9)

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            elbow_scan(LINE, (3, 2))
        with pytest.raises(ValueError):
            elbow_scan(LINE, (1, 9))

    def test_csv(self, tmp_path):
        curve = ElbowCurve(((1, 82.0), (2, 1.0)))
        path = tmp_path / "elbow.csv"
        curve.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "K,inertia"
        assert lines[1].split(",")[0] == "1"
        assert float(lines[2].split(",")[1]) == 1.0


class TestMemory:
    def test_build_and_lookup(self):
        rng = np.random.default_rng(2)
        slices = np.sort(rng.random((30, 10)), axis=1)
        memory, labels = build_memory(slices, 3, seed=4, period_index=1)
        assert memory.period_index == 1
        assert memory.n_prototypes == 3
        assert memory.prototypes.shape == (3, 10)
        assert labels.shape == (30,)
        assert set(labels.tolist()) <= {0, 1, 2}
        for j in range(3):
            np.testing.assert_array_equal(lookup(memory, j), memory.prototypes[j])

    def test_lookup_out_of_range(self):
        memory = ShapeMemory(prototypes=np.ones((2, 5)))
        with pytest.raises(IndexError):
            lookup(memory, 2)
        with pytest.raises(IndexError):
            lookup(memory, -1)

    def test_prototypes_are_member_means(self):
        rng = np.random.default_rng(8)
        slices = rng.random((50, 6))
        memory, labels = build_memory(slices, 4, seed=0)
        for j in range(4):
            members = slices[labels == j]
            assert members.size > 0
            np.testing.assert_allclose(memory.prototypes[j], members.mean(axis=0), atol=1e-9)
