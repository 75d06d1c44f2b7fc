import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster.vq import kmeans2

from neucgc.clustering import (
    MetricsReport,
    best_matching,
    clustering_accuracy,
    contingency,
    evaluate,
    kmeans,
)


def blobs(rng, n_per=30, centers=((0, 0), (10, 0), (0, 10))):
    x = np.vstack([rng.standard_normal((n_per, 2)) + c for c in centers])
    y = np.repeat(np.arange(len(centers)), n_per)
    return x, y


def brute_force_acc(pred, truth):
    classes = int(max(pred.max(), truth.max())) + 1
    return max(
        np.mean(np.array(perm)[pred] == truth)
        for perm in itertools.permutations(range(classes))
    )


class TestKMeans:
    def test_separated_blobs(self, rng):
        x, y = blobs(rng)
        res = kmeans(x, 3, seed=0)
        assert clustering_accuracy(res.assignments, y) == 1.0
        for c in range(3):
            np.testing.assert_allclose(res.centroids[c], x[res.assignments == c].mean(axis=0))

    def test_deterministic(self, rng):
        x, _ = blobs(rng)
        a, b = kmeans(x, 3, seed=4), kmeans(x, 3, seed=4)
        assert np.array_equal(a.assignments, b.assignments)
        assert a.inertia == b.inertia

    def test_inertia_monotone(self, rng):
        x = rng.standard_normal((200, 5))
        hist = kmeans(x, 6, seed=1, n_init=1).inertia_history
        assert all(b <= a * (1 + 1e-12) for a, b in zip(hist, hist[1:]))

    def test_no_empty_clusters_with_duplicates(self):
        x = np.vstack([np.zeros((10, 2)), np.ones((2, 2))])
        res = kmeans(x, 4, seed=0)
        assert np.unique(res.assignments).size == 4

    def test_inertia_close_to_scipy(self, rng):
        x = rng.standard_normal((150, 4))
        ours = kmeans(x, 5, seed=0).inertia
        best_ref = np.inf
        for s in range(10):
            cent, lab = kmeans2(x, 5, minit="++", seed=s)
            best_ref = min(best_ref, float(((x - cent[lab]) ** 2).sum()))
        assert ours <= best_ref * 1.05

    def test_too_many_clusters(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 2)), 4)


class TestMetrics:
    def test_perfect_under_relabelling(self):
        truth = np.array([0, 0, 1, 1, 2, 2])
        m = evaluate(np.array([2, 2, 0, 0, 1, 1]), truth)
        assert (m.acc, m.nmi, m.ari, m.f1) == pytest.approx((1.0, 1.0, 1.0, 1.0))

    def test_hand_computed(self):
        truth = np.array([0, 0, 0, 1, 1, 1])
        pred = np.array([0, 0, 1, 1, 1, 1])
        m = evaluate(pred, truth)
        assert m.acc == pytest.approx(5 / 6)
        # class 0: P=1, R=2/3; class 1: P=3/4, R=1
        assert m.f1 == pytest.approx((0.8 + 6 / 7) / 2)

    def test_more_clusters_than_classes(self):
        truth = np.array([0, 0, 1, 1])
        pred = np.array([0, 1, 2, 2])
        np.testing.assert_array_equal(best_matching(pred, truth), [0, -1, 1, 1])
        assert clustering_accuracy(pred, truth) == 0.75

    def test_contingency(self):
        table = contingency([5, 5, 7], [0, 1, 1])
        np.testing.assert_array_equal(table, [[1, 1], [0, 1]])

    @given(st.integers(2, 5), st.integers(0, 2**16))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariance_and_brute_force(self, c, seed):
        rng = np.random.default_rng(seed)
        truth = rng.integers(0, c, 25)
        pred = rng.integers(0, c, 25)
        base = evaluate(pred, truth)
        assert base.acc == pytest.approx(brute_force_acc(pred, truth))
        for perm in itertools.permutations(range(c)):
            m = evaluate(np.array(perm)[pred], truth)
            assert (m.acc, m.nmi, m.ari, m.f1) == pytest.approx((base.acc, base.nmi, base.ari, base.f1))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(np.zeros(3, int), np.zeros(4, int))

    def test_report_formatting(self):
        r = MetricsReport(0.77123, 0.59, 0.5, 0.7)
        assert r.as_percent() == {"acc": 77.1, "nmi": 59.0, "ari": 50.0, "f1": 70.0}
        assert '"acc": 77.1' in r.to_json()
