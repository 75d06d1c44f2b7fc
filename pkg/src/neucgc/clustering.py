"""K-means over embeddings and matching-based clustering metrics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, f1_score, normalized_mutual_info_score


@dataclass
class ClusterResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    seed: int
    n_iter: int = 0
    inertia_history: list = field(default_factory=list)


def _sq_dists(x, x_sq, centers):
    d = x_sq[:, None] - 2.0 * x @ centers.T + np.sum(centers**2, axis=1)[None, :]
    return np.maximum(d, 0.0)


def _greedy_plus_plus(x, x_sq, n_clusters, rng):
    n = x.shape[0]
    trials = 2 + int(np.log(n_clusters))
    centers = np.empty((n_clusters, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dists(x, x_sq, centers[:1]).ravel()
    for c in range(1, n_clusters):
        total = closest.sum()
        if total <= 0:
            cand = rng.integers(n, size=trials)
        else:
            cand = np.searchsorted(np.cumsum(closest), rng.random(trials) * total)
            cand = np.minimum(cand, n - 1)
        cand_d = np.minimum(closest[None, :], _sq_dists(x, x_sq, x[cand]).T)
        best = int(np.argmin(cand_d.sum(axis=1)))
        centers[c] = x[cand[best]]
        closest = cand_d[best]
    return centers


def _lloyd(x, x_sq, centers, max_iter, tol):
    n_clusters = centers.shape[0]
    history = []
    prev = None
    for it in range(1, max_iter + 1):
        d = _sq_dists(x, x_sq, centers)
        labels = np.argmin(d, axis=1)
        inertia = float(d[np.arange(x.shape[0]), labels].sum())
        history.append(inertia)
        counts = np.bincount(labels, minlength=n_clusters)
        # empty clusters take the point farthest from its current centroid
        for c in np.flatnonzero(counts == 0):
            point_d = d[np.arange(x.shape[0]), labels]
            # donors must keep at least one member
            point_d = np.where(counts[labels] > 1, point_d, -1.0)
            far = int(np.argmax(point_d))
            counts[labels[far]] -= 1
            labels[far] = c
            counts[c] = 1
            d[far, :] = 0.0
        onehot = np.zeros((n_clusters, x.shape[0]))
        onehot[labels, np.arange(x.shape[0])] = 1.0
        centers = (onehot @ x) / counts[:, None]
        if prev is not None and prev - inertia <= tol * max(prev, 1e-300):
            break
        prev = inertia
    diff = x - centers[labels]
    inertia = float(np.einsum("ij,ij->", diff, diff))
    history.append(inertia)
    return labels, centers, inertia, it, history


def kmeans(
    z,
    n_clusters: int,
    seed: int = 0,
    max_iter: int = 300,
    n_init: int = 10,
    tol: float = 1e-6,
) -> ClusterResult:
    """Lloyd iterations from greedy k-means++ seeds, best of ``n_init`` runs.

    Restart ``r`` uses the ``r``-th child of ``SeedSequence(seed)``; the lowest
    inertia wins and ties keep the earlier restart. Returned centroids are the
    means of their assigned points.
    """
    x = np.asarray(z, dtype=np.float64)
    n = x.shape[0]
    if n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    if n_clusters > n:
        raise ValueError(f"cannot form {n_clusters} clusters from {n} points")
    x_sq = np.einsum("ij,ij->i", x, x)
    best = None
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(max(1, n_init))):
        rng = np.random.default_rng(child)
        centers = _greedy_plus_plus(x, x_sq, n_clusters, rng)
        labels, centers, inertia, n_iter, hist = _lloyd(x, x_sq, centers, max_iter, tol)
        if best is None or inertia < best.inertia:
            best = ClusterResult(labels, centers, inertia, seed, n_iter, hist)
    return best


@dataclass
class MetricsReport:
    acc: float
    nmi: float
    ari: float
    f1: float

    def as_percent(self) -> dict:
        return {k: round(100.0 * v, 1) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.as_percent())


def contingency(pred, truth) -> np.ndarray:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    _, p = np.unique(pred, return_inverse=True)
    table = np.zeros((p.max() + 1, truth.max() + 1), dtype=np.int64)
    np.add.at(table, (p, truth), 1)
    return table


def best_matching(pred, truth) -> np.ndarray:
    """Map every predicted cluster id to a class id by maximizing agreement;
    clusters left unmatched map to -1."""
    pred = np.asarray(pred)
    clusters = np.unique(pred)
    table = contingency(pred, truth)
    # solve on rows in content order so tied optima do not depend on cluster ids
    order = np.lexsort(table.T[::-1])
    rows, cols = linear_sum_assignment(-table[order])
    lookup = dict(zip(clusters[order[rows]], cols))
    return np.array([lookup.get(c, -1) for c in pred], dtype=np.int64)


def clustering_accuracy(pred, truth) -> float:
    return float(np.mean(best_matching(pred, truth) == np.asarray(truth)))


def evaluate(pred, truth) -> MetricsReport:
    """ACC and macro-F1 under the optimal cluster-to-class matching, plus NMI
    and ARI."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction/label shape mismatch: {pred.shape} vs {truth.shape}")
    mapped = best_matching(pred, truth)
    classes = np.unique(truth)
    return MetricsReport(
        acc=float(np.mean(mapped == truth)),
        nmi=float(normalized_mutual_info_score(truth, pred)),
        ari=float(adjusted_rand_score(truth, pred)),
        f1=float(f1_score(truth, mapped, labels=classes, average="macro", zero_division=0)),
    )
