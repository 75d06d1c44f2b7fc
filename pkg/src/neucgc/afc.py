"""High-confidence pseudo-labels, the high-confidence graph H and the adaptive
feature-consistency (AFC) neutral contrastive loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SELECTION_SCOPES = ("global", "cluster")


@dataclass
class HighConfidenceSet:
    node_ids: np.ndarray
    pseudo_labels: np.ndarray
    confidence_scores: np.ndarray


@dataclass
class HighConfidenceGraph:
    weights: np.ndarray

    @property
    def support_sets(self) -> list[np.ndarray]:
        return [np.flatnonzero(row > 0) for row in self.weights]

    def support_adjacency(self) -> sp.csr_matrix:
        """Undirected binary adjacency of the pairs with positive weight in
        either direction (cross-view weights need not be symmetric)."""
        pos = self.weights > 0
        return sp.csr_matrix((pos | pos.T).astype(np.float64))

    @property
    def n_edges(self) -> int:
        return int(self.support_adjacency().nnz // 2)


def centroid_distances(fused_z, assignments, centroids) -> np.ndarray:
    diff = np.asarray(fused_z) - np.asarray(centroids)[np.asarray(assignments)]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def select_high_confidence(
    fused_z, assignments, centroids, k: float, scope: str = "global"
) -> HighConfidenceSet:
    """Keep the ``floor(k * N)`` nodes closest to their assigned centroid
    (at least one). Ties go to the lower node index.

    With ``scope="cluster"`` the fraction is applied inside every cluster
    instead (at least one node per non-empty cluster).
    """
    if not 0.0 < k <= 1.0:
        raise ValueError(f"k must lie in (0, 1], got {k}")
    assignments = np.asarray(assignments)
    dist = centroid_distances(fused_z, assignments, centroids)
    n = dist.shape[0]
    if scope == "global":
        take = max(1, int(np.floor(k * n)))
        chosen = np.lexsort((np.arange(n), dist))[:take]
    elif scope == "cluster":
        parts = []
        for c in np.unique(assignments):
            members = np.flatnonzero(assignments == c)
            take = max(1, int(np.floor(k * members.size)))
            parts.append(members[np.lexsort((members, dist[members]))[:take]])
        chosen = np.concatenate(parts)
    else:
        raise ValueError(f"unknown selection scope {scope!r}; expected {SELECTION_SCOPES}")
    ids = np.sort(chosen)
    return HighConfidenceSet(ids, assignments[ids], dist[ids])


def build_high_confidence_graph(
    hc: HighConfidenceSet, adjacency, norm_s
) -> HighConfidenceGraph:
    """Weight 1 for same-pseudo-label high-confidence pairs, ``norm_s`` on the
    remaining original edges, 0 elsewhere; zero diagonal.

    Pairs where either node is outside the high-confidence set cannot take
    weight 1.
    """
    norm_s = np.asarray(norm_s, dtype=np.float64)
    n = norm_s.shape[0]
    a = sp.csr_matrix(adjacency)
    h = a.multiply(norm_s).toarray()
    labels = np.full(n, -1, dtype=np.int64)
    labels[hc.node_ids] = hc.pseudo_labels
    for c in np.unique(hc.pseudo_labels):
        members = hc.node_ids[hc.pseudo_labels == c]
        h[np.ix_(members, members)] = 1.0
    np.fill_diagonal(h, 0.0)
    return HighConfidenceGraph(h)


def _afc_terms(s, h):
    s = np.asarray(s, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if s.shape != h.shape or s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"S and H must be square and equal-shaped: {s.shape}, {h.shape}")
    w = h.copy()
    np.fill_diagonal(w, 1.0)
    # cosine bounds S to [-1, 1], so no max-shift is needed
    e = np.exp(s)
    num = np.sum(w * e, axis=1)
    den = np.sum(e, axis=1)
    return w, e, num, den


def afc_loss(s, h) -> float:
    """Mean over nodes of ``-log((e^S_ii + sum_k H_ik e^S_ik) / sum_j e^S_ij)``."""
    _, _, num, den = _afc_terms(s, h)
    return float(np.mean(np.log(den) - np.log(num)))


def afc_loss_and_grad(s, h):
    """``(loss, dS)`` with ``H`` held constant."""
    w, e, num, den = _afc_terms(s, h)
    n = e.shape[0]
    grad = (e / den[:, None] - w * e / num[:, None]) / n
    return float(np.mean(np.log(den) - np.log(num))), grad


def infonce_upper_bound(s) -> float:
    """``mean_i log(N e^S_ii / sum_j e^S_ij)``, the InfoNCE-form bound on
    ``-afc_loss`` for graphs whose H rows are sparse enough."""
    s = np.asarray(s, dtype=np.float64)
    n = s.shape[0]
    e = np.exp(s)
    return float(np.mean(np.log(n) + np.diagonal(s) - np.log(e.sum(axis=1))))
