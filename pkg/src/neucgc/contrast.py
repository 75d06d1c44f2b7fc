"""Cross-view similarity, neutral contrastive factor estimation and the
neighborhood neutral contrastive alignment (NCA) loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import DegenerateGraphError

NCA_EPS = 1e-12
NORM_SCOPES = ("global", "row")


def cross_view_similarity(z1, z2) -> np.ndarray:
    """Cosine similarity between every view-1 row and every view-2 row."""
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    n1 = np.linalg.norm(z1, axis=1)
    n2 = np.linalg.norm(z2, axis=1)
    if not (n1.all() and n2.all()):
        raise FloatingPointError("zero-norm embedding row; cosine similarity undefined")
    return (z1 / n1[:, None]) @ (z2 / n2[:, None]).T


def cross_view_similarity_backward(z1, z2, grad_s):
    """Gradients of a scalar through ``S = cos(z1_i, z2_j)``."""
    n1 = np.linalg.norm(z1, axis=1, keepdims=True)
    n2 = np.linalg.norm(z2, axis=1, keepdims=True)
    u, v = z1 / n1, z2 / n2
    du = grad_s @ v
    dv = grad_s.T @ u
    dz1 = (du - u * np.sum(u * du, axis=1, keepdims=True)) / n1
    dz2 = (dv - v * np.sum(v * dv, axis=1, keepdims=True)) / n2
    return dz1, dz2


def minmax_normalize(s, scope: str = "global") -> np.ndarray:
    """Affine map onto [0, 1]; a constant matrix (or row) maps to 0.5."""
    s = np.asarray(s, dtype=np.float64)
    if scope == "global":
        lo, hi = s.min(), s.max()
        if hi == lo:
            return np.full_like(s, 0.5)
        return (s - lo) / (hi - lo)
    if scope == "row":
        lo = s.min(axis=1, keepdims=True)
        span = s.max(axis=1, keepdims=True) - lo
        flat = span == 0
        return np.where(flat, 0.5, (s - lo) / np.where(flat, 1.0, span))
    raise ValueError(f"unknown normalization scope {scope!r}; expected {NORM_SCOPES}")


def similarity_threshold(norm_s) -> float:
    """Mean of the diagonal of the normalized similarity matrix."""
    return float(np.mean(np.diagonal(norm_s)))


def neutral_contrastive_factor(norm_s, adjacency, threshold: float) -> float:
    """Average fraction of each node's neighbors with normalized similarity at
    or above ``threshold``; isolated nodes are left out of the average."""
    a = sp.csr_matrix(adjacency)
    if a.nnz == 0:
        raise DegenerateGraphError("neutral contrastive factor undefined without edges")
    coo = a.tocoo()
    hit = np.asarray(norm_s)[coo.row, coo.col] >= threshold
    deg = np.diff(a.indptr)
    hits = np.bincount(coo.row[hit], minlength=a.shape[0])
    has = deg > 0
    return float(np.mean(hits[has] / deg[has]))


@dataclass
class SimilarityState:
    cosine: np.ndarray
    normalized: np.ndarray
    neighbor_masked: sp.csr_matrix
    threshold: float
    ncf: float


def similarity_state(z1, z2, adjacency, scope: str = "global") -> SimilarityState:
    """S, norm(S), norm(S) masked by the adjacency, the threshold and the
    factor; an edgeless graph yields a factor of 0."""
    s = cross_view_similarity(z1, z2)
    ns = minmax_normalize(s, scope)
    a = sp.csr_matrix(adjacency)
    xi = similarity_threshold(ns)
    eta = neutral_contrastive_factor(ns, a, xi) if a.nnz else 0.0
    return SimilarityState(s, ns, a.multiply(ns).tocsr(), xi, eta)


def _nca_terms(k, adjacency, eta):
    k = np.asarray(k, dtype=np.float64)
    n = k.shape[0]
    if k.ndim != 2 or k.shape[1] != n:
        raise ValueError(f"K must be square, got {k.shape}")
    if n < 2:
        raise DegenerateGraphError("NCA loss needs at least two nodes")
    a = sp.csr_matrix(adjacency)
    deg = np.diff(a.indptr).astype(np.float64)
    diag = np.diagonal(k)
    nbr_sum = np.asarray(a.multiply(k).sum(axis=1)).ravel()
    num = (diag + eta * nbr_sum) / (deg + 1.0)
    den = (k.sum(axis=1) - diag) / (n - 1) + NCA_EPS
    return k, a, deg, num, den


def nca_loss(k, adjacency, eta: float) -> float:
    """Mean over nodes of (self + eta-weighted neighbor divergence, averaged)
    over (mean divergence to all other nodes)."""
    _, _, _, num, den = _nca_terms(k, adjacency, eta)
    return float(np.mean(num / den))


def nca_loss_and_grad(k, adjacency, eta: float):
    """``(loss, dK)``; ``eta`` and the adjacency are constants."""
    k, a, deg, num, den = _nca_terms(k, adjacency, eta)
    n = k.shape[0]
    row_num = 1.0 / ((deg + 1.0) * den * n)
    row_den = -num / (den**2 * (n - 1) * n)
    grad = np.repeat(row_den[:, None], n, axis=1)
    np.fill_diagonal(grad, row_num)
    if eta:
        grad += a.multiply((eta * row_num)[:, None]).toarray()
    return float(np.mean(num / den)), grad
