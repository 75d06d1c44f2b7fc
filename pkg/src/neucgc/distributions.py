"""Probability views of embeddings and symmetric KL alignment.

Each embedding row becomes a distribution through a softmax over its latent
components; a whole view becomes one distribution through a softmax over all
of its entries. Probabilities are clamped at ``PROB_FLOOR`` and renormalized
before any logarithm is taken.
"""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-12
SKL_FLOOR = 1e-12


def _softmax(z, axis):
    e = np.exp(z - z.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _to_probs(z, axis=-1):
    """Softmax, then floor and renormalize. Returns ``(probs, cache)``."""
    s = _softmax(z, axis)
    c = np.maximum(s, PROB_FLOOR)
    total = c.sum(axis=axis, keepdims=True)
    return c / total, (s, c, total)


def _to_probs_backward(g, p, cache, axis=-1):
    s, c, total = cache
    gc = (g - np.sum(g * p, axis=axis, keepdims=True)) / total
    gs = np.where(s > PROB_FLOOR, gc, 0.0)
    return s * (gs - np.sum(gs * s, axis=axis, keepdims=True))


def node_distribution(z) -> np.ndarray:
    """Distribution over the latent components of one embedding (or of each
    row of a matrix)."""
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("embedding contains non-finite values")
    return _to_probs(z, axis=-1)[0]


def global_distribution(z) -> np.ndarray:
    """Distribution over all ``N * d`` entries of a view, same shape as ``z``."""
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("embedding contains non-finite values")
    return _to_probs(z.ravel())[0].reshape(z.shape)


def skl_divergence(p, q) -> float:
    """KL(p || q) + KL(q || p), natural log."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"distribution shapes differ: {p.shape} vs {q.shape}")
    lp = np.log(np.maximum(p, PROB_FLOOR))
    lq = np.log(np.maximum(q, PROB_FLOOR))
    return float(np.sum((p - q) * (lp - lq)))


def _skl_grads(p, q, lp, lq):
    # d/dp of sum (p - q)(log p - log q), and the mirror for q
    gp = lp - lq + 1.0 - q / p
    gq = lq - lp + 1.0 - p / q
    return gp, gq


def _check_pair(z1, z2):
    z1 = np.asarray(z1, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z1.shape != z2.shape or z1.ndim != 2:
        raise ValueError(f"view shapes differ or are not 2-D: {z1.shape} vs {z2.shape}")
    if not (np.all(np.isfinite(z1)) and np.all(np.isfinite(z2))):
        raise FloatingPointError("embedding contains non-finite values")
    return z1, z2


def gda_loss_and_grad(z1, z2):
    """Global alignment loss with gradients ``(loss, dz1, dz2)``.

    Sum of the SKL between the two global view distributions and the SKL
    between the two node distributions of every node.
    """
    z1, z2 = _check_pair(z1, z2)
    shape = z1.shape

    pg, cache_pg = _to_probs(z1.ravel())
    qg, cache_qg = _to_probs(z2.ravel())
    lpg, lqg = np.log(pg), np.log(qg)
    global_term = np.sum((pg - qg) * (lpg - lqg))
    gp, gq = _skl_grads(pg, qg, lpg, lqg)
    dz1 = _to_probs_backward(gp, pg, cache_pg).reshape(shape)
    dz2 = _to_probs_backward(gq, qg, cache_qg).reshape(shape)

    pn, cache_pn = _to_probs(z1, axis=1)
    qn, cache_qn = _to_probs(z2, axis=1)
    lpn, lqn = np.log(pn), np.log(qn)
    node_term = np.sum((pn - qn) * (lpn - lqn))
    gp, gq = _skl_grads(pn, qn, lpn, lqn)
    dz1 += _to_probs_backward(gp, pn, cache_pn, axis=1)
    dz2 += _to_probs_backward(gq, qn, cache_qn, axis=1)
    return float(global_term + node_term), dz1, dz2


def gda_loss(z1, z2) -> float:
    return gda_loss_and_grad(z1, z2)[0]


class PairwiseSKL:
    """Cross-view node-pair SKL matrix ``K[i, j] = SKL(p1_i, p2_j)``.

    ``K`` is assembled from row blocks of ``block_size`` rows (all rows at once
    when ``None``) and is bit-identical for every block size; entries are
    floored at ``SKL_FLOOR``. :meth:`backward`
    maps an upstream gradient on ``K`` to gradients on both views.
    """

    def __init__(self, z1, z2, block_size: int | None = None):
        z1, z2 = _check_pair(z1, z2)
        self.p, self._cache_p = _to_probs(z1, axis=1)
        self.q, self._cache_q = _to_probs(z2, axis=1)
        self.lp, self.lq = np.log(self.p), np.log(self.q)
        self._plp = np.sum(self.p * self.lp, axis=1)
        self._qlq = np.sum(self.q * self.lq, axis=1)
        n = z1.shape[0]
        step = n if not block_size else int(block_size)
        if step < 1:
            raise ValueError("block_size must be >= 1")
        # einsum reduces each entry in a fixed order, so blocking cannot change
        # the result; BLAS tiling would
        left = np.concatenate([self.p, self.lp], axis=1)
        right = np.concatenate([self.lq, self.q], axis=1)
        raw = np.empty((n, n))
        for start in range(0, n, step):
            rows = slice(start, min(start + step, n))
            raw[rows] = (
                self._plp[rows, None] + self._qlq[None, :]
                - np.einsum("ic,jc->ij", left[rows], right)
            )
        self._active = raw > SKL_FLOOR
        self.K = np.where(self._active, raw, SKL_FLOOR)

    def backward(self, grad_k):
        g = np.where(self._active, grad_k, 0.0)
        dp = g.sum(axis=1)[:, None] * (self.lp + 1.0) - g @ self.lq - (g @ self.q) / self.p
        dq = g.sum(axis=0)[:, None] * (self.lq + 1.0) - g.T @ self.lp - (g.T @ self.p) / self.q
        dz1 = _to_probs_backward(dp, self.p, self._cache_p, axis=1)
        dz2 = _to_probs_backward(dq, self.q, self._cache_q, axis=1)
        return dz1, dz2


def pairwise_skl_matrix(z1, z2, block_size: int | None = None) -> np.ndarray:
    return PairwiseSKL(z1, z2, block_size).K
