"""Training loop: encode, score the three losses, update both encoders with Adam."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import encoder as enc_mod
from .afc import (
    HighConfidenceGraph,
    afc_loss_and_grad,
    build_high_confidence_graph,
    select_high_confidence,
)
from .clustering import MetricsReport, evaluate, kmeans
from .contrast import (
    cross_view_similarity_backward,
    minmax_normalize,
    nca_loss_and_grad,
    neutral_contrastive_factor,
    similarity_threshold,
    cross_view_similarity,
)
from .distributions import PairwiseSKL, gda_loss_and_grad
from .graph import AttributedGraph, congener_ratio, homophily_ratio

log = logging.getLogger(__name__)

LR_GRID = (1e-3, 1e-4, 1e-5)
LAMBDA_GRID = (0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0)
K_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))


class TrainingError(RuntimeError):
    """Training aborted; ``snapshot`` holds the last epoch's diagnostics."""

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot or {}


@dataclass
class TrainConfig:
    latent_dim: int = 1000
    learning_rate: float = 1e-3
    epochs: int = 500
    lambda1: float = 0.1
    lambda2: float = 1.0
    k: float = 0.2
    seed: int = 0
    depth: int = 1
    final_activation: bool = True
    preprocessing: str = "none"
    n_clusters: int | None = None
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    kmeans_interval: int = 1
    norm_scope: str = "global"
    selection_scope: str = "global"
    eta_override: float | None = None
    k_block_size: int | None = None
    early_stop_patience: int | None = None
    early_stop_tol: float = 1e-6
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.latent_dim < 1 or self.depth < 1 or self.epochs < 0:
            raise ValueError("latent_dim and depth must be >= 1, epochs >= 0")
        if not 0.0 < self.k <= 1.0:
            raise ValueError(f"k must lie in (0, 1], got {self.k}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.kmeans_interval < 1:
            raise ValueError("kmeans_interval must be >= 1")
        if self.eta_override is not None and not 0.0 <= self.eta_override <= 1.0:
            raise ValueError("eta_override must lie in [0, 1]")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ValueError(f"unknown TrainConfig keys: {sorted(unknown)}")
        return cls(**values)


@dataclass
class LossTerms:
    nca: float
    afc: float
    gda: float
    total: float


def total_loss(l_nca, l_afc, l_gda, lambda1, lambda2) -> float:
    return l_nca + lambda1 * l_afc + lambda2 * l_gda


def objective_and_grad(
    z1, z2, adjacency, h, eta, lambda1, lambda2, k_block_size=None, similarity=None
):
    """Combined objective and its gradients on both views.

    ``h`` (dense N x N weights) and ``eta`` are constants here.
    """
    l_gda, g1, g2 = gda_loss_and_grad(z1, z2)

    pskl = PairwiseSKL(z1, z2, k_block_size)
    l_nca, grad_k = nca_loss_and_grad(pskl.K, adjacency, eta)
    n1, n2 = pskl.backward(grad_k)

    s = cross_view_similarity(z1, z2) if similarity is None else similarity
    l_afc, grad_s = afc_loss_and_grad(s, h)
    a1, a2 = cross_view_similarity_backward(z1, z2, grad_s)

    dz1 = n1 + lambda1 * a1 + lambda2 * g1
    dz2 = n2 + lambda1 * a2 + lambda2 * g2
    terms = LossTerms(l_nca, l_afc, l_gda, total_loss(l_nca, l_afc, l_gda, lambda1, lambda2))
    return terms, dz1, dz2


def run_diagnostics(g: AttributedGraph, h, labels=None) -> dict:
    """Homophily and congener ratio of the undirected support of ``h``."""
    if not isinstance(h, HighConfidenceGraph):
        h = HighConfidenceGraph(np.asarray(h))
    labels = g.labels if labels is None else labels
    support = AttributedGraph(g.attributes, h.support_adjacency(), labels)
    return {
        "r_h": homophily_ratio(support) if support.n_edges else float("nan"),
        "delta": congener_ratio(support),
    }


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class TrainResult:
    per_epoch: list
    final_assignments: np.ndarray
    final_metrics: MetricsReport | None
    best_epoch: dict | None
    encoders: enc_mod.EncoderPair
    config: TrainConfig
    checkpoint: Path | None = None

    def curve(self, key) -> np.ndarray:
        return np.array([row[key] for row in self.per_epoch], dtype=np.float64)


def _finite(terms: LossTerms) -> bool:
    return all(math.isfinite(v) for v in (terms.nca, terms.afc, terms.gda, terms.total))


def train(
    g: AttributedGraph,
    cfg: TrainConfig,
    log_path=None,
    checkpoint_path=None,
) -> TrainResult:
    """Optimize both encoders for ``cfg.epochs`` epochs.

    Each epoch: encode; estimate the similarity threshold and neutral factor;
    cluster the fused embeddings and build H from the high-confidence nodes;
    take one Adam step on the combined objective. Labels, when present, are
    used only for the logged diagnostics and metrics.
    """
    n_clusters = cfg.n_clusters or g.n_classes
    if not n_clusters:
        raise ValueError("number of clusters unknown: set cfg.n_clusters or attach labels")
    x = enc_mod.preprocess(g.attributes, cfg.preprocessing)
    adj = g.adjacency
    has_edges = adj.nnz > 0
    if not has_edges and cfg.eta_override is None:
        warnings.warn("graph has no edges; neutral contrastive factor set to 0", RuntimeWarning)
    labels = g.labels

    encoders = enc_mod.init_encoders(
        g.n_features, cfg.latent_dim, cfg.depth, cfg.seed, cfg.final_activation
    )
    params = encoders.parameters()
    opt = Adam(params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    kmeans_seeds = np.random.SeedSequence([cfg.seed, 1]).generate_state(cfg.epochs + 1)

    log_fh = open(log_path, "w") if log_path else None
    per_epoch = []
    best = None
    h = None
    clusters = None
    stall, best_total = 0, math.inf
    base_r_h = homophily_ratio(g) if labels is not None and has_edges else None
    base_delta = congener_ratio(g) if labels is not None else None
    try:
        for epoch in range(1, cfg.epochs + 1):
            emb, tape = enc_mod.forward(encoders, x)
            z1, z2 = emb.z_view1, emb.z_view2

            s = cross_view_similarity(z1, z2)
            norm_s = minmax_normalize(s, cfg.norm_scope)
            xi = similarity_threshold(norm_s)
            if cfg.eta_override is not None:
                eta = float(cfg.eta_override)
            elif has_edges:
                eta = neutral_contrastive_factor(norm_s, adj, xi)
            else:
                eta = 0.0

            if clusters is None or (epoch - 1) % cfg.kmeans_interval == 0:
                clusters = kmeans(
                    emb.fused, n_clusters, int(kmeans_seeds[epoch]),
                    cfg.kmeans_max_iter, cfg.kmeans_restarts, cfg.kmeans_tol,
                )
            hc = select_high_confidence(
                emb.fused, clusters.assignments, clusters.centroids, cfg.k, cfg.selection_scope
            )
            h = build_high_confidence_graph(hc, adj, norm_s)

            terms, dz1, dz2 = objective_and_grad(
                z1, z2, adj, h.weights, eta, cfg.lambda1, cfg.lambda2, cfg.k_block_size, s
            )
            row = {
                "epoch": epoch,
                "L_NCA": terms.nca,
                "L_AFC": terms.afc,
                "L_GDA": terms.gda,
                "L_total": terms.total,
                "eta": eta,
                "xi": xi,
                "H_edges": h.n_edges,
            }
            if labels is not None:
                diag = run_diagnostics(g, h, labels)
                row["r_h_H"] = diag["r_h"]
                row["delta_H"] = diag["delta"]
                row["r_h_A"] = base_r_h
                row["delta_A"] = base_delta
                m = evaluate(clusters.assignments, labels)
                row.update(ACC=m.acc, NMI=m.nmi, ARI=m.ari, F1=m.f1)
                if best is None or m.acc > best["ACC"]:
                    best = dict(row)
            if not _finite(terms):
                raise TrainingError(f"non-finite loss at epoch {epoch}", row)
            per_epoch.append(row)
            if log_fh:
                log_fh.write(json.dumps(row) + "\n")

            grads = enc_mod.backward(encoders, tape, dz1, dz2)
            opt.step(grads)

            if cfg.early_stop_patience:
                if terms.total < best_total * (1.0 - cfg.early_stop_tol):
                    best_total, stall = terms.total, 0
                else:
                    stall += 1
                    if stall >= cfg.early_stop_patience:
                        log.info("early stop at epoch %d", epoch)
                        break
    finally:
        if log_fh:
            log_fh.close()

    emb = enc_mod.encode(encoders, x)
    final = kmeans(
        emb.fused, n_clusters, int(kmeans_seeds[0]),
        cfg.kmeans_max_iter, cfg.kmeans_restarts, cfg.kmeans_tol,
    )
    metrics = evaluate(final.assignments, labels) if labels is not None else None
    ckpt = None
    if checkpoint_path is not None:
        ckpt = enc_mod.save_checkpoint(encoders, checkpoint_path)
    return TrainResult(per_epoch, final.assignments, metrics, best, encoders, cfg, ckpt)
