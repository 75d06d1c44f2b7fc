"""Attributed graphs: text-file ingestion, homophily analytics and SBM generation.

A dataset directory holds three whitespace-separated text files::

    features.txt   N rows of D reals
    edges.txt      one "i j" pair of 0-indexed node ids per line
    labels.txt     optional, one integer class id per line
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphError(Exception):
    """Base class for graph construction and analytics errors."""


class GraphLoadError(GraphError):
    """A required dataset file is missing or unreadable."""


class GraphFormatError(GraphError):
    """A dataset file is readable but inconsistent."""


class MissingLabelsError(GraphError):
    pass


class DegenerateGraphError(GraphError):
    """The statistic is undefined for this graph (no edges, no neighbors...)."""


def _symmetric_adjacency(edges: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n_nodes):
        raise GraphFormatError(
            f"edge endpoint out of range [0, {n_nodes}): "
            f"min={edges.min()}, max={edges.max()}"
        )
    edges = edges[edges[:, 0] != edges[:, 1]]
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sp.csr_matrix(
        (np.ones(rows.size), (rows, cols)), shape=(n_nodes, n_nodes)
    )
    # duplicates were summed by the constructor
    adj.data[:] = 1.0
    adj.eliminate_zeros()
    adj.sort_indices()
    return adj


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Node attributes ``attributes`` (N x D), undirected binary ``adjacency``
    (sparse, symmetric, zero diagonal) and optional evaluation ``labels``."""

    attributes: np.ndarray
    adjacency: sp.csr_matrix
    labels: np.ndarray | None = None
    n_classes: int | None = None
    _neighbors: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.attributes, dtype=np.float64)
        if x.ndim != 2:
            raise GraphFormatError(f"attributes must be 2-D, got shape {x.shape}")
        object.__setattr__(self, "attributes", x)
        adj = sp.csr_matrix(self.adjacency, dtype=np.float64)
        n = x.shape[0]
        if adj.shape != (n, n):
            raise GraphFormatError(
                f"adjacency shape {adj.shape} does not match {n} nodes"
            )
        if adj.diagonal().any():
            raise GraphFormatError("adjacency has self-loops")
        if (adj != adj.T).nnz:
            raise GraphFormatError("adjacency is not symmetric")
        adj.sort_indices()
        object.__setattr__(self, "adjacency", adj)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (n,):
                raise GraphFormatError(
                    f"expected {n} labels, got {y.shape[0] if y.ndim else 0}"
                )
            y = y.astype(np.int64)
            c = self.n_classes if self.n_classes is not None else int(y.max()) + 1
            if y.min() < 0 or y.max() >= c:
                raise GraphFormatError(f"labels must lie in [0, {c})")
            object.__setattr__(self, "labels", y)
            object.__setattr__(self, "n_classes", int(c))

    @classmethod
    def from_edges(cls, attributes, edges, labels=None, n_classes=None):
        """Build a graph from an edge list; edges are symmetrized, duplicates
        and self-loops dropped."""
        x = np.asarray(attributes, dtype=np.float64)
        return cls(x, _symmetric_adjacency(edges, x.shape[0]), labels, n_classes)

    @property
    def n_nodes(self) -> int:
        return self.attributes.shape[0]

    @property
    def n_features(self) -> int:
        return self.attributes.shape[1]

    @property
    def n_edges(self) -> int:
        """Undirected edge count."""
        return self.adjacency.nnz // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @property
    def neighbor_sets(self) -> list[np.ndarray]:
        if self._neighbors is None:
            a = self.adjacency
            nbrs = [a.indices[a.indptr[i]:a.indptr[i + 1]] for i in range(self.n_nodes)]
            object.__setattr__(self, "_neighbors", nbrs)
        return self._neighbors

    def edge_list(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array with ``i < j``."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.stack([upper.row[order], upper.col[order]], axis=1).astype(np.int64)

    def without_labels(self) -> "AttributedGraph":
        return AttributedGraph(self.attributes, self.adjacency)

    def with_adjacency(self, adjacency) -> "AttributedGraph":
        return AttributedGraph(self.attributes, adjacency, self.labels, self.n_classes)


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    n_classes: int
    n_attributes: int
    homophily_ratio: float
    neighborhood_homophily_ratio: float
    congener_ratio: float

    def row(self, name: str | None = None) -> str:
        """Table row: Nodes, Edges, Classes, Attributes, r_h, r_nh, delta."""
        cells = [
            str(self.n_nodes), str(self.n_edges), str(self.n_classes),
            str(self.n_attributes), f"{self.homophily_ratio:.2f}",
            f"{self.neighborhood_homophily_ratio:.2f}", f"{self.congener_ratio:.4f}",
        ]
        if name is not None:
            cells.insert(0, name)
        return "\t".join(cells)


def load_graph(data_dir) -> AttributedGraph:
    data_dir = Path(data_dir)
    feat_path = data_dir / "features.txt"
    edge_path = data_dir / "edges.txt"
    label_path = data_dir / "labels.txt"
    for p in (feat_path, edge_path):
        if not p.is_file():
            raise GraphLoadError(f"missing dataset file: {p}")
    try:
        x = np.loadtxt(feat_path, dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise GraphFormatError(f"{feat_path}: {exc}") from exc
    try:
        edges = np.loadtxt(edge_path, dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise GraphFormatError(f"{edge_path}: {exc}") from exc
    if edges.size == 0:
        edges = np.zeros((0, 2), dtype=np.int64)
    if edges.shape[1] != 2:
        raise GraphFormatError(f"{edge_path}: expected 2 columns, got {edges.shape[1]}")
    labels = None
    if label_path.is_file():
        try:
            labels = np.loadtxt(label_path, dtype=np.int64, ndmin=1)
        except ValueError as exc:
            raise GraphFormatError(f"{label_path}: {exc}") from exc
        if labels.shape[0] != x.shape[0]:
            raise GraphFormatError(
                f"{label_path}: {labels.shape[0]} labels for {x.shape[0]} nodes"
            )
    try:
        return AttributedGraph.from_edges(x, edges, labels)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{data_dir}: {exc}") from exc


def save_graph(g: AttributedGraph, data_dir) -> Path:
    """Write ``g`` in the directory layout read by :func:`load_graph`.

    Reals are written with 17 significant digits so a reload is bit-exact.
    """
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    np.savetxt(data_dir / "features.txt", g.attributes, fmt="%.17g")
    np.savetxt(data_dir / "edges.txt", g.edge_list(), fmt="%d")
    if g.labels is not None:
        np.savetxt(data_dir / "labels.txt", g.labels, fmt="%d")
    return data_dir


def _require_labels(g: AttributedGraph) -> np.ndarray:
    if g.labels is None:
        raise MissingLabelsError("graph has no labels")
    return g.labels


def _same_label_neighbor_counts(g: AttributedGraph) -> np.ndarray:
    y = _require_labels(g)
    coo = g.adjacency.tocoo()
    same = y[coo.row] == y[coo.col]
    return np.bincount(coo.row[same], minlength=g.n_nodes)


def homophily_ratio(g: AttributedGraph) -> float:
    """Fraction of undirected edges whose endpoints share a label."""
    y = _require_labels(g)
    if g.n_edges == 0:
        raise DegenerateGraphError("homophily ratio undefined for a graph without edges")
    e = g.edge_list()
    return float(np.mean(y[e[:, 0]] == y[e[:, 1]]))


def neighborhood_homophily_ratio(g: AttributedGraph) -> float:
    """Mean same-label fraction of each node's neighborhood; isolated nodes
    are left out of the mean."""
    same = _same_label_neighbor_counts(g)
    deg = g.degrees
    has = deg > 0
    if not has.any():
        raise DegenerateGraphError("every node is isolated")
    return float(np.mean(same[has] / deg[has]))


def congener_ratio(g: AttributedGraph) -> float:
    """Mean over nodes of (same-label neighbors) / (same-label nodes in the
    graph, the node itself included)."""
    y = _require_labels(g)
    same = _same_label_neighbor_counts(g)
    class_size = np.bincount(y)[y]
    return float(np.mean(same / class_size))


def graph_stats(g: AttributedGraph) -> GraphStats:
    _require_labels(g)
    return GraphStats(
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        n_classes=int(g.n_classes),
        n_attributes=g.n_features,
        homophily_ratio=homophily_ratio(g),
        neighborhood_homophily_ratio=neighborhood_homophily_ratio(g),
        congener_ratio=congener_ratio(g),
    )


def generate_sbm(
    n_nodes: int,
    n_classes: int,
    p_in: float,
    p_out: float,
    feature_dim: int = 16,
    feature_noise: float = 1.0,
    seed: int = 0,
) -> AttributedGraph:
    """Planted-partition graph with Gaussian class-mean features.

    Nodes are split into ``n_classes`` contiguous blocks of near-equal size.
    Each class draws a mean vector from N(0, I); a node's features are its
    class mean plus ``feature_noise`` times standard normal noise.
    """
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    if n_classes < 2:
        raise ValueError(f"n_classes must be >= 2, got {n_classes}")
    if n_nodes < n_classes:
        raise ValueError("n_nodes must be >= n_classes")
    if feature_dim < 1:
        raise ValueError("feature_dim must be >= 1")
    rng = np.random.default_rng(seed)
    sizes = np.full(n_classes, n_nodes // n_classes)
    sizes[: n_nodes % n_classes] += 1
    y = np.repeat(np.arange(n_classes), sizes)

    iu, ju = np.triu_indices(n_nodes, k=1)
    prob = np.where(y[iu] == y[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    means = rng.standard_normal((n_classes, feature_dim))
    x = means[y] + feature_noise * rng.standard_normal((n_nodes, feature_dim))
    return AttributedGraph.from_edges(x, edges, y, n_classes)


def expected_sbm_homophily(class_sizes, p_in: float, p_out: float) -> float:
    """Ratio of expected intra-class to expected total edge counts."""
    s = np.asarray(class_sizes, dtype=np.float64)
    intra = p_in * np.sum(s * (s - 1)) / 2
    inter = p_out * (s.sum() ** 2 - np.sum(s**2)) / 2
    return float(intra / (intra + inter))
