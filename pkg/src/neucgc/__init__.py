"""Homophily-aware neutral contrastive graph clustering."""

from .afc import (
    HighConfidenceGraph,
    HighConfidenceSet,
    afc_loss,
    build_high_confidence_graph,
    select_high_confidence,
)
from .clustering import ClusterResult, MetricsReport, evaluate, kmeans
from .contrast import (
    SimilarityState,
    cross_view_similarity,
    minmax_normalize,
    nca_loss,
    neutral_contrastive_factor,
    similarity_state,
    similarity_threshold,
)
from .distributions import gda_loss, node_distribution, pairwise_skl_matrix, skl_divergence
from .encoder import EmbeddingPair, EncoderPair, encode, fuse, init_encoders
from .graph import (
    AttributedGraph,
    GraphStats,
    congener_ratio,
    generate_sbm,
    graph_stats,
    homophily_ratio,
    load_graph,
    neighborhood_homophily_ratio,
    save_graph,
)
from .trainer import TrainConfig, TrainResult, run_diagnostics, total_loss, train

__version__ = "0.1.0"
