"""circlerank: probabilistic sparse-attention token graphs, friend-circle
partitioning, and a two-stage transmission model for long-document ranking."""

from .corpus import (
    TokenizedDocument,
    Vocabulary,
    TermWeights,
    build_vocab,
    load_candidates,
    load_corpus,
    load_qrels,
    load_queries,
    match_positions,
    stage1_relevance,
    tfidf_weights,
    tokenize,
)
from .patterns import (
    PatternConfig,
    combine,
    dynamic_centrality_matrix,
    dynamic_distance_matrix,
    dynamic_distance_weights,
    normalize_f,
    solve_mu,
    static_centrality_matrix,
    static_distance_matrix,
)
from .sampling import SparseGraph, degrees, graph_sparsity, sample_adjacency
from .partition import Partition, Subgraph, partition, partition_stats
from .model import (
    CircleInput,
    ModelConfig,
    ModelParams,
    forward_document,
    fuse_central,
    grad_check,
    init_params,
    inter_circle_forward,
    intra_circle_forward,
    listwise_loss,
    load_checkpoint,
    save_checkpoint,
)
from .pipeline import PipelineConfig, encode_pair
from .ranking import TrainingGroup, build_groups, mrr_at_k, ndcg_at_k
from .training import EncodedStore, TrainConfig, train

__version__ = "0.1.0"
