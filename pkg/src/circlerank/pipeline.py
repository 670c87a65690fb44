"""End-to-end encoding of one (document, query) pair.

Chains term weighting, the four probability patterns, sparsity scaling,
edge sampling, friend-circle partitioning, and circle construction. The
graph seed is derived from (base seed, query id, doc id) so a pair encodes
identically wherever it is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import patterns
from .corpus import (
    TokenizedDocument,
    TermWeightRefiner,
    Vocabulary,
    fnv1a64,
    match_positions,
    stage1_relevance,
    tfidf_weights,
)
from .model import CircleInput, ModelConfig, build_circles
from .partition import (
    DEFAULT_MAX_SUBGRAPHS,
    DEFAULT_MEMBER_CAP,
    EDGE_LEVEL,
    NODE_LEVEL,
    Partition,
    partition,
)
from .sampling import SparseGraph, sample_adjacency


@dataclass(frozen=True)
class PipelineConfig:
    pattern: patterns.PatternConfig = field(default_factory=patterns.PatternConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    partition_mode: str = EDGE_LEVEL
    partition_k: int = DEFAULT_MAX_SUBGRAPHS
    partition_cap: int = DEFAULT_MEMBER_CAP

    def __post_init__(self):
        if self.partition_mode not in (NODE_LEVEL, EDGE_LEVEL):
            raise ValueError(f"unknown partition mode {self.partition_mode!r}")


@dataclass(frozen=True)
class EncodedDocument:
    doc_id: str
    qid: str
    graph: SparseGraph
    part: Partition
    circles: list[CircleInput]
    mu: float
    budget_unreachable: bool


def pair_seed(base_seed: int, qid: str, doc_id: str) -> int:
    """Stable sampling seed for one (query, document) pair."""
    return fnv1a64(f"{base_seed}:{qid}:{doc_id}")


def combined_probability(
    doc: TokenizedDocument,
    query: TokenizedDocument,
    vocab: Vocabulary,
    config: patterns.PatternConfig,
    refiner: TermWeightRefiner | None = None,
) -> dict[str, np.ndarray]:
    """All four pattern matrices plus their combination, keyed by name."""
    static_cent_w = tfidf_weights(doc, vocab)
    dyn_dist_w = patterns.dynamic_distance_weights(
        match_positions(doc, query), doc.length, config.p
    )
    dyn_cent_w = stage1_relevance(doc, query, refiner=refiner)
    static_dist, static_cent, dyn_dist, dyn_cent = patterns.build_pattern_matrices(
        doc.length, static_cent_w, dyn_dist_w, dyn_cent_w, config
    )
    combined = patterns.combine(
        static_dist, static_cent, dyn_dist, dyn_cent, config.lambdas
    )
    return {
        "static_distance": static_dist,
        "static_centrality": static_cent,
        "dynamic_distance": dyn_dist,
        "dynamic_centrality": dyn_cent,
        "combined": combined,
    }


def encode_pair(
    doc: TokenizedDocument,
    query: TokenizedDocument,
    vocab: Vocabulary,
    config: PipelineConfig,
    base_seed: int = 0,
    refiner: TermWeightRefiner | None = None,
) -> EncodedDocument:
    """Run the full graph pipeline and build the transmission circles."""
    mats = combined_probability(doc, query, vocab, config.pattern, refiner=refiner)
    mu_result = patterns.solve_mu(mats["combined"], config.pattern.sparsity)
    seed = pair_seed(base_seed, query.doc_id, doc.doc_id)
    graph = sample_adjacency(mu_result.scaled, seed)
    part = partition(
        graph,
        config.partition_mode,
        k=config.partition_k,
        cap=config.partition_cap,
        scaled=mu_result.scaled,
    )
    circles = build_circles(doc, query, part, config.model)
    return EncodedDocument(
        doc_id=doc.doc_id,
        qid=query.doc_id,
        graph=graph,
        part=part,
        circles=circles,
        mu=mu_result.mu,
        budget_unreachable=mu_result.budget_unreachable,
    )
