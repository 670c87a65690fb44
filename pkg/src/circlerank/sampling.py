"""Bernoulli edge sampling from a scaled probability matrix.

One uniform draw per unordered token pair keeps the sampled graph
undirected. Draws come from a Philox 4x64 counter-based generator keyed by
the seed, consumed in row-major upper-triangle order, so an identical
(matrix, seed) pair reproduces the identical edge set on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class SparseGraph:
    """Undirected token graph: canonical edge set with i < j, no self-loops."""

    num_nodes: int
    edges: frozenset[tuple[int, int]]
    seed: int = 0

    def __post_init__(self):
        for i, j in self.edges:
            if not 0 <= i < j < self.num_nodes:
                raise ValueError(f"edge ({i}, {j}) is not canonical for {self.num_nodes} nodes")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def pair_uniforms(num_pairs: int, seed: int) -> np.ndarray:
    """The pinned uniform stream: Philox 4x64 keyed by seed, float64 draws."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    return gen.random(num_pairs, dtype=np.float64)


def sample_adjacency(scaled: np.ndarray, seed: int) -> SparseGraph:
    """Include each unordered pair (i, j) iff its uniform draw < scaled[i, j]."""
    scaled = np.asarray(scaled, dtype=np.float64)
    if scaled.ndim != 2 or scaled.shape[0] != scaled.shape[1]:
        raise DimensionMismatch("expected a square probability matrix")
    length = scaled.shape[0]
    iu, ju = np.triu_indices(length, k=1)
    draws = pair_uniforms(iu.size, seed)
    keep = draws < scaled[iu, ju]
    edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
    return SparseGraph(num_nodes=length, edges=edges, seed=seed)


def degrees(graph: SparseGraph) -> np.ndarray:
    counts = np.zeros(graph.num_nodes, dtype=np.int64)
    for i, j in graph.edges:
        counts[i] += 1
        counts[j] += 1
    return counts


def graph_sparsity(graph: SparseGraph) -> float:
    """Fraction of absent edges among all unordered pairs; 1.0 when < 2 nodes."""
    possible = graph.num_nodes * (graph.num_nodes - 1) // 2
    if possible == 0:
        return 1.0
    return 1.0 - graph.num_edges / possible


def adjacency_matrix(graph: SparseGraph) -> np.ndarray:
    """Dense boolean adjacency view of the edge set."""
    adj = np.zeros((graph.num_nodes, graph.num_nodes), dtype=bool)
    if graph.edges:
        rows, cols = zip(*graph.edges)
        adj[list(rows), list(cols)] = True
        adj[list(cols), list(rows)] = True
    return adj


def graph_stats(graph: SparseGraph) -> dict:
    """Summary row for the stats CSV: sparsity, edge count, degree extremes."""
    degs = degrees(graph)
    return {
        "seed": graph.seed,
        "sparsity": graph_sparsity(graph),
        "num_edges": graph.num_edges,
        "max_degree": int(degs.max()) if graph.num_nodes else 0,
        "mean_degree": float(degs.mean()) if graph.num_nodes else 0.0,
    }
