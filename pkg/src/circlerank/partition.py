"""Greedy friend-circle extraction from the sampled token graph.

Repeatedly takes the highest-degree node as a circle's central node and its
current neighbors as members. Node-level mode removes the members from the
working graph so circles are node-disjoint; edge-level mode removes only
the circle's induced edges so a node can recur in later circles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .sampling import SparseGraph, adjacency_matrix

NODE_LEVEL = "node_level"
EDGE_LEVEL = "edge_level"

DEFAULT_MAX_SUBGRAPHS = 16
DEFAULT_MEMBER_CAP = 128


@dataclass(frozen=True)
class Subgraph:
    """One friend circle: the central node first, then its members."""

    central_node: int
    members: tuple[int, ...]
    rank: int

    def __post_init__(self):
        if not self.members or self.members[0] != self.central_node:
            raise ValueError("members must start with the central node")
        if len(set(self.members)) != len(self.members):
            raise ValueError("members must be unique")


@dataclass(frozen=True)
class Partition:
    mode: str
    subgraphs: tuple[Subgraph, ...]
    k: int
    cap: int


def partition(
    graph: SparseGraph,
    mode: str,
    k: int = DEFAULT_MAX_SUBGRAPHS,
    cap: int = DEFAULT_MEMBER_CAP,
    scaled: np.ndarray | None = None,
) -> Partition:
    """Extract up to k circles of at most cap members each.

    Ties on degree break toward the smaller node id. When a center has more
    than cap - 1 neighbors, the cap - 1 with the highest connection
    probability to the center are kept (again smaller id on ties), which
    requires the scaled probability matrix the graph was sampled from.
    Extraction stops early once the working graph has no edges left.
    """
    if mode not in (NODE_LEVEL, EDGE_LEVEL):
        raise ValueError(f"unknown partition mode {mode!r}")
    if k < 1 or cap < 1:
        raise ValueError("k and cap must be at least 1")
    if scaled is not None:
        scaled = np.asarray(scaled, dtype=np.float64)
        if scaled.shape != (graph.num_nodes, graph.num_nodes):
            raise DimensionMismatch("scaled matrix does not match the graph size")

    adj = adjacency_matrix(graph)
    return _partition_adj(adj, mode, k, cap, scaled)


def _partition_adj(adj: np.ndarray, mode: str, k: int, cap: int, scaled):
    subgraphs = []
    degs = adj.sum(axis=1)
    for rank in range(1, k + 1):
        if degs.max(initial=0) == 0:
            break
        center = int(np.argmax(degs))  # argmax takes the smallest id on ties
        neighbors = np.flatnonzero(adj[center])
        if neighbors.size > cap - 1:
            if scaled is None:
                raise ValueError(
                    "member cap exceeded; pass the scaled probability matrix "
                    "to rank neighbors"
                )
            # Highest connection probability to the center wins; the sort key
            # is (-probability, node id) so ties go to the smaller id.
            order = np.lexsort((neighbors, -scaled[center, neighbors]))
            neighbors = np.sort(neighbors[order[: cap - 1]])
        members = (center, *neighbors.tolist())
        subgraphs.append(Subgraph(central_node=center, members=members, rank=rank))

        member_idx = np.array(members, dtype=np.int64)
        if mode == NODE_LEVEL:
            removed = adj[member_idx].sum(axis=0)
            degs -= removed
            degs[member_idx] = 0
            adj[member_idx, :] = False
            adj[:, member_idx] = False
        else:
            block = adj[np.ix_(member_idx, member_idx)]
            degs[member_idx] -= block.sum(axis=1)
            adj[np.ix_(member_idx, member_idx)] = False
    return Partition(mode=mode, subgraphs=tuple(subgraphs), k=k, cap=cap)


def partition_stats(part: Partition, graph: SparseGraph):
    """Per-rank member counts plus node and edge coverage.

    covered_edges counts original edges whose two endpoints sit together in
    at least one circle.
    """
    nodes_per_subgraph = [len(sg.members) for sg in part.subgraphs]
    covered = set()
    member_sets = []
    for sg in part.subgraphs:
        covered.update(sg.members)
        member_sets.append(set(sg.members))
    covered_edges = sum(
        1
        for i, j in graph.edges
        if any(i in ms and j in ms for ms in member_sets)
    )
    return nodes_per_subgraph, len(covered), covered_edges
