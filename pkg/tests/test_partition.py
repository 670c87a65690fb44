import numpy as np
import pytest

from circlerank.partition import (
    EDGE_LEVEL,
    NODE_LEVEL,
    Partition,
    Subgraph,
    partition,
    partition_stats,
)
from circlerank.sampling import SparseGraph, sample_adjacency


def graph_from_edges(n, edges):
    return SparseGraph(n, frozenset((min(i, j), max(i, j)) for i, j in edges))


def oracle_partition(graph, mode, k, cap, scaled=None):
    """Set-based greedy re-implementation used as the behavioral oracle.

    Also returns the per-step center degrees and the consumed edge sets so
    invariants about the extraction process itself can be asserted.
    """
    adj = {i: set() for i in range(graph.num_nodes)}
    for i, j in graph.edges:
        adj[i].add(j)
        adj[j].add(i)
    subgraphs, center_degrees, consumed_sets = [], [], []
    for rank in range(1, k + 1):
        center, best = None, 0
        for node in range(graph.num_nodes):
            if len(adj[node]) > best:
                center, best = node, len(adj[node])
        if center is None:
            break
        center_degrees.append(best)
        neighbors = sorted(adj[center])
        if len(neighbors) > cap - 1:
            assert scaled is not None
            neighbors = sorted(
                sorted(neighbors, key=lambda v: (-scaled[center][v], v))[: cap - 1]
            )
        members = [center] + neighbors
        member_set = set(members)
        consumed = set()
        if mode == NODE_LEVEL:
            for v in members:
                for u in adj[v]:
                    consumed.add((min(u, v), max(u, v)))
            for v in members:
                for u in list(adj[v]):
                    adj[u].discard(v)
                adj[v] = set()
        else:
            for v in members:
                for u in adj[v] & member_set:
                    consumed.add((min(u, v), max(u, v)))
            for a, b in consumed:
                adj[a].discard(b)
                adj[b].discard(a)
        subgraphs.append((center, tuple(members)))
        consumed_sets.append(consumed)
    return subgraphs, center_degrees, consumed_sets


class TestHandTraces:
    def test_hub_takes_everything_node_level(self):
        g = graph_from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2)])
        part = partition(g, NODE_LEVEL, k=4, cap=128)
        assert len(part.subgraphs) == 1
        assert part.subgraphs[0].central_node == 0
        assert set(part.subgraphs[0].members) == {0, 1, 2, 3}

    def test_path_edge_level_reuses_node(self):
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        part = partition(g, EDGE_LEVEL, k=4, cap=128)
        assert [sg.central_node for sg in part.subgraphs] == [1, 2]
        assert set(part.subgraphs[0].members) == {0, 1, 2}
        assert set(part.subgraphs[1].members) == {2, 3}

    def test_path_node_level_stops_on_isolation(self):
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        part = partition(g, NODE_LEVEL, k=4, cap=128)
        assert len(part.subgraphs) == 1
        assert set(part.subgraphs[0].members) == {0, 1, 2}

    def test_empty_graph_empty_partition(self):
        part = partition(graph_from_edges(5, []), NODE_LEVEL, k=3, cap=8)
        assert part.subgraphs == ()

    def test_degree_tie_breaks_to_smaller_id(self):
        # 1 and 3 both have degree 2.
        g = graph_from_edges(5, [(1, 2), (1, 4), (3, 0), (3, 2)])
        part = partition(g, NODE_LEVEL, k=1, cap=128)
        assert part.subgraphs[0].central_node == 1

    def test_cap_keeps_highest_probability_neighbors(self):
        g = graph_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        scaled = np.zeros((5, 5))
        scaled[0, [1, 2, 3, 4]] = [0.1, 0.9, 0.5, 0.9]
        scaled += scaled.T
        part = partition(g, NODE_LEVEL, k=1, cap=3, scaled=scaled)
        # cap-1 = 2 neighbors: probabilities 0.9 (ids 2 and 4).
        assert part.subgraphs[0].members == (0, 2, 4)

    def test_cap_without_probabilities_raises(self):
        g = graph_from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        with pytest.raises(ValueError):
            partition(g, NODE_LEVEL, k=1, cap=3)

    def test_invalid_arguments(self):
        g = graph_from_edges(3, [(0, 1)])
        with pytest.raises(ValueError):
            partition(g, "both", k=1, cap=1)
        with pytest.raises(ValueError):
            partition(g, NODE_LEVEL, k=0, cap=1)


class TestStats:
    def test_triangle_single_circle(self):
        g = graph_from_edges(3, [(0, 1), (0, 2), (1, 2)])
        part = partition(g, NODE_LEVEL, k=4, cap=128)
        nodes_per, covered_nodes, covered_edges = partition_stats(part, g)
        assert nodes_per == [3]
        assert covered_nodes == 3
        assert covered_edges == 3

    def test_empty_partition_zeroes(self):
        g = graph_from_edges(3, [])
        nodes_per, covered_nodes, covered_edges = partition_stats(
            partition(g, EDGE_LEVEL, k=2, cap=4), g
        )
        assert nodes_per == []
        assert covered_nodes == 0
        assert covered_edges == 0

    def test_path_edge_level_totals(self):
        g = graph_from_edges(4, [(0, 1), (1, 2), (2, 3)])
        part = partition(g, EDGE_LEVEL, k=4, cap=128)
        nodes_per, covered_nodes, covered_edges = partition_stats(part, g)
        assert nodes_per == [3, 2]
        assert covered_nodes == 4
        assert covered_edges == 3


def random_graph_and_probs(seed, max_nodes=48):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes))
    raw = rng.uniform(0, 1, size=(n, n)) * rng.uniform(0.05, 0.5)
    scaled = (raw + raw.T) / 2
    np.fill_diagonal(scaled, 0.0)
    return sample_adjacency(scaled, seed=seed), scaled


class TestAgainstOracle:
    @pytest.mark.parametrize("mode", [NODE_LEVEL, EDGE_LEVEL])
    def test_matches_set_based_oracle(self, mode):
        """The vectorized greedy equals an independent set-based trace."""
        for seed in range(60):
            graph, scaled = random_graph_and_probs(seed)
            part = partition(graph, mode, k=6, cap=8, scaled=scaled)
            expected, _, _ = oracle_partition(graph, mode, k=6, cap=8, scaled=scaled)
            got = [(sg.central_node, sg.members) for sg in part.subgraphs]
            assert got == expected

    @pytest.mark.parametrize("mode", [NODE_LEVEL, EDGE_LEVEL])
    def test_center_degrees_monotone(self, mode):
        """Greedy center degrees never increase across extraction steps."""
        for seed in range(30):
            graph, scaled = random_graph_and_probs(seed)
            _, center_degrees, _ = oracle_partition(graph, mode, k=16, cap=128, scaled=scaled)
            assert all(a >= b for a, b in zip(center_degrees, center_degrees[1:]))


class TestInvariants:
    @pytest.mark.parametrize("mode", [NODE_LEVEL, EDGE_LEVEL])
    def test_center_member_pairs_are_edges(self, mode):
        for seed in range(40):
            graph, scaled = random_graph_and_probs(seed)
            part = partition(graph, mode, k=8, cap=16, scaled=scaled)
            for sg in part.subgraphs:
                for member in sg.members[1:]:
                    canon = (min(sg.central_node, member), max(sg.central_node, member))
                    assert canon in graph.edges

    def test_node_level_disjoint_members(self):
        for seed in range(40):
            graph, scaled = random_graph_and_probs(seed)
            part = partition(graph, NODE_LEVEL, k=8, cap=16, scaled=scaled)
            seen = set()
            for sg in part.subgraphs:
                assert not seen & set(sg.members)
                seen.update(sg.members)

    def test_edge_level_consumed_edges_disjoint(self):
        for seed in range(40):
            graph, scaled = random_graph_and_probs(seed)
            _, _, consumed = oracle_partition(graph, EDGE_LEVEL, k=8, cap=16, scaled=scaled)
            seen = set()
            for edge_set in consumed:
                assert not seen & edge_set
                seen.update(edge_set)

    @pytest.mark.parametrize("mode", [NODE_LEVEL, EDGE_LEVEL])
    def test_determinism(self, mode):
        graph, scaled = random_graph_and_probs(123)
        first = partition(graph, mode, k=8, cap=16, scaled=scaled)
        second = partition(graph, mode, k=8, cap=16, scaled=scaled)
        assert first == second

    @pytest.mark.parametrize("mode", [NODE_LEVEL, EDGE_LEVEL])
    def test_ranks_strictly_increasing_from_one(self, mode):
        for seed in range(10):
            graph, scaled = random_graph_and_probs(seed)
            part = partition(graph, mode, k=8, cap=16, scaled=scaled)
            assert [sg.rank for sg in part.subgraphs] == list(
                range(1, len(part.subgraphs) + 1)
            )

    def test_uncapped_edge_level_covers_at_least_node_level(self):
        """With no cap or circle limit, edge-level keeps at least as many edges."""
        for seed in range(25):
            graph, scaled = random_graph_and_probs(seed)
            n = graph.num_nodes
            node_part = partition(graph, NODE_LEVEL, k=n + 1, cap=n + 1, scaled=scaled)
            edge_part = partition(graph, EDGE_LEVEL, k=n * n + 1, cap=n + 1, scaled=scaled)
            _, _, node_edges = partition_stats(node_part, graph)
            _, _, edge_edges = partition_stats(edge_part, graph)
            assert edge_edges >= node_edges

    def test_member_count_never_exceeds_cap(self):
        for seed in range(20):
            graph, scaled = random_graph_and_probs(seed)
            part = partition(graph, EDGE_LEVEL, k=6, cap=5, scaled=scaled)
            assert all(len(sg.members) <= 5 for sg in part.subgraphs)


class TestDataclasses:
    def test_member_order_enforced(self):
        with pytest.raises(ValueError):
            Subgraph(central_node=1, members=(0, 1), rank=1)
        with pytest.raises(ValueError):
            Subgraph(central_node=0, members=(0, 1, 1), rank=1)
