import networkx as nx
import numpy as np
import pytest

from dropreef.exceptions import GraphInputError, ResourceLimitError
from dropreef.services.graph_service import graph_service
from dropreef.services.sampling_service import SharedNeighborMatrix, sampling_service

from tests.factories import (
    clique_graph,
    clustering_oracle,
    make_graph,
    path_graph,
    random_graph,
    random_tree,
    ring_graph,
    sparse_random_graph,
    triangle_oracle,
)

TRIANGLE = [(0, 1), (1, 2), (0, 2)]


def to_networkx(graph):
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(range(graph.num_nodes))
    nx_graph.add_edges_from(graph_service.edge_list(graph).tolist())
    return nx_graph


class TestSampling:

    def test_full_and_empty_budget(self, clique4):
        assert sampling_service.sample_nodes(clique4, 4, seed=3).tolist() == [0, 1, 2, 3]
        assert sampling_service.sample_nodes(clique4, 0, seed=3).tolist() == []

    def test_same_seed_same_sample(self, rng):
        graph = random_graph(rng, 60)
        budget = graph.num_nodes // 2
        first = sampling_service.sample_nodes(graph, budget, seed=11)
        second = sampling_service.sample_nodes(graph, budget, seed=11)
        assert first.tolist() == second.tolist()
        assert len(set(first.tolist())) == budget

    def test_budget_above_node_count(self, path3):
        with pytest.raises(GraphInputError):
            sampling_service.sample_nodes(path3, 4, seed=0)

    def test_sample_subgraph_is_induced(self, clique4):
        subgraph, id_map = sampling_service.sample_subgraph(clique4, 3, seed=5)
        assert subgraph.num_undirected_edges == 3
        assert id_map.num_new == 3


class TestSharedNeighbors:

    def test_triangle(self):
        counts = sampling_service.shared_neighbors(make_graph(TRIANGLE, 3)).counts
        assert counts.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]

    def test_star(self, star4):
        counts = sampling_service.shared_neighbors(star4).counts
        assert counts[0].tolist() == [0, 0, 0, 0, 0]
        assert counts[1].tolist() == [0, 0, 1, 1, 1]

    def test_edgeless(self):
        counts = sampling_service.shared_neighbors(make_graph([], 3)).counts
        assert not counts.any()

    def test_cap(self, clique4):
        with pytest.raises(ResourceLimitError, match="cap"):
            sampling_service.shared_neighbors(clique4, cap=3)

    def test_density_all_zero(self):
        matrix = SharedNeighborMatrix(counts=np.zeros((4, 4), dtype=np.int64))
        regions = sampling_service.region_density(matrix, window=2, top_k=0)
        assert len(regions) == 9
        assert all(r.total == 0 for r in regions)

    def test_density_single_entry(self):
        counts = np.zeros((4, 4), dtype=np.int64)
        counts[1, 2] = 5
        regions = sampling_service.region_density(SharedNeighborMatrix(counts=counts), window=2, top_k=4)
        assert [r.total for r in regions] == [5, 5, 5, 5]
        assert (regions[0].row, regions[0].col) == (0, 1)

    def test_density_triangle(self):
        matrix = sampling_service.shared_neighbors(make_graph(TRIANGLE, 3))
        assert sampling_service.region_density(matrix, window=3)[0].total == 6

    def test_density_window_too_large(self):
        matrix = sampling_service.shared_neighbors(make_graph(TRIANGLE, 3))
        with pytest.raises(GraphInputError):
            sampling_service.region_density(matrix, window=4)

    def test_export(self, tmp_path, star4):
        matrix = sampling_service.shared_neighbors(star4)
        dense = tmp_path / "dense.tsv"
        sparse = tmp_path / "sparse.tsv"
        sampling_service.write_shared_neighbors(matrix, dense, sparse)
        assert dense.read_text().splitlines()[1] == "0\t0\t1\t1\t1"
        lines = sparse.read_text().splitlines()
        assert lines[0] == "row\tcol\tcount"
        assert lines[1:] == [f"{r}\t{c}\t1" for r in range(1, 5) for c in range(r + 1, 5)]


class TestStructuralStats:

    def test_small_cases(self):
        triangle = make_graph(TRIANGLE, 3)
        assert sampling_service.clustering_coefficient(triangle) == 1.0
        assert sampling_service.closed_triads(triangle) == 1
        assert sampling_service.clustering_coefficient(clique_graph(4)) == 1.0
        assert sampling_service.closed_triads(clique_graph(4)) == 4
        assert sampling_service.clustering_coefficient(path_graph(3)) == 0.0
        assert sampling_service.clustering_coefficient(make_graph([], 0)) == 0.0

    def test_cycles(self):
        assert sampling_service.closed_triads(ring_graph(3)) == 1
        assert sampling_service.clustering_coefficient(ring_graph(3)) == 1.0
        for n in range(4, 21):
            ring = ring_graph(n)
            assert sampling_service.closed_triads(ring) == 0
            assert sampling_service.clustering_coefficient(ring) == 0.0

    def test_trees(self, rng):
        for n in (1, 2, 10, 50):
            tree = random_tree(rng, n)
            assert sampling_service.closed_triads(tree) == 0
            assert sampling_service.clustering_coefficient(tree) == 0.0

    def test_matches_enumeration(self, rng):
        for _ in range(40):
            graph = random_graph(rng, 25)
            assert sampling_service.closed_triads(graph) == triangle_oracle(graph)
            assert abs(sampling_service.clustering_coefficient(graph) - clustering_oracle(graph)) <= 1e-12

    def test_matches_networkx(self, rng):
        for _ in range(200):
            graph = sparse_random_graph(rng, 200)
            nx_graph = to_networkx(graph)
            assert sampling_service.closed_triads(graph) == sum(nx.triangles(nx_graph).values()) // 3
            expected = nx.average_clustering(nx_graph) if graph.num_nodes else 0.0
            assert abs(sampling_service.clustering_coefficient(graph) - expected) <= 1e-12


class TestBatchStats:

    def test_single_sample(self, rng):
        graph = random_graph(rng, 60, p=0.2)
        budget = graph.num_nodes // 2
        stats = sampling_service.batch_stats(graph, budget, 1, seed=9)
        seed = np.random.SeedSequence(9).spawn(1)[0]
        subgraph, _ = sampling_service.sample_subgraph(graph, budget, seed)
        assert stats.clustering_coefficient == sampling_service.clustering_coefficient(subgraph)
        assert stats.closed_triads == sampling_service.closed_triads(subgraph)

    def test_full_budget(self, rng):
        graph = random_graph(rng, 30, p=0.4)
        stats = sampling_service.batch_stats(graph, graph.num_nodes, 5, seed=1)
        assert stats.clustering_coefficient == pytest.approx(sampling_service.clustering_coefficient(graph))
        assert stats.closed_triads == pytest.approx(sampling_service.closed_triads(graph))

    def test_complete_graph(self):
        stats = sampling_service.batch_stats(clique_graph(6), 3, 20, seed=4)
        assert stats.clustering_coefficient == 1.0
        assert stats.closed_triads == 1.0

    def test_thread_count_does_not_change_means(self, rng):
        graph = random_graph(rng, 80, p=0.2)
        one = sampling_service.batch_stats(graph, 40, 16, seed=2, threads=1)
        many = sampling_service.batch_stats(graph, 40, 16, seed=2, threads=8)
        assert one == many

    def test_invalid_arguments(self, path3):
        with pytest.raises(GraphInputError):
            sampling_service.batch_stats(path3, 2, 0)
        with pytest.raises(GraphInputError):
            sampling_service.batch_stats(path3, 5, 1)

    def test_compare(self, star4):
        comparison = sampling_service.compare_stats(clique_graph(5), star4, 5, 3, seed=0)
        assert comparison.vanilla.closed_triads == 10.0
        assert comparison.dropped.closed_triads == 0.0
        assert comparison.closed_triads_delta == -10.0

    @pytest.mark.slow
    def test_dropping_hubs_lowers_sampled_triads(self, planted_hubs):
        graph, _, _, hubs = planted_hubs
        dropped, _ = graph_service.remove_nodes(graph, hubs)
        comparison = sampling_service.compare_stats(graph, dropped, 500, 1000, seed=0, threads=4)
        assert comparison.dropped.closed_triads < comparison.vanilla.closed_triads
