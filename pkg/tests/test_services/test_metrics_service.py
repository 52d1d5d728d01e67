import math

import numpy as np
import pytest

from dropreef.exceptions import ConsistencyError, GraphInputError
from dropreef.services.bundle_service import LabelMatrix
from dropreef.services.link_prob_service import EdgeProbabilities, link_prob_service
from dropreef.services.metrics_service import (
    bucket_bounds,
    metrics_service,
    rank_descending,
    top_count,
)

from tests.factories import (
    make_graph,
    random_graph,
    random_multi_label,
    random_one_hot,
    random_probs,
    ring_graph,
    sparse_random_graph,
    star_graph,
    wnh_oracle,
)

SQRT2 = math.sqrt(2.0)


class TestLabelDistance:

    def test_single_class_pair(self):
        cv = [0, 0, 0, 1]
        cu = [0, 1, 0, 0]
        assert metrics_service.label_distance(cv, cu) == pytest.approx(SQRT2, abs=1e-12)

    def test_identical(self):
        assert metrics_service.label_distance([1, 0, 1], [1, 0, 1]) == 0.0

    def test_multi_class_pair(self):
        cv = [0, 0, 1, 1, 0, 0]
        assert metrics_service.label_distance(cv, [1, 1, 0, 0, 0, 0]) == 2.0
        assert metrics_service.label_distance(cv, [0, 0, 0, 0, 1, 1]) == 2.0

    def test_length_mismatch(self):
        with pytest.raises(GraphInputError):
            metrics_service.label_distance([1, 0], [1, 0, 0])


class TestHete:

    def test_homophilic_neighbors(self, clique4):
        labels = LabelMatrix.one_hot([2, 2, 2, 2])
        assert metrics_service.hete(clique4, labels, 0) == 0.0

    def test_half_differ(self):
        graph = star_graph(4)
        labels = LabelMatrix.one_hot([0, 0, 1, 0, 1])
        assert metrics_service.hete(graph, labels, 0) == pytest.approx(SQRT2 * 2 / 4, abs=1e-12)

    def test_all_differ_attains_bound(self):
        graph = star_graph(5)
        labels = LabelMatrix.one_hot([0, 1, 2, 1, 2, 3])
        assert metrics_service.hete(graph, labels, 0) == pytest.approx(SQRT2, abs=1e-12)

    def test_isolated(self):
        assert metrics_service.hete(make_graph([], 2), LabelMatrix.one_hot([0, 1]), 1) == 0.0

    def test_closed_form_sweep(self):
        for d in range(1, 21):
            graph = star_graph(d)
            for diff in range(d + 1):
                labels = LabelMatrix.one_hot([0] + [1] * diff + [0] * (d - diff), 2)
                value = metrics_service.hete(graph, labels, 0)
                assert abs(value - SQRT2 * diff / d) <= 1e-12

    def test_single_node_skips_full_probability_array(self, rng, monkeypatch):
        graph = random_graph(rng, 40, p=0.3)
        labels = random_one_hot(rng, graph.num_nodes, 3)
        expected = metrics_service.hete_all(graph, labels).wnh

        def fail(graph):
            raise AssertionError("uniform probabilities allocated")

        monkeypatch.setattr(link_prob_service, "uniform_probs", fail)
        for v in range(graph.num_nodes):
            assert metrics_service.hete(graph, labels, v) == expected[v]


class TestWnh:

    def test_single_weighted_neighbor(self):
        graph = make_graph([(0, 1)], 2)
        labels = LabelMatrix.one_hot([0, 1])
        probs = EdgeProbabilities(values=np.array([0.5, 0.5]))
        assert metrics_service.wnh(graph, labels, probs, 0) == pytest.approx(0.5 * SQRT2, abs=1e-12)

    def test_zero_probabilities(self, clique4):
        labels = LabelMatrix.one_hot([0, 1, 2, 3])
        probs = EdgeProbabilities(values=np.zeros(12))
        assert metrics_service.wnh_all(clique4, labels, probs).wnh.tolist() == [0.0] * 4

    def test_out_of_range_node(self, path3):
        labels = LabelMatrix.one_hot([0, 1, 0])
        with pytest.raises(GraphInputError):
            metrics_service.wnh(path3, labels, link_prob_service.uniform_probs(path3), 3)

    def test_misaligned_inputs(self, path3):
        labels = LabelMatrix.one_hot([0, 1])
        with pytest.raises(ConsistencyError):
            metrics_service.hete_all(path3, labels)

    def test_weights_separate_equal_heterophily(self):
        # node 0 and node 3 see the same label distances; only the link weights differ
        graph = make_graph([(0, 1), (0, 2), (3, 4), (3, 5)], 6)
        rows = np.array([
            [0, 0, 1, 1, 0, 0],
            [1, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 1],
            [0, 0, 1, 1, 0, 0],
            [1, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, 1, 1],
        ], dtype=np.uint8)
        labels = LabelMatrix(rows=rows, multi_label=True)
        # slots: 0->1 0->2 1->0 2->0 3->4 3->5 4->3 5->3
        probs = EdgeProbabilities(values=np.array([0.9, 0.9, 0.9, 0.9, 0.2, 1.0, 0.2, 1.0]))

        hete = metrics_service.hete_all(graph, labels, [0, 3]).wnh
        wnh = metrics_service.wnh_all(graph, labels, probs, [0, 3]).wnh
        assert hete[0] == hete[1] == 2.0
        assert wnh[0] == pytest.approx(1.8, abs=1e-12)
        assert wnh[1] == pytest.approx(1.2, abs=1e-12)

    def test_subset_and_empty_subset(self, path3):
        labels = LabelMatrix.one_hot([0, 0, 0])
        metrics = metrics_service.hete_all(path3, labels, [2, 0])
        assert metrics.nodes.tolist() == [0, 2]
        assert metrics.wnh.tolist() == [0.0, 0.0]
        assert len(metrics_service.hete_all(path3, labels, [])) == 0

    def test_single_class_bound(self, rng):
        peak = 0.0
        for _ in range(1000):
            graph = sparse_random_graph(rng, 200)
            labels = random_one_hot(rng, graph.num_nodes, int(rng.integers(1, 8)))
            peak = max(peak, float(metrics_service.hete_all(graph, labels).wnh.max(initial=0.0)))
        assert peak <= SQRT2 + 1e-12

    def test_multi_class_bound(self, rng):
        num_classes = 6
        full = math.sqrt(num_classes)
        for _ in range(200):
            graph = sparse_random_graph(rng, 100)
            labels = random_multi_label(rng, graph.num_nodes, num_classes)
            values = metrics_service.wnh_all(graph, labels, random_probs(rng, graph)).wnh
            assert values.max(initial=0.0) <= full + 1e-12

        # neighbors carry exactly the complement classes
        graph = star_graph(3)
        rows = np.array([[1, 1, 1, 0, 0, 0]] + [[0, 0, 0, 1, 1, 1]] * 3, dtype=np.uint8)
        labels = LabelMatrix(rows=rows, multi_label=True)
        assert abs(metrics_service.hete(graph, labels, 0) - full) <= 1e-12

    def test_matches_oracle(self, rng):
        for i in range(500):
            graph = random_graph(rng, 50)
            if i % 2:
                labels = random_multi_label(rng, graph.num_nodes, 5)
            else:
                labels = random_one_hot(rng, graph.num_nodes, 4)
            probs = random_probs(rng, graph)
            values = metrics_service.wnh_all(graph, labels, probs).wnh
            assert np.allclose(values, wnh_oracle(graph, labels, probs), rtol=0, atol=1e-12)

            uniform = link_prob_service.uniform_probs(graph)
            assert np.array_equal(
                metrics_service.wnh_all(graph, labels, uniform).wnh,
                metrics_service.hete_all(graph, labels).wnh,
            )

    def test_scaling_own_edges_scales_wnh(self, rng):
        for _ in range(100):
            graph = random_graph(rng, 30, p=0.3)
            labels = random_multi_label(rng, graph.num_nodes, 4)
            probs = random_probs(rng, graph)
            v = int(rng.integers(0, graph.num_nodes))
            base = metrics_service.wnh(graph, labels, probs, v)
            for factor in (0.0, 0.25, 0.5, 0.9, 1.0):
                weights = np.where(graph.sources() == v, factor, 1.0)
                scaled = metrics_service.wnh(graph, labels, probs.scaled(weights), v)
                assert abs(scaled - factor * base) <= 1e-12

    def test_thread_count_does_not_change_values(self, rng, monkeypatch):
        from dropreef.core.config import settings

        graph = random_graph(rng, 80, p=0.2)
        labels = random_one_hot(rng, graph.num_nodes, 3)
        probs = random_probs(rng, graph)
        monkeypatch.setattr(settings, "CHUNK_NODES", 9)
        one = metrics_service.wnh_all(graph, labels, probs, threads=1).wnh
        many = metrics_service.wnh_all(graph, labels, probs, threads=8).wnh
        assert one.tobytes() == many.tobytes()


class TestRankingHelpers:

    def test_top_count(self):
        assert top_count(10, 0.5) == 5
        assert top_count(10, 0.1) == 1
        assert top_count(7, 0.5) == 3
        assert top_count(3, 1.0) == 3

    def test_bucket_bounds(self):
        assert bucket_bounds(5, 5) == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
        assert bucket_bounds(7, 3) == [(0, 2), (2, 4), (4, 7)]

    def test_rank_ties_by_id(self):
        order = rank_descending(np.array([1.0, 3.0, 1.0, 3.0]), np.array([10, 11, 12, 13]))
        assert order.tolist() == [1, 3, 0, 2]


class TestDegreeQuantiles:

    def test_star(self):
        report = metrics_service.degree_quantiles(star_graph(9), 0.5, 5)
        first, *rest = report.buckets
        assert first.neighbor_share == 0.5
        assert first.average_degree == 9.0
        for bucket in rest:
            assert bucket.neighbor_share == pytest.approx(1 / 18)
            assert bucket.average_degree == 1.0
        assert report.tracked_nodes == 5
        assert [b.label for b in report.buckets] == ["0-10%", "10-20%", "20-30%", "30-40%", "40-50%"]
        total = sum(b.neighbor_share for b in report.buckets) + report.remainder_share
        assert total == pytest.approx(1.0)

    def test_ring(self):
        report = metrics_service.degree_quantiles(ring_graph(10), 0.5, 5)
        assert [b.neighbor_share for b in report.buckets] == [0.1] * 5
        assert [b.average_degree for b in report.buckets] == [2.0] * 5

    def test_edgeless(self):
        report = metrics_service.degree_quantiles(make_graph([], 4), 0.5, 2)
        assert all(b.neighbor_share == 0.0 for b in report.buckets)
        assert report.remainder_share == 0.0

    @pytest.mark.parametrize("top_fraction, buckets", [(0.0, 5), (1.5, 5), (0.5, 0)])
    def test_invalid_arguments(self, top_fraction, buckets):
        with pytest.raises(GraphInputError):
            metrics_service.degree_quantiles(ring_graph(10), top_fraction, buckets)


class TestOverlap:

    def test_heterophilic_hubs_fill_first_bucket(self):
        # nodes 0..9 are hubs with fully heterophilic neighborhoods
        edges = [(h, 10 + (7 * h + k) % 90) for h in range(10) for k in range(20)]
        edges += [(v, v + 1) for v in range(10, 99)]
        graph = make_graph(edges, 100)
        classes = list(range(1, 11)) + [0] * 90
        labels = LabelMatrix.one_hot(classes, 11)
        metrics = metrics_service.hete_all(graph, labels)
        report = metrics_service.overlap_report(metrics, graph, 0.1, 0.5, 5)
        assert report.top_wnh_count == 10
        assert report.buckets[0].fraction == 1.0
        assert report.outside_fraction == 0.0

    def test_equal_wnh_uses_id_order(self, clique4):
        metrics = metrics_service.hete_all(clique4, LabelMatrix.one_hot([0, 0, 0, 0]))
        report = metrics_service.overlap_report(metrics, clique4, 0.5, 0.5, 2)
        assert [b.fraction for b in report.buckets] == [0.5, 0.5]

    def test_metrics_from_other_graph(self, clique4, path3):
        metrics = metrics_service.hete_all(clique4, LabelMatrix.one_hot([0, 0, 0, 0]), [0, 1, 2])
        with pytest.raises(ConsistencyError):
            metrics_service.overlap_report(metrics, path3)

    def test_planted_hubs(self, planted_hubs):
        graph, labels, _, hubs = planted_hubs
        metrics = metrics_service.hete_all(graph, labels)
        report = metrics_service.overlap_report(metrics, graph, 0.01, 0.5, 5)
        assert report.top_wnh_count == hubs.shape[0]
        assert report.buckets[0].fraction >= 0.99


def test_write_snapshot(tmp_path, path3):
    labels = LabelMatrix.one_hot([0, 1, 1])
    metrics = metrics_service.hete_all(path3, labels, [0, 1])
    path = tmp_path / "wnh.tsv"
    metrics_service.write_snapshot(path, metrics)
    assert path.read_text() == (
        "node_id\tdegree\twnh\n"
        f"0\t1\t{SQRT2!r}\n"
        f"1\t2\t{SQRT2 / 2!r}\n"
    )


@pytest.mark.slow
def test_million_edge_sweep():
    from dropreef.services.graph_service import graph_service

    rng = np.random.default_rng(0)
    n = 200_000
    graph = graph_service.build_csr(rng.integers(0, n, size=(1_000_000, 2)), n)
    labels = LabelMatrix.one_hot(rng.integers(0, 40, size=n), 40)
    metrics = metrics_service.wnh_all(graph, labels, random_probs(rng, graph), threads=8)
    assert len(metrics) == n
    assert np.all(metrics.wnh <= SQRT2 + 1e-12)
