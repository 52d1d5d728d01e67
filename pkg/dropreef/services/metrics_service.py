"""
Neighbor heterophily metrics and degree-distribution quantifications
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from dropreef.core.config import settings
from dropreef.core.logging import logger, log_service_call
from dropreef.exceptions import ConsistencyError, GraphInputError
from dropreef.schemas.report import OverlapBucket, OverlapReport, QuantileBucket, QuantileReport
from dropreef.services.bundle_service import LabelMatrix
from dropreef.services.graph_service import CsrGraph, NodeIds, as_node_array
from dropreef.services.link_prob_service import EdgeProbabilities, link_prob_service
from dropreef.utils.helpers import atomic_writer, format_float
from dropreef.utils.parallel import map_chunks, node_chunks

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class NodeMetrics:
    """Degree and WNH for an ascending node subset"""
    nodes: np.ndarray
    degree: np.ndarray
    wnh: np.ndarray

    def __post_init__(self):
        for array in (self.nodes, self.degree, self.wnh):
            array.flags.writeable = False

    def __len__(self) -> int:
        return int(self.nodes.shape[0])

    def positions(self, nodes: np.ndarray) -> np.ndarray:
        """Index of each node in this metrics table; ConsistencyError if absent"""
        nodes = np.asarray(nodes, dtype=np.int64)
        pos = np.searchsorted(self.nodes, nodes)
        present = pos < len(self)
        present[present] &= self.nodes[pos[present]] == nodes[present]
        if not np.all(present):
            missing = nodes[~present][0]
            raise ConsistencyError(f"No metrics for node {int(missing)}")
        return pos

    def value(self, v: int) -> float:
        return float(self.wnh[self.positions(np.array([v]))[0]])


def top_count(total: int, fraction: float) -> int:
    """Number of items in the top `fraction` of `total` (floor)"""
    return min(total, int(math.floor(fraction * total + 1e-9)))


def rank_descending(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Order of positions by value descending, ties by ascending node id"""
    return np.lexsort((nodes, -values))


def bucket_bounds(tracked: int, buckets: int) -> List[Tuple[int, int]]:
    """Equal-count [start, end) rank ranges; the last absorbs the remainder"""
    size = tracked // buckets
    bounds = [(i * size, (i + 1) * size) for i in range(buckets - 1)]
    bounds.append(((buckets - 1) * size, tracked))
    return bounds


def _bucket_label(start: int, end: int, total: int) -> str:
    if total == 0:
        return "0-0%"
    return f"{100.0 * start / total:.4g}-{100.0 * end / total:.4g}%"


def _segment_sums(values: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Per-segment sums of consecutive runs; empty segments give 0"""
    sums = np.zeros(lengths.shape[0], dtype=np.float64)
    nonempty = lengths > 0
    if values.size:
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        sums[nonempty] = np.add.reduceat(values, starts[nonempty])
    return sums


class MetricsService:
    """Per-node heterophily and the distribution reports built on it"""

    def label_distance(self, cv: Sequence[float], cu: Sequence[float]) -> float:
        """Euclidean norm of c_v - c_u"""
        cv = np.asarray(cv, dtype=np.float64)
        cu = np.asarray(cu, dtype=np.float64)
        if cv.shape != cu.shape:
            raise GraphInputError(
                "Label vectors differ in length", details=f"{cv.shape[0]} vs {cu.shape[0]}"
            )
        return float(np.linalg.norm(cv - cu))

    def _check_inputs(self, graph: CsrGraph, labels: LabelMatrix, probs: Optional[EdgeProbabilities]) -> None:
        if labels.num_nodes != graph.num_nodes:
            raise ConsistencyError(
                "Labels and graph disagree on node count",
                details=f"{labels.num_nodes} vs {graph.num_nodes}",
            )
        if probs is not None and probs.values.shape[0] != graph.num_slots:
            raise ConsistencyError("Probabilities are not aligned with the graph")

    def _sweep(
        self,
        graph: CsrGraph,
        labels: LabelMatrix,
        probs: Optional[EdgeProbabilities],
        nodes: np.ndarray,
        threads: int = 0,
    ) -> np.ndarray:
        """Chunked WNH of `nodes`; probs=None weighs every slot 1.0"""
        packed = np.packbits(labels.rows.astype(bool), axis=1)
        offsets = graph.offsets
        targets = graph.targets
        weights = None if probs is None else probs.values

        def sweep_chunk(start: int, stop: int) -> np.ndarray:
            chunk = nodes[start:stop]
            begins = offsets[chunk]
            lengths = offsets[chunk + 1] - begins
            total = int(lengths.sum())
            if total == 0:
                return np.zeros(chunk.shape[0], dtype=np.float64)

            # slot positions of every node's neighbor run, in ascending neighbor order
            run_starts = np.cumsum(lengths) - lengths
            slots = np.repeat(begins - run_starts, lengths) + np.arange(total, dtype=np.int64)
            src = np.repeat(chunk, lengths)
            dst = targets[slots].astype(np.int64)

            hamming = _POPCOUNT[np.bitwise_xor(packed[src], packed[dst])].sum(axis=1)
            terms = np.sqrt(hamming.astype(np.float64))
            if weights is not None:
                terms = weights[slots] * terms
            sums = _segment_sums(terms, lengths)
            out = np.zeros(chunk.shape[0], dtype=np.float64)
            nonzero = lengths > 0
            out[nonzero] = sums[nonzero] / lengths[nonzero]
            return out

        parts = map_chunks(sweep_chunk, node_chunks(nodes.shape[0]), threads)
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.float64)

    def hete(self, graph: CsrGraph, labels: LabelMatrix, v: int) -> float:
        """Mean label distance from v to its neighbors; 0 for isolated nodes"""
        v = graph.check_node(v)
        self._check_inputs(graph, labels, None)
        return float(self._sweep(graph, labels, None, np.array([v], dtype=np.int64))[0])

    def wnh(self, graph: CsrGraph, labels: LabelMatrix, probs: EdgeProbabilities, v: int) -> float:
        """Probability-weighted mean label distance; 0 for isolated nodes"""
        v = graph.check_node(v)
        self._check_inputs(graph, labels, probs)
        return float(self._sweep(graph, labels, probs, np.array([v], dtype=np.int64))[0])

    def wnh_all(
        self,
        graph: CsrGraph,
        labels: LabelMatrix,
        probs: EdgeProbabilities,
        subset: Optional[NodeIds] = None,
        threads: int = 0,
    ) -> NodeMetrics:
        """
        WNH for every node of `subset` (all nodes when None)

        Node-parallel over fixed chunks; output is identical for any
        thread count.
        """
        self._check_inputs(graph, labels, probs)
        if subset is None:
            nodes = np.arange(graph.num_nodes, dtype=np.int64)
        else:
            nodes = as_node_array(subset, graph.num_nodes, "Metric subset")
        log_service_call("MetricsService", "wnh_all", f"{nodes.shape[0]} nodes")

        values = self._sweep(graph, labels, probs, nodes, threads)
        return NodeMetrics(nodes=nodes, degree=graph.degrees[nodes].astype(np.int64), wnh=values)

    def hete_all(
        self,
        graph: CsrGraph,
        labels: LabelMatrix,
        subset: Optional[NodeIds] = None,
        threads: int = 0,
    ) -> NodeMetrics:
        return self.wnh_all(graph, labels, link_prob_service.uniform_probs(graph), subset, threads)

    # -------------------- DISTRIBUTIONS --------------------

    def _degree_buckets(
        self,
        nodes: np.ndarray,
        degrees: np.ndarray,
        top_fraction: float,
        buckets: int,
    ) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
        if not 0 < top_fraction <= 1:
            raise GraphInputError(f"top_fraction must lie in (0, 1], got {top_fraction}")
        if buckets < 1:
            raise GraphInputError(f"buckets must be at least 1, got {buckets}")
        order = rank_descending(degrees.astype(np.float64), nodes)
        tracked = top_count(nodes.shape[0], top_fraction)
        return order, bucket_bounds(tracked, buckets)

    def degree_quantiles(
        self,
        graph: CsrGraph,
        top_fraction: Optional[float] = None,
        buckets: Optional[int] = None,
    ) -> QuantileReport:
        """
        Neighbor share and average degree of equal-count slices of the
        highest-degree nodes
        """
        top_fraction = settings.TOP_FRACTION if top_fraction is None else top_fraction
        buckets = settings.QUANTILE_BUCKETS if buckets is None else buckets
        nodes = np.arange(graph.num_nodes, dtype=np.int64)
        degrees = graph.degrees.astype(np.int64)
        order, bounds = self._degree_buckets(nodes, degrees, top_fraction, buckets)

        total = int(degrees.sum())
        ranked = degrees[order]
        rows = []
        tracked_sum = 0
        for start, end in bounds:
            bucket_sum = int(ranked[start:end].sum())
            count = end - start
            tracked_sum += bucket_sum
            rows.append(QuantileBucket(
                label=_bucket_label(start, end, graph.num_nodes),
                start_rank=start,
                end_rank=end,
                node_count=count,
                degree_sum=bucket_sum,
                neighbor_share=bucket_sum / total if total else 0.0,
                average_degree=bucket_sum / count if count else 0.0,
            ))

        return QuantileReport(
            num_nodes=graph.num_nodes,
            total_degree=total,
            top_fraction=top_fraction,
            tracked_nodes=bounds[-1][1],
            buckets=rows,
            remainder_share=(total - tracked_sum) / total if total else 0.0,
        )

    def overlap_report(
        self,
        metrics: NodeMetrics,
        graph: CsrGraph,
        wnh_top_fraction: Optional[float] = None,
        degree_top_fraction: Optional[float] = None,
        buckets: Optional[int] = None,
    ) -> OverlapReport:
        """
        Fraction of the top-WNH nodes that land in each degree bucket

        Both rankings run over the nodes of `metrics`.
        """
        wnh_top_fraction = settings.WNH_TOP_FRACTION if wnh_top_fraction is None else wnh_top_fraction
        degree_top_fraction = settings.TOP_FRACTION if degree_top_fraction is None else degree_top_fraction
        buckets = settings.QUANTILE_BUCKETS if buckets is None else buckets
        if not 0 < wnh_top_fraction <= 1:
            raise GraphInputError(f"wnh_top_fraction must lie in (0, 1], got {wnh_top_fraction}")
        if np.any(graph.degrees[metrics.nodes] != metrics.degree):
            raise ConsistencyError("Metrics were computed on a different graph")

        total = len(metrics)
        order, bounds = self._degree_buckets(metrics.nodes, metrics.degree, degree_top_fraction, buckets)
        degree_rank = np.empty(total, dtype=np.int64)
        degree_rank[order] = np.arange(total, dtype=np.int64)

        k = top_count(total, wnh_top_fraction)
        top = rank_descending(metrics.wnh, metrics.nodes)[:k]
        top_ranks = degree_rank[top]

        rows = []
        inside = 0
        for start, end in bounds:
            hits = int(np.count_nonzero((top_ranks >= start) & (top_ranks < end)))
            inside += hits
            rows.append(OverlapBucket(
                label=_bucket_label(start, end, total),
                start_rank=start,
                end_rank=end,
                fraction=hits / k if k else 0.0,
            ))

        return OverlapReport(
            num_nodes=total,
            wnh_top_fraction=wnh_top_fraction,
            degree_top_fraction=degree_top_fraction,
            top_wnh_count=k,
            buckets=rows,
            outside_fraction=(k - inside) / k if k else 0.0,
        )

    # -------------------- SNAPSHOT --------------------

    def write_snapshot(self, path: Union[str, Path], metrics: NodeMetrics) -> None:
        """TSV node_id, degree, wnh sorted by node id"""
        with atomic_writer(path) as handle:
            handle.write("node_id\tdegree\twnh\n")
            for v, d, w in zip(metrics.nodes.tolist(), metrics.degree.tolist(), metrics.wnh.tolist()):
                handle.write(f"{v}\t{d}\t{format_float(w)}\n")
        logger.info(f"WNH snapshot written: {path} ({len(metrics)} nodes)")


# Global instance
metrics_service = MetricsService()

label_distance = metrics_service.label_distance
hete = metrics_service.hete
wnh = metrics_service.wnh
wnh_all = metrics_service.wnh_all
hete_all = metrics_service.hete_all
degree_quantiles = metrics_service.degree_quantiles
overlap_report = metrics_service.overlap_report
