"""
Redundancy detection and dropping orchestration
Computes metrics, detects redundant training nodes and emits the
low-redundancy graph
"""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np

from dropreef.core.logging import log_service_call, log_stage, logger
from dropreef.exceptions import ConsistencyError, DropReefError, GraphInputError
from dropreef.schemas.drop import DropConfig, DropReport, ThresholdHints, ThresholdRequest
from dropreef.services.bundle_service import UNLABELED, LabelMatrix, SplitMask
from dropreef.services.graph_service import CsrGraph, NodeIdMap, NodeIds, as_node_array, graph_service
from dropreef.services.link_prob_service import EdgeProbabilities
from dropreef.services.metrics_service import NodeMetrics, metrics_service, rank_descending, top_count

HINT_QUANTILES = (0.5, 0.9, 0.95, 0.99)


@dataclass(frozen=True, eq=False)
class DropResult:
    """Low-redundancy graph plus what is needed to remap companion files"""
    graph: CsrGraph
    id_map: NodeIdMap
    split: SplitMask
    report: DropReport


@dataclass(frozen=True, eq=False)
class DropRun:
    metrics: NodeMetrics
    redundant: np.ndarray
    result: DropResult
    config: DropConfig
    stage_seconds: Dict[str, float] = field(default_factory=dict)


class DropReefService:
    """
    Offline three-step pipeline: compute metrics, detect redundancy, drop
    """

    def detect_redundant(
        self,
        metrics: NodeMetrics,
        graph: CsrGraph,
        mask: SplitMask,
        config: DropConfig,
    ) -> np.ndarray:
        """
        Training nodes with degree >= th_deg and WNH >= th_wnh, ascending

        Raises:
            ConsistencyError: if a training node has no metrics
        """
        train = mask.train_nodes()
        positions = metrics.positions(train)
        degree = graph.degrees[train]
        wnh = metrics.wnh[positions]
        redundant = train[(degree >= config.th_deg) & (wnh >= config.th_wnh)]
        logger.info(
            f"Detected {redundant.shape[0]} redundant of {train.shape[0]} training nodes "
            f"(TH_WNH={config.th_wnh}, TH_DEG={config.th_deg})"
        )
        return redundant

    def top_degree_nodes(self, graph: CsrGraph, mask: SplitMask, fraction: float) -> np.ndarray:
        """The highest-degree `fraction` of training nodes (ties by id), ascending"""
        if not 0 <= fraction <= 1:
            raise GraphInputError(f"fraction must lie in [0, 1], got {fraction}")
        train = mask.train_nodes()
        order = rank_descending(graph.degrees[train].astype(np.float64), train)
        return np.sort(train[order[:top_count(train.shape[0], fraction)]])

    def drop(
        self,
        graph: CsrGraph,
        redundant: NodeIds,
        mask: SplitMask,
        config: Optional[DropConfig] = None,
    ) -> DropResult:
        """
        Remove redundant training nodes and their edges

        By default every incident edge goes, including edges to validation
        and test nodes. With retain_inference_edges the dropped nodes stay
        in the graph with role `none` and keep their edges to validation
        and test nodes.

        Raises:
            GraphInputError: if a redundant node is not a training node
        """
        redundant = as_node_array(redundant, graph.num_nodes, "Redundant set")
        is_train = mask.is_train()
        if redundant.size and not np.all(is_train[redundant]):
            outsider = int(redundant[~is_train[redundant]][0])
            raise GraphInputError(
                f"Node {outsider} is not a training node",
                details="Redundant nodes are dropped from the training set only",
            )
        retain = bool(config and config.retain_inference_edges)
        log_service_call(
            "DropReefService", "drop",
            f"{redundant.shape[0]} nodes, retain_inference_edges={retain}",
        )

        dropped = np.zeros(graph.num_nodes, dtype=bool)
        dropped[redundant] = True
        src = graph.sources()
        dst = graph.targets.astype(np.int64)
        upper = src < dst

        touches_dropped = dropped[src] | dropped[dst]
        if retain:
            training_side = is_train[src] & is_train[dst]
            removed_slots = touches_dropped & training_side
            new_graph = graph_service.filter_slots(graph, ~removed_slots)
            id_map = NodeIdMap.identity(graph.num_nodes)
            split = mask.with_role(redundant, UNLABELED)
        else:
            removed_slots = touches_dropped
            new_graph, id_map = graph_service.remove_nodes(graph, redundant)
            split = mask.remap(id_map)

        train_count = int(is_train.sum())
        train_edge_count = int(np.count_nonzero(upper & (is_train[src] | is_train[dst])))
        removed_edge_count = int(np.count_nonzero(upper & removed_slots))

        report = DropReport(
            dropped=redundant.tolist(),
            dropped_count=int(redundant.shape[0]),
            train_count=train_count,
            removed_edge_count=removed_edge_count,
            train_edge_count=train_edge_count,
            drop_node_ratio=redundant.shape[0] / train_count if train_count else 0.0,
            drop_edge_ratio=removed_edge_count / train_edge_count if train_edge_count else 0.0,
            th_wnh=config.th_wnh if config else None,
            th_deg=config.th_deg if config else None,
            retain_inference_edges=retain,
        )
        logger.info(
            f"Dropped {report.dropped_count} nodes and {removed_edge_count} edges "
            f"(node ratio {report.drop_node_ratio:.4f}, edge ratio {report.drop_edge_ratio:.4f})"
        )
        return DropResult(graph=new_graph, id_map=id_map, split=split, report=report)

    def run_dropreef(
        self,
        graph: CsrGraph,
        labels: LabelMatrix,
        probs: EdgeProbabilities,
        mask: SplitMask,
        config: Union[DropConfig, ThresholdRequest],
        snapshot_path: Optional[Union[str, Path]] = None,
        threads: int = 0,
    ) -> DropRun:
        """
        Complete pipeline: WNH over the training set, detection, drop

        `config` is either fixed thresholds or a ThresholdRequest resolved
        against the training metrics after step 1. The WNH snapshot is saved
        when `snapshot_path` is given.
        """
        log_service_call("DropReefService", "run_dropreef", config.model_dump())
        stages: Dict[str, float] = {}
        mode = config.mode if isinstance(config, ThresholdRequest) else "thresholds"

        try:
            logger.info("Step 1/3: Computing metrics...")
            started = time.perf_counter()
            metrics = metrics_service.wnh_all(graph, labels, probs, mask.train_nodes(), threads)
            if snapshot_path is not None:
                metrics_service.write_snapshot(snapshot_path, metrics)
            stages["metrics"] = time.perf_counter() - started
            log_stage("metrics", stages["metrics"])

            logger.info("Step 2/3: Detecting redundancy...")
            started = time.perf_counter()
            if isinstance(config, ThresholdRequest) and config.naive_top_degree is not None:
                redundant = self.top_degree_nodes(graph, mask, config.naive_top_degree)
                config = DropConfig(th_wnh=0.0, th_deg=1,
                                    retain_inference_edges=config.retain_inference_edges)
            else:
                if isinstance(config, ThresholdRequest):
                    config = self.resolve_thresholds(config, metrics, graph, mask)
                redundant = self.detect_redundant(metrics, graph, mask, config)
            stages["detect"] = time.perf_counter() - started
            log_stage("detect", stages["detect"])

            logger.info("Step 3/3: Dropping redundant nodes...")
            started = time.perf_counter()
            result = self.drop(graph, redundant, mask, config)
            stages["drop"] = time.perf_counter() - started
            log_stage("drop", stages["drop"])

        except DropReefError:
            raise

        except Exception as e:
            logger.error(f"DropReef failed: {type(e).__name__} - {str(e)}")
            raise ConsistencyError("Unexpected error during DropReef", details=str(e))

        result.report.mode = mode
        if mode != "thresholds":
            result.report.th_wnh = None
            result.report.th_deg = None
        if snapshot_path is not None:
            result.report.wnh_snapshot = str(snapshot_path)
        return DropRun(metrics=metrics, redundant=redundant, result=result, config=config,
                       stage_seconds=stages)

    # -------------------- THRESHOLDS --------------------

    def threshold_from_quantile(self, values: Sequence[float], q: float) -> float:
        """Nearest-rank value at ceil(q * (n - 1)) of the ascending values"""
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            raise GraphInputError("Cannot take a quantile of an empty value set")
        if not 0 <= q <= 1:
            raise GraphInputError(f"Quantile must lie in [0, 1], got {q}")
        rank = int(math.ceil(q * (values.size - 1) - 1e-9))
        return float(np.sort(values)[max(rank, 0)])

    def resolve_thresholds(
        self,
        request: ThresholdRequest,
        metrics: NodeMetrics,
        graph: CsrGraph,
        mask: SplitMask,
    ) -> DropConfig:
        """
        Fixed thresholds for a request, quantiles taken over the training set

        A degree quantile becomes max(1, ceil(value)).

        Raises:
            GraphInputError: a threshold is given both ways or not at all
        """
        if (request.th_wnh is None) == (request.wnh_quantile is None):
            raise GraphInputError("Give exactly one of th_wnh or wnh_quantile")
        if (request.th_deg is None) == (request.deg_quantile is None):
            raise GraphInputError("Give exactly one of th_deg or deg_quantile")

        train = mask.train_nodes()
        th_wnh = request.th_wnh
        if th_wnh is None:
            th_wnh = self.threshold_from_quantile(metrics.wnh[metrics.positions(train)], request.wnh_quantile)
        th_deg = request.th_deg
        if th_deg is None:
            value = self.threshold_from_quantile(graph.degrees[train], request.deg_quantile)
            th_deg = max(1, int(math.ceil(value)))
        logger.info(f"Resolved thresholds TH_WNH={th_wnh}, TH_DEG={th_deg}")
        return DropConfig(th_wnh=th_wnh, th_deg=th_deg,
                          retain_inference_edges=request.retain_inference_edges)

    def threshold_hints(
        self,
        graph: CsrGraph,
        labels: LabelMatrix,
        mask: SplitMask,
        metrics: NodeMetrics,
    ) -> ThresholdHints:
        """Reference points for TH_WNH and TH_DEG"""
        train = mask.train_nodes()
        bound = math.sqrt(labels.num_classes) if labels.multi_label else math.sqrt(2.0)
        degrees = graph.degrees[train].astype(np.float64)
        wnh = metrics.wnh[metrics.positions(train)]

        def quantiles(values: np.ndarray) -> Dict[str, float]:
            if values.size == 0:
                return {}
            return {f"q{q:g}": self.threshold_from_quantile(values, q) for q in HINT_QUANTILES}

        return ThresholdHints(
            multi_label=labels.multi_label,
            num_classes=labels.num_classes,
            wnh_upper_bound=bound,
            average_degree=graph.num_slots / graph.num_nodes if graph.num_nodes else 0.0,
            train_count=int(train.shape[0]),
            degree_quantiles=quantiles(degrees),
            wnh_quantiles=quantiles(wnh),
        )


# Global instance
dropreef_service = DropReefService()

detect_redundant = dropreef_service.detect_redundant
drop = dropreef_service.drop
run_dropreef = dropreef_service.run_dropreef
threshold_from_quantile = dropreef_service.threshold_from_quantile
resolve_thresholds = dropreef_service.resolve_thresholds
