"""
Per-edge linking probabilities p_vu

Probabilities come from a precomputed file or from deterministic
neighborhood heuristics; no predictor is trained here.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Literal, Tuple, Union

import numpy as np

from dropreef.core.logging import logger, log_service_call
from dropreef.exceptions import ConsistencyError, GraphInputError
from dropreef.services.graph_service import CsrGraph, NodeIdMap, graph_service
from dropreef.utils.helpers import atomic_writer, format_float, iter_records
from dropreef.utils.validators import parse_node_id, validate_input_file

HeuristicMethod = Literal["jaccard", "common-neighbors"]
HEURISTIC_METHODS = ("jaccard", "common-neighbors")


@dataclass(frozen=True, eq=False)
class EdgeProbabilities:
    """One probability per directed slot, parallel to CsrGraph.targets"""
    values: np.ndarray

    def __post_init__(self):
        self.values.flags.writeable = False

    def validate(self, graph: CsrGraph) -> "EdgeProbabilities":
        if self.values.shape != (graph.num_slots,):
            raise ConsistencyError(
                "Probabilities are not aligned with the graph",
                details=f"{self.values.shape[0]} values for {graph.num_slots} slots",
            )
        if self.values.size and (
            not np.all(np.isfinite(self.values)) or self.values.min() < 0 or self.values.max() > 1
        ):
            raise ConsistencyError("Probabilities must lie in [0, 1]")
        reverse = graph_service.slot_index(graph, graph.targets, graph.sources())
        if not np.array_equal(self.values, self.values[reverse]):
            raise ConsistencyError("Probabilities are not symmetric")
        return self

    def scaled(self, factor: np.ndarray) -> "EdgeProbabilities":
        return EdgeProbabilities(values=self.values * factor)

    def remap(self, old_graph: CsrGraph, new_graph: CsrGraph, id_map: NodeIdMap) -> "EdgeProbabilities":
        """Carry values over to a reindexed graph whose edges all exist in old_graph"""
        old_src = id_map.inverse[new_graph.sources()]
        old_dst = id_map.inverse[new_graph.targets.astype(np.int64)]
        slots = graph_service.slot_index(old_graph, old_src, old_dst)
        if np.any(slots < 0):
            raise ConsistencyError("Reindexed graph has an edge missing from the source graph")
        return EdgeProbabilities(values=self.values[slots])


class LinkProbService:
    """Providers of EdgeProbabilities"""

    def uniform_probs(self, graph: CsrGraph) -> EdgeProbabilities:
        """Every p_vu = 1.0, which reduces WNH to plain neighbor heterophily"""
        return EdgeProbabilities(values=np.ones(graph.num_slots, dtype=np.float64))

    def load_probs(self, path: Union[str, Path], graph: CsrGraph) -> EdgeProbabilities:
        """
        Read `u v p` records; both directed slots of each edge receive p

        Edges without a record keep 1.0.

        Raises:
            GraphInputError: p outside [0, 1], (u, v) not an edge, or the same
                edge listed twice with different p
        """
        path = validate_input_file(path)
        log_service_call("LinkProbService", "load_probs", str(path))

        records: Dict[Tuple[int, int], Tuple[float, int]] = {}
        for line_no, tokens in iter_records(path):
            if len(tokens) != 3:
                raise GraphInputError(
                    f"Expected 'u v p', found {len(tokens)} tokens", path=path, line=line_no
                )
            u = parse_node_id(tokens[0], graph.num_nodes, path, line_no)
            v = parse_node_id(tokens[1], graph.num_nodes, path, line_no)
            try:
                p = float(tokens[2])
            except ValueError:
                raise GraphInputError(f"Invalid probability '{tokens[2]}'", path=path, line=line_no)
            if not 0.0 <= p <= 1.0:
                raise GraphInputError(
                    f"Probability {tokens[2]} outside [0, 1]", path=path, line=line_no
                )

            key = (min(u, v), max(u, v))
            if key in records and records[key][0] != p:
                raise GraphInputError(
                    f"Conflicting probability for edge {key}",
                    path=path, line=line_no,
                    details=f"line {records[key][1]} gave {records[key][0]}",
                )
            records[key] = (p, line_no)

        values = np.ones(graph.num_slots, dtype=np.float64)
        if records:
            keys = np.array(list(records.keys()), dtype=np.int64)
            probs = np.array([p for p, _ in records.values()], dtype=np.float64)
            lines = [line for _, line in records.values()]

            forward = graph_service.slot_index(graph, keys[:, 0], keys[:, 1])
            missing = np.flatnonzero(forward < 0)
            if missing.size:
                i = int(missing[0])
                raise GraphInputError(
                    f"({keys[i, 0]}, {keys[i, 1]}) is not an edge of the graph",
                    path=path, line=lines[i],
                )
            backward = graph_service.slot_index(graph, keys[:, 1], keys[:, 0])
            values[forward] = probs
            values[backward] = probs

        logger.info(f"Loaded {len(records)} probability records; {graph.num_undirected_edges - len(records)} edges default to 1.0")
        return EdgeProbabilities(values=values)

    def heuristic_probs(
        self,
        graph: CsrGraph,
        method: HeuristicMethod,
        threads: int = 0,
    ) -> EdgeProbabilities:
        """
        Neighborhood-overlap scores in [0, 1]

        jaccard: |N(v) ∩ N(u)| / |N(v)\\{u} ∪ N(u)\\{v}| (0 when the union is empty)
        common-neighbors: |N(v) ∩ N(u)| divided by its maximum over all edges
        """
        if method not in HEURISTIC_METHODS:
            raise GraphInputError(
                f"Unknown heuristic '{method}'", details=f"Choose one of {', '.join(HEURISTIC_METHODS)}"
            )
        log_service_call("LinkProbService", "heuristic_probs", method)

        common = graph_service.common_neighbor_counts(graph, threads).astype(np.float64)
        values = np.zeros(graph.num_slots, dtype=np.float64)
        if method == "jaccard":
            degrees = graph.degrees
            union = (
                degrees[graph.sources()] - 1
                + degrees[graph.targets.astype(np.int64)] - 1
                - common
            )
            nonempty = union > 0
            values[nonempty] = common[nonempty] / union[nonempty]
        else:
            peak = common.max() if common.size else 0.0
            if peak > 0:
                values = common / peak
        return EdgeProbabilities(values=values)

    def write_probs(self, path: Union[str, Path], graph: CsrGraph, probs: EdgeProbabilities) -> None:
        """One `u v p` record per undirected edge, u < v, ascending"""
        src = graph.sources()
        dst = graph.targets.astype(np.int64)
        upper = np.flatnonzero(src < dst)
        with atomic_writer(path) as handle:
            for u, v, p in zip(src[upper].tolist(), dst[upper].tolist(), probs.values[upper].tolist()):
                handle.write(f"{u} {v} {format_float(p)}\n")


# Global instance
link_prob_service = LinkProbService()

uniform_probs = link_prob_service.uniform_probs
load_probs = link_prob_service.load_probs
heuristic_probs = link_prob_service.heuristic_probs
