"""
In-memory undirected graph in compressed sparse row form
Builds, validates and reindexes the graph every other service consumes
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from dropreef.core.config import settings
from dropreef.core.logging import logger, log_service_call
from dropreef.exceptions import ConsistencyError, GraphInputError
from dropreef.utils.parallel import map_chunks, node_chunks

NodeIds = Union[Sequence[int], np.ndarray, Iterable[int]]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """
    Simple undirected graph

    Row v of (offsets, targets) is the strictly ascending neighbor list
    N(v); every undirected edge is stored once per direction.
    """
    num_nodes: int
    offsets: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        _frozen(self.offsets)
        _frozen(self.targets)

    @property
    def num_slots(self) -> int:
        return int(self.targets.shape[0])

    @property
    def num_undirected_edges(self) -> int:
        return self.num_slots // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def sources(self) -> np.ndarray:
        """Source node of every slot, parallel to targets"""
        return np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees)

    def to_scipy(self, dtype=np.int64) -> sp.csr_matrix:
        data = np.ones(self.num_slots, dtype=dtype)
        return sp.csr_matrix(
            (data, self.targets.astype(np.int64), self.offsets),
            shape=(self.num_nodes, self.num_nodes),
        )

    def check_node(self, v: int) -> int:
        if not 0 <= int(v) < self.num_nodes:
            raise GraphInputError(
                f"Node id {v} out of range",
                details=f"Graph has {self.num_nodes} nodes",
            )
        return int(v)

    def validate(self) -> "CsrGraph":
        """
        Check every structural invariant by direct scan

        Raises:
            ConsistencyError: on the first violated invariant
        """
        n = self.num_nodes
        offsets = self.offsets
        targets = self.targets.astype(np.int64)

        if offsets.shape[0] != n + 1 or offsets[0] != 0 or offsets[-1] != targets.shape[0]:
            raise ConsistencyError("Offsets do not frame the targets array")
        if np.any(np.diff(offsets) < 0):
            raise ConsistencyError("Offsets are not non-decreasing")
        if targets.size and (targets.min() < 0 or targets.max() >= n):
            raise ConsistencyError("Target id out of range")

        src = self.sources()
        if np.any(src == targets):
            raise ConsistencyError("Self-loop present")

        # Rows strictly ascending <=> the (src, dst) key sequence strictly ascends
        keys = src * n + targets
        if keys.size > 1 and np.any(np.diff(keys) <= 0):
            raise ConsistencyError("Neighbor lists are not strictly ascending")

        reverse = np.sort(targets * n + src)
        if not np.array_equal(keys, reverse):
            raise ConsistencyError("Adjacency is not symmetric")
        if targets.shape[0] % 2:
            raise ConsistencyError("Odd number of directed slots")
        return self


@dataclass(frozen=True, eq=False)
class NodeIdMap:
    """Bijection between retained old ids and the contiguous new range"""
    forward: np.ndarray  # old id -> new id, -1 when removed
    inverse: np.ndarray  # new id -> old id

    def __post_init__(self):
        _frozen(self.forward)
        _frozen(self.inverse)

    @classmethod
    def identity(cls, num_nodes: int) -> "NodeIdMap":
        ids = np.arange(num_nodes, dtype=np.int64)
        return cls(forward=ids, inverse=ids.copy())

    @classmethod
    def from_retained(cls, num_old: int, retained: np.ndarray) -> "NodeIdMap":
        forward = np.full(num_old, -1, dtype=np.int64)
        forward[retained] = np.arange(retained.shape[0], dtype=np.int64)
        return cls(forward=forward, inverse=retained.astype(np.int64))

    @property
    def num_old(self) -> int:
        return int(self.forward.shape[0])

    @property
    def num_new(self) -> int:
        return int(self.inverse.shape[0])


def _from_sorted_pairs(num_nodes: int, src: np.ndarray, dst: np.ndarray) -> CsrGraph:
    counts = np.bincount(src, minlength=num_nodes) if src.size else np.zeros(num_nodes, np.int64)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CsrGraph(
        num_nodes=num_nodes,
        offsets=offsets,
        targets=dst.astype(settings.node_id_dtype),
    )


def as_node_array(nodes: NodeIds, num_nodes: int, what: str) -> np.ndarray:
    if isinstance(nodes, np.ndarray):
        array = nodes.astype(np.int64).ravel()
    else:
        array = np.fromiter(nodes, dtype=np.int64)
    array = np.unique(array)
    if array.size and (array[0] < 0 or array[-1] >= num_nodes):
        bad = array[(array < 0) | (array >= num_nodes)][0]
        raise GraphInputError(
            f"{what} contains node id {bad} outside [0, {num_nodes})"
        )
    return array


class GraphService:
    """Construction and reindexing of CsrGraph instances"""

    def build_csr(self, edges, num_nodes: int) -> CsrGraph:
        """
        Build a simple undirected graph from (u, v) pairs

        Both directions are stored, self-loops are discarded and
        duplicates collapse to a single edge.

        Raises:
            GraphInputError: if any id lies outside [0, num_nodes)
        """
        if num_nodes < 0:
            raise GraphInputError(f"Negative node count {num_nodes}")
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            bad = np.flatnonzero(np.any((pairs < 0) | (pairs >= num_nodes), axis=1))
            if bad.size:
                i = int(bad[0])
                raise GraphInputError(
                    f"Edge #{i} ({pairs[i, 0]}, {pairs[i, 1]}) has a node id outside [0, {num_nodes})"
                )

        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        loops = src == dst
        keys = np.unique(src[~loops] * num_nodes + dst[~loops])
        graph = _from_sorted_pairs(num_nodes, keys // max(num_nodes, 1), keys % max(num_nodes, 1))

        logger.debug(
            f"Built CSR: {num_nodes} nodes, {graph.num_undirected_edges} edges "
            f"({int(loops.sum()) // 2} self-loops dropped)"
        )
        return graph

    def degree(self, graph: CsrGraph, v: int) -> int:
        v = graph.check_node(v)
        return int(graph.offsets[v + 1] - graph.offsets[v])

    def neighbors(self, graph: CsrGraph, v: int) -> np.ndarray:
        v = graph.check_node(v)
        return graph.targets[graph.offsets[v]:graph.offsets[v + 1]]

    def edge_list(self, graph: CsrGraph) -> np.ndarray:
        """Canonical (u, v) pairs with u < v in ascending order"""
        src = graph.sources()
        dst = graph.targets.astype(np.int64)
        upper = src < dst
        return np.stack([src[upper], dst[upper]], axis=1)

    def slot_index(self, graph: CsrGraph, src, dst) -> np.ndarray:
        """Position in targets of each directed pair, -1 if not an edge"""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        n = graph.num_nodes
        keys = graph.sources() * n + graph.targets.astype(np.int64)
        query = src * n + dst
        pos = np.searchsorted(keys, query)
        found = pos < keys.shape[0]
        found[found] &= keys[pos[found]] == query[found]
        return np.where(found, pos, -1)

    def select(
        self,
        graph: CsrGraph,
        keep_nodes: np.ndarray,
        keep_slots: Optional[np.ndarray] = None,
    ) -> Tuple[CsrGraph, NodeIdMap, np.ndarray]:
        """
        Keep a node subset (boolean mask) and optionally a slot subset

        Returns the reindexed graph, the id map and the retained old slot
        positions in new-graph order.
        """
        src = graph.sources()
        dst = graph.targets.astype(np.int64)
        slot_mask = keep_nodes[src] & keep_nodes[dst]
        if keep_slots is not None:
            slot_mask &= keep_slots

        id_map = NodeIdMap.from_retained(graph.num_nodes, np.flatnonzero(keep_nodes))
        # forward is monotone, so the lexicographic slot order survives
        new_graph = _from_sorted_pairs(
            id_map.num_new,
            id_map.forward[src[slot_mask]],
            id_map.forward[dst[slot_mask]],
        )
        return new_graph, id_map, np.flatnonzero(slot_mask)

    def remove_nodes(self, graph: CsrGraph, drop: NodeIds) -> Tuple[CsrGraph, NodeIdMap]:
        """Delete nodes and every incident edge, reindexing the rest"""
        drop = as_node_array(drop, graph.num_nodes, "Drop set")
        log_service_call("GraphService", "remove_nodes", f"{drop.size} of {graph.num_nodes} nodes")
        keep = np.ones(graph.num_nodes, dtype=bool)
        keep[drop] = False
        new_graph, id_map, _ = self.select(graph, keep)
        return new_graph, id_map

    def induced_subgraph(self, graph: CsrGraph, nodes: NodeIds) -> Tuple[CsrGraph, NodeIdMap]:
        """Subgraph on `nodes` with every edge whose endpoints both survive"""
        nodes = as_node_array(nodes, graph.num_nodes, "Node set")
        keep = np.zeros(graph.num_nodes, dtype=bool)
        keep[nodes] = True
        new_graph, id_map, _ = self.select(graph, keep)
        return new_graph, id_map

    def common_neighbor_counts(self, graph: CsrGraph, threads: int = 0) -> np.ndarray:
        """
        |N(v) ∩ N(u)| for every slot (v -> u), parallel to targets

        Rows are processed in fixed node-range chunks as sparse products
        A[chunk] @ A restricted to the chunk's own edge pattern.
        """
        adjacency = graph.to_scipy()

        def count_chunk(start: int, stop: int) -> np.ndarray:
            rows = adjacency[start:stop]
            if rows.nnz == 0:
                return np.zeros(0, dtype=np.int64)
            # 1 + count on every edge slot keeps the pattern equal to `rows`
            shifted = (rows + rows.multiply(rows @ adjacency)).tocsr()
            shifted.sort_indices()
            if shifted.nnz != rows.nnz:
                raise ConsistencyError("Common-neighbor pattern does not match adjacency")
            return np.asarray(shifted.data, dtype=np.int64) - 1

        parts = map_chunks(count_chunk, node_chunks(graph.num_nodes), threads)
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def filter_slots(self, graph: CsrGraph, keep_slots: np.ndarray) -> CsrGraph:
        """Drop edges only; the slot mask must be symmetric"""
        keep = np.ones(graph.num_nodes, dtype=bool)
        new_graph, _, _ = self.select(graph, keep, keep_slots)
        return new_graph


# Global instance
graph_service = GraphService()

build_csr = graph_service.build_csr
degree = graph_service.degree
neighbors = graph_service.neighbors
remove_nodes = graph_service.remove_nodes
induced_subgraph = graph_service.induced_subgraph
edge_list = graph_service.edge_list
slot_index = graph_service.slot_index
