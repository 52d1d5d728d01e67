"""
Random node sampling and structural statistics of sampled subgraphs

Randomness: numpy Generator(PCG64(seed)); per-sample seeds of a batch are
SeedSequence(seed).spawn(num_samples).
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from dropreef.core.config import settings
from dropreef.core.logging import logger, log_service_call
from dropreef.exceptions import GraphInputError, ResourceLimitError
from dropreef.schemas.report import DensityRegion, StatsComparison, SubgraphStats
from dropreef.services.graph_service import CsrGraph, NodeIdMap, graph_service
from dropreef.utils.helpers import atomic_writer
from dropreef.utils.parallel import map_chunks


@dataclass(frozen=True, eq=False)
class SharedNeighborMatrix:
    """n_vu = |N(v) ∩ N(u)| inside one subgraph, zero diagonal"""
    counts: np.ndarray  # (n, n) int64

    def __post_init__(self):
        self.counts.flags.writeable = False

    @property
    def size(self) -> int:
        return int(self.counts.shape[0])


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class SamplingService:
    """Subgraph sampler and the diagnostics computed on its output"""

    def sample_nodes(self, graph: CsrGraph, budget: int, seed: Union[int, np.random.SeedSequence]) -> np.ndarray:
        """Uniform sample of `budget` distinct nodes, ascending"""
        if budget < 0 or budget > graph.num_nodes:
            raise GraphInputError(
                f"Budget {budget} outside [0, {graph.num_nodes}]",
                details="The sample is drawn without replacement",
            )
        picked = make_rng(seed).choice(graph.num_nodes, size=budget, replace=False)
        return np.sort(picked.astype(np.int64))

    def sample_subgraph(
        self,
        graph: CsrGraph,
        budget: int,
        seed: Union[int, np.random.SeedSequence],
    ) -> Tuple[CsrGraph, NodeIdMap]:
        return graph_service.induced_subgraph(graph, self.sample_nodes(graph, budget, seed))

    # -------------------- SHARED NEIGHBORS --------------------

    def shared_neighbors(self, subgraph: CsrGraph, cap: Optional[int] = None) -> SharedNeighborMatrix:
        """
        Dense pairwise shared-neighbor counts

        Raises:
            ResourceLimitError: when the subgraph exceeds the node cap
        """
        cap = settings.SHARED_NEIGHBOR_CAP if cap is None else cap
        if subgraph.num_nodes > cap:
            raise ResourceLimitError(
                f"Subgraph has {subgraph.num_nodes} nodes, above the dense-matrix cap of {cap}",
                details="Raise --cap (or SHARED_NEIGHBOR_CAP) or sample a smaller budget",
            )
        adjacency = subgraph.to_scipy()
        counts = np.asarray((adjacency @ adjacency).toarray(), dtype=np.int64)
        np.fill_diagonal(counts, 0)
        return SharedNeighborMatrix(counts=counts)

    def region_density(
        self,
        matrix: SharedNeighborMatrix,
        window: int = 3,
        top_k: Optional[int] = None,
        stride: int = 1,
    ) -> List[DensityRegion]:
        """
        Window sums over the matrix in node-index order, largest first

        Ties are ordered by (row, col). `top_k` limits the result; 0 keeps
        every window.
        """
        if window < 1 or window > matrix.size:
            raise GraphInputError(f"Window {window} outside [1, {matrix.size}]")
        top_k = settings.DENSITY_TOP_K if top_k is None else top_k

        sums = np.lib.stride_tricks.sliding_window_view(matrix.counts, (window, window))
        sums = sums[::stride, ::stride].sum(axis=(2, 3))
        rows, cols = np.indices(sums.shape)
        flat = sums.ravel()
        order = np.lexsort((cols.ravel(), rows.ravel(), -flat))
        if top_k:
            order = order[:top_k]
        return [
            DensityRegion(row=int(rows.ravel()[i]) * stride, col=int(cols.ravel()[i]) * stride, total=int(flat[i]))
            for i in order
        ]

    def write_shared_neighbors(self, matrix: SharedNeighborMatrix, dense_path=None, sparse_path=None) -> None:
        """Dense TSV and/or (row, col, count) triples of the upper triangle"""
        if dense_path is not None:
            with atomic_writer(dense_path) as handle:
                for row in matrix.counts.tolist():
                    handle.write("\t".join(str(x) for x in row) + "\n")
        if sparse_path is not None:
            rows, cols = np.nonzero(np.triu(matrix.counts, k=1))
            with atomic_writer(sparse_path) as handle:
                handle.write("row\tcol\tcount\n")
                for r, c in zip(rows.tolist(), cols.tolist()):
                    handle.write(f"{r}\t{c}\t{int(matrix.counts[r, c])}\n")

    # -------------------- TRIANGLES --------------------

    def _node_triangles(self, graph: CsrGraph) -> np.ndarray:
        """Triangles through each node"""
        common = graph_service.common_neighbor_counts(graph)
        per_node = np.zeros(graph.num_nodes, dtype=np.int64)
        np.add.at(per_node, graph.sources(), common)
        return per_node // 2

    def closed_triads(self, graph: CsrGraph) -> int:
        """Triangles, each counted once"""
        return int(self._node_triangles(graph).sum() // 3)

    def clustering_coefficient(self, graph: CsrGraph) -> float:
        """Average local clustering; nodes of degree < 2 contribute 0"""
        if graph.num_nodes == 0:
            return 0.0
        triangles = self._node_triangles(graph).astype(np.float64)
        degrees = graph.degrees.astype(np.float64)
        local = np.zeros(graph.num_nodes, dtype=np.float64)
        eligible = degrees >= 2
        local[eligible] = 2.0 * triangles[eligible] / (degrees[eligible] * (degrees[eligible] - 1))
        return float(local.sum() / graph.num_nodes)

    # -------------------- BATCHES --------------------

    def _sample_stats(self, graph: CsrGraph, budget: int, seeds: List[np.random.SeedSequence], threads: int) -> Tuple[np.ndarray, np.ndarray]:
        def one_sample(index: int, _stop: int) -> Tuple[float, int]:
            subgraph, _ = self.sample_subgraph(graph, budget, seeds[index])
            return self.clustering_coefficient(subgraph), self.closed_triads(subgraph)

        pairs = map_chunks(one_sample, [(i, i + 1) for i in range(len(seeds))], threads)
        cc = np.array([p[0] for p in pairs], dtype=np.float64)
        triads = np.array([p[1] for p in pairs], dtype=np.float64)
        return cc, triads

    def batch_stats(
        self,
        graph: CsrGraph,
        budget: int,
        num_samples: int,
        seed: Optional[int] = None,
        threads: int = 0,
    ) -> SubgraphStats:
        """Mean CC and closed-triad count over independent node samples"""
        seed = settings.DEFAULT_SEED if seed is None else seed
        if num_samples < 1:
            raise GraphInputError(f"num_samples must be at least 1, got {num_samples}")
        if budget < 0 or budget > graph.num_nodes:
            raise GraphInputError(f"Budget {budget} outside [0, {graph.num_nodes}]")
        log_service_call("SamplingService", "batch_stats", f"{num_samples} samples x {budget} nodes")

        seeds = np.random.SeedSequence(seed).spawn(num_samples)
        cc, triads = self._sample_stats(graph, budget, seeds, threads)
        stats = SubgraphStats(
            num_samples=num_samples,
            budget=budget,
            seed=seed,
            # summed in sample-index order
            clustering_coefficient=float(np.cumsum(cc)[-1] / num_samples),
            closed_triads=float(np.cumsum(triads)[-1] / num_samples),
        )
        logger.info(f"Mean CC {stats.clustering_coefficient:.6f}, mean closed triads {stats.closed_triads:.3f}")
        return stats

    def compare_stats(
        self,
        vanilla: CsrGraph,
        dropped: CsrGraph,
        budget: int,
        num_samples: int,
        seed: Optional[int] = None,
        threads: int = 0,
    ) -> StatsComparison:
        """batch_stats on both graphs with the same master seed"""
        before = self.batch_stats(vanilla, budget, num_samples, seed, threads)
        after = self.batch_stats(dropped, budget, num_samples, seed, threads)
        return StatsComparison(
            vanilla=before,
            dropped=after,
            clustering_coefficient_delta=after.clustering_coefficient - before.clustering_coefficient,
            closed_triads_delta=after.closed_triads - before.closed_triads,
        )


# Global instance
sampling_service = SamplingService()

sample_nodes = sampling_service.sample_nodes
sample_subgraph = sampling_service.sample_subgraph
shared_neighbors = sampling_service.shared_neighbors
region_density = sampling_service.region_density
clustering_coefficient = sampling_service.clustering_coefficient
closed_triads = sampling_service.closed_triads
batch_stats = sampling_service.batch_stats
