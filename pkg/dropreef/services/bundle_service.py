"""
Node labels, split roles and the on-disk formats of a graph bundle

A bundle is a directory holding graph.csr, labels.txt, split.txt,
label_info.json and, optionally, probs.tsv and id_map.tsv.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from dropreef.core.config import settings
from dropreef.core.logging import logger, log_service_call
from dropreef.exceptions import ConsistencyError, GraphInputError
from dropreef.schemas.manifest import LabelInfo
from dropreef.services.graph_service import CsrGraph, NodeIdMap, graph_service
from dropreef.utils.helpers import atomic_writer, iter_records, write_bytes_atomic, write_text_atomic
from dropreef.utils.validators import validate_input_file

PathLike = Union[str, Path]

CSR_MAGIC = b"GRF1"
GRAPH_FILE = "graph.csr"
LABELS_FILE = "labels.txt"
LABEL_INFO_FILE = "label_info.json"
SPLIT_FILE = "split.txt"
PROBS_FILE = "probs.tsv"
ID_MAP_FILE = "id_map.tsv"
MANIFEST_FILE = "manifest.json"

TRAIN, VAL, TEST, UNLABELED = 0, 1, 2, 3
ROLE_TOKENS = ("train", "val", "test", "none")


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Binary class vectors c_v, one row per node"""
    rows: np.ndarray  # (num_nodes, num_classes) uint8
    multi_label: bool

    def __post_init__(self):
        _frozen(self.rows)

    @property
    def num_nodes(self) -> int:
        return int(self.rows.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.rows.shape[1])

    @classmethod
    def from_class_lists(
        cls,
        class_lists: Sequence[Sequence[int]],
        num_classes: Optional[int] = None,
        multi_label: Optional[bool] = None,
    ) -> "LabelMatrix":
        if num_classes is None:
            num_classes = 1 + max((max(c) for c in class_lists if len(c)), default=-1)
        if multi_label is None:
            multi_label = any(len(set(c)) != 1 for c in class_lists)
        rows = np.zeros((len(class_lists), num_classes), dtype=np.uint8)
        for v, classes in enumerate(class_lists):
            rows[v, list(classes)] = 1
        return cls(rows=rows, multi_label=multi_label).validate()

    @classmethod
    def one_hot(cls, class_ids: Sequence[int], num_classes: Optional[int] = None) -> "LabelMatrix":
        class_ids = np.asarray(class_ids, dtype=np.int64)
        if num_classes is None:
            num_classes = int(class_ids.max()) + 1 if class_ids.size else 0
        rows = np.zeros((class_ids.shape[0], num_classes), dtype=np.uint8)
        rows[np.arange(class_ids.shape[0]), class_ids] = 1
        return cls(rows=rows, multi_label=False).validate()

    def validate(self) -> "LabelMatrix":
        if self.rows.ndim != 2:
            raise ConsistencyError("Label matrix must be two-dimensional")
        if self.rows.size and self.rows.max() > 1:
            raise ConsistencyError("Label entries must be 0 or 1")
        if not self.multi_label:
            sums = self.rows.sum(axis=1)
            bad = np.flatnonzero(sums != 1)
            if bad.size:
                raise ConsistencyError(
                    f"Single-class label row {int(bad[0])} has {int(sums[bad[0]])} classes"
                )
        return self

    def class_lists(self) -> List[List[int]]:
        return [np.flatnonzero(row).tolist() for row in self.rows]

    def remap(self, id_map: NodeIdMap) -> "LabelMatrix":
        return LabelMatrix(rows=self.rows[id_map.inverse], multi_label=self.multi_label)


@dataclass(frozen=True, eq=False)
class SplitMask:
    """Exactly one role per node"""
    roles: np.ndarray  # int8 codes TRAIN/VAL/TEST/UNLABELED

    def __post_init__(self):
        _frozen(self.roles)

    @property
    def num_nodes(self) -> int:
        return int(self.roles.shape[0])

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "SplitMask":
        lookup = {token: code for code, token in enumerate(ROLE_TOKENS)}
        return cls(roles=np.array([lookup[t] for t in tokens], dtype=np.int8))

    @classmethod
    def all_train(cls, num_nodes: int) -> "SplitMask":
        return cls(roles=np.full(num_nodes, TRAIN, dtype=np.int8))

    def nodes_with(self, role: int) -> np.ndarray:
        return np.flatnonzero(self.roles == role)

    def train_nodes(self) -> np.ndarray:
        return self.nodes_with(TRAIN)

    def is_train(self) -> np.ndarray:
        return self.roles == TRAIN

    def tokens(self) -> List[str]:
        return [ROLE_TOKENS[code] for code in self.roles]

    def remap(self, id_map: NodeIdMap) -> "SplitMask":
        return SplitMask(roles=self.roles[id_map.inverse])

    def with_role(self, nodes: np.ndarray, role: int) -> "SplitMask":
        roles = self.roles.copy()
        roles[nodes] = role
        return SplitMask(roles=roles)


@dataclass(frozen=True, eq=False)
class Bundle:
    """Everything the pipeline needs about one graph"""
    graph: CsrGraph
    labels: LabelMatrix
    split: SplitMask
    path: Optional[Path] = None

    @property
    def probs_path(self) -> Optional[Path]:
        if self.path is None:
            return None
        candidate = self.path / PROBS_FILE
        return candidate if candidate.exists() else None


class BundleService:
    """Readers and writers for every graph-side file format"""

    # -------------------- EDGE LIST --------------------

    def read_edge_list(self, path: PathLike, num_nodes: Optional[int] = None) -> Tuple[np.ndarray, int]:
        """
        Parse `u v` lines; `#` lines and blank lines are skipped

        Returns:
            (pairs, num_nodes), num_nodes inferred as max id + 1 when not given

        Raises:
            GraphInputError: naming the file and line of the first bad record
        """
        path = validate_input_file(path)
        log_service_call("BundleService", "read_edge_list", str(path))

        pairs: List[Tuple[int, int]] = []
        for line_no, tokens in iter_records(path):
            if len(tokens) != 2:
                raise GraphInputError(
                    f"Expected 2 node ids, found {len(tokens)} tokens", path=path, line=line_no
                )
            try:
                u, v = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise GraphInputError("Node ids must be decimal integers", path=path, line=line_no)
            if u < 0 or v < 0 or (num_nodes is not None and (u >= num_nodes or v >= num_nodes)):
                bound = f"[0, {num_nodes})" if num_nodes is not None else "non-negative range"
                raise GraphInputError(
                    f"Edge ({u}, {v}) has a node id outside {bound}", path=path, line=line_no
                )
            pairs.append((u, v))

        array = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        if num_nodes is None:
            num_nodes = int(array.max()) + 1 if array.size else 0
        logger.info(f"Read {array.shape[0]} edge records from {path}")
        return array, num_nodes

    def write_edge_list(self, path: PathLike, graph: CsrGraph) -> None:
        pairs = graph_service.edge_list(graph)
        with atomic_writer(path) as handle:
            for u, v in pairs.tolist():
                handle.write(f"{u} {v}\n")

    # -------------------- BINARY CSR --------------------

    def write_csr(self, path: PathLike, graph: CsrGraph) -> None:
        """
        GRF1 layout: magic, <u8 num_nodes, <u8 targets length,
        offsets as <i8, targets as <u4 (or <u8 when NODE_ID_BITS=64)
        """
        header = np.array([graph.num_nodes, graph.num_slots], dtype="<u8").tobytes()
        id_dtype = settings.node_id_dtype.newbyteorder("<")
        payload = b"".join([
            CSR_MAGIC,
            header,
            graph.offsets.astype("<i8").tobytes(),
            graph.targets.astype(id_dtype).tobytes(),
        ])
        write_bytes_atomic(path, payload)

    def read_csr(self, path: PathLike) -> CsrGraph:
        path = validate_input_file(path, allow_empty=False)
        raw = path.read_bytes()
        if raw[:4] != CSR_MAGIC:
            raise GraphInputError("Bad magic bytes, expected GRF1", path=path)
        if len(raw) < 20:
            raise GraphInputError("Truncated header", path=path)

        num_nodes, num_slots = (int(x) for x in np.frombuffer(raw, dtype="<u8", count=2, offset=4))
        offsets_end = 20 + 8 * (num_nodes + 1)
        target_bytes = len(raw) - offsets_end
        if num_slots == 0 and target_bytes == 0:
            width = settings.node_id_dtype.itemsize
        elif num_slots and target_bytes in (4 * num_slots, 8 * num_slots):
            width = target_bytes // num_slots
        else:
            raise GraphInputError(
                "Payload size does not match header counts",
                path=path,
                details=f"num_nodes={num_nodes}, targets={num_slots}, bytes={len(raw)}",
            )

        offsets = np.frombuffer(raw, dtype="<i8", count=num_nodes + 1, offset=20).astype(np.int64)
        targets = np.frombuffer(raw, dtype=f"<u{width}", count=num_slots, offset=offsets_end)
        graph = CsrGraph(
            num_nodes=num_nodes,
            offsets=offsets,
            targets=targets.astype(np.uint32 if width == 4 else np.uint64),
        )
        try:
            return graph.validate()
        except ConsistencyError as e:
            raise GraphInputError(f"Corrupt CSR: {e.message}", path=path)

    # -------------------- LABELS / SPLIT --------------------

    def _read_lines(self, path: Path) -> List[str]:
        with open(path, "r", encoding="utf-8") as handle:
            return [line.rstrip("\r\n") for line in handle]

    def read_labels(
        self,
        path: PathLike,
        num_classes: Optional[int] = None,
        multi_label: Optional[bool] = None,
    ) -> LabelMatrix:
        """One line per node listing its class indices; blank line = zero row"""
        path = validate_input_file(path)
        class_lists: List[List[int]] = []
        for line_no, line in enumerate(self._read_lines(path), start=1):
            try:
                classes = sorted({int(t) for t in line.split()})
            except ValueError:
                raise GraphInputError("Class indices must be integers", path=path, line=line_no)
            if classes and (classes[0] < 0 or (num_classes is not None and classes[-1] >= num_classes)):
                raise GraphInputError(
                    f"Class index outside [0, {num_classes})", path=path, line=line_no
                )
            if multi_label is False and len(classes) != 1:
                raise GraphInputError(
                    f"Single-class labels need exactly one class, found {len(classes)}",
                    path=path, line=line_no,
                )
            class_lists.append(classes)

        labels = LabelMatrix.from_class_lists(class_lists, num_classes, multi_label)
        logger.info(
            f"Read labels for {labels.num_nodes} nodes, {labels.num_classes} classes "
            f"({'multi' if labels.multi_label else 'single'}-class)"
        )
        return labels

    def write_labels(self, path: PathLike, labels: LabelMatrix) -> None:
        with atomic_writer(path) as handle:
            for classes in labels.class_lists():
                handle.write(" ".join(str(c) for c in classes) + "\n")

    def read_split(self, path: PathLike) -> SplitMask:
        path = validate_input_file(path)
        tokens = []
        for line_no, line in enumerate(self._read_lines(path), start=1):
            token = line.strip()
            if token not in ROLE_TOKENS[:3]:
                raise GraphInputError(
                    f"Unknown split role '{token}', expected train, val or test",
                    path=path, line=line_no,
                )
            tokens.append(token)
        return SplitMask.from_tokens(tokens)

    def write_split(self, path: PathLike, split: SplitMask) -> None:
        with atomic_writer(path) as handle:
            for token in split.tokens():
                handle.write(token + "\n")

    def write_id_map(self, path: PathLike, id_map: NodeIdMap) -> None:
        with atomic_writer(path) as handle:
            for new_id, old_id in enumerate(id_map.inverse.tolist()):
                handle.write(f"{old_id}\t{new_id}\n")

    def write_node_ids(self, path: PathLike, nodes: np.ndarray) -> None:
        with atomic_writer(path) as handle:
            for v in np.sort(nodes).tolist():
                handle.write(f"{v}\n")

    # -------------------- BUNDLES --------------------

    def check_counts(self, graph: CsrGraph, labels: LabelMatrix, split: SplitMask) -> None:
        if labels.num_nodes != graph.num_nodes:
            raise GraphInputError(
                "Label count does not match node count",
                details=f"expected {graph.num_nodes} label lines, got {labels.num_nodes}",
            )
        if split.num_nodes != graph.num_nodes:
            raise GraphInputError(
                "Split count does not match node count",
                details=f"expected {graph.num_nodes} split lines, got {split.num_nodes}",
            )

    def write_label_info(self, directory: PathLike, labels: LabelMatrix) -> Path:
        target = Path(directory) / LABEL_INFO_FILE
        info = LabelInfo(num_classes=labels.num_classes, multi_label=labels.multi_label)
        write_text_atomic(target, info.model_dump_json(indent=2) + "\n")
        return target

    def read_label_info(self, directory: PathLike) -> Optional[LabelInfo]:
        """None for bundles assembled by hand without label_info.json"""
        path = Path(directory) / LABEL_INFO_FILE
        if not path.exists():
            return None
        try:
            return LabelInfo.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise GraphInputError("Invalid label info", path=path, details=str(e))

    def save_bundle(self, directory: PathLike, graph: CsrGraph, labels: LabelMatrix, split: SplitMask) -> List[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.check_counts(graph, labels, split)
        self.write_csr(directory / GRAPH_FILE, graph)
        self.write_labels(directory / LABELS_FILE, labels)
        self.write_split(directory / SPLIT_FILE, split)
        info = self.write_label_info(directory, labels)
        return [directory / GRAPH_FILE, directory / LABELS_FILE, directory / SPLIT_FILE, info]

    def load_bundle(self, directory: PathLike) -> Bundle:
        directory = Path(directory)
        if not directory.is_dir():
            raise GraphInputError("Bundle directory not found", path=directory)
        log_service_call("BundleService", "load_bundle", str(directory))

        graph = self.read_csr(directory / GRAPH_FILE)
        info = self.read_label_info(directory)
        if info is None:
            labels = self.read_labels(directory / LABELS_FILE)
        else:
            labels = self.read_labels(directory / LABELS_FILE, info.num_classes, info.multi_label)
        split = self._read_split_any(directory / SPLIT_FILE)
        self.check_counts(graph, labels, split)
        return Bundle(graph=graph, labels=labels, split=split, path=directory)

    def _read_split_any(self, path: Path) -> SplitMask:
        # bundles written in retain mode carry the `none` role
        path = validate_input_file(path)
        tokens = [line.strip() for line in self._read_lines(path)]
        for line_no, token in enumerate(tokens, start=1):
            if token not in ROLE_TOKENS:
                raise GraphInputError(f"Unknown split role '{token}'", path=path, line=line_no)
        return SplitMask.from_tokens(tokens)


# Global instance
bundle_service = BundleService()
