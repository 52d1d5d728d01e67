"""
ingest: edge list + labels + split -> validated binary bundle
"""
import argparse
from pathlib import Path

from dropreef.cli.common import RunRecorder, add_common_flags
from dropreef.core.logging import logger
from dropreef.exceptions import GraphInputError
from dropreef.services.bundle_service import bundle_service
from dropreef.services.graph_service import graph_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("ingest", help="Validate text inputs into a binary bundle")
    parser.add_argument("edge_list", type=Path)
    parser.add_argument("--labels", type=Path, required=True)
    parser.add_argument("--split", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True, help="Bundle directory")
    parser.add_argument("--num-classes", type=int, default=None)
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--multi-label", dest="multi_label", action="store_const", const=True, default=None)
    mode.add_argument("--single-label", dest="multi_label", action="store_const", const=False)
    parser.add_argument("--emit-edge-list", action="store_true",
                        help="Also write the canonical edges.txt")
    add_common_flags(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    recorder = RunRecorder(
        "ingest", args.out,
        inputs={"edge_list": args.edge_list, "labels": args.labels, "split": args.split},
        config={"num_classes": args.num_classes, "multi_label": args.multi_label},
    )

    with recorder.stage("parse"):
        labels = bundle_service.read_labels(args.labels, args.num_classes, args.multi_label)
        split = bundle_service.read_split(args.split)
        if split.num_nodes != labels.num_nodes:
            raise GraphInputError(
                "Split count does not match label count",
                path=args.split,
                details=f"expected {labels.num_nodes} lines, got {split.num_nodes}",
            )
        pairs, num_nodes = bundle_service.read_edge_list(args.edge_list, labels.num_nodes)

    with recorder.stage("build"):
        graph = graph_service.build_csr(pairs, num_nodes).validate()

    with recorder.stage("write"):
        recorder.add(bundle_service.save_bundle(args.out, graph, labels, split))
        if args.emit_edge_list:
            bundle_service.write_edge_list(args.out / "edges.txt", graph)
            recorder.add([args.out / "edges.txt"])

    recorder.finish()
    logger.info(
        f"Bundle written to {args.out}: {graph.num_nodes} nodes, "
        f"{graph.num_undirected_edges} edges"
    )
