"""
wnh: WNH snapshot of the training nodes (or all nodes)
"""
import argparse
from pathlib import Path

from dropreef.cli.common import add_common_flags, add_probs_flags, resolve_probs
from dropreef.services.bundle_service import bundle_service
from dropreef.services.metrics_service import metrics_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("wnh", help="Compute weighted neighbor heterophily")
    parser.add_argument("bundle", type=Path)
    parser.add_argument("--out", type=Path, required=True, help="Snapshot TSV path")
    parser.add_argument("--all-nodes", action="store_true",
                        help="Cover every node instead of the training set")
    add_probs_flags(parser)
    add_common_flags(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    bundle = bundle_service.load_bundle(args.bundle)
    probs = resolve_probs(args, bundle)
    subset = None if args.all_nodes else bundle.split.train_nodes()
    metrics = metrics_service.wnh_all(bundle.graph, bundle.labels, probs, subset, args.threads)
    metrics_service.write_snapshot(args.out, metrics)
