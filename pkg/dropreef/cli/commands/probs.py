"""
probs: write heuristic linking probabilities into a bundle
"""
import argparse
from pathlib import Path

from dropreef.cli.common import RunRecorder, add_common_flags
from dropreef.services.bundle_service import PROBS_FILE, bundle_service
from dropreef.services.link_prob_service import HEURISTIC_METHODS, link_prob_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("probs", help="Compute linking probabilities for every edge")
    parser.add_argument("bundle", type=Path)
    parser.add_argument("--method", choices=("uniform",) + HEURISTIC_METHODS, required=True)
    parser.add_argument("--out", type=Path, default=None,
                        help=f"Probability file (default <bundle>/{PROBS_FILE})")
    add_common_flags(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    bundle = bundle_service.load_bundle(args.bundle)
    out = args.out or args.bundle / PROBS_FILE
    recorder = RunRecorder("probs", out.parent, {"bundle": args.bundle}, {"method": args.method})

    with recorder.stage("probs"):
        if args.method == "uniform":
            probs = link_prob_service.uniform_probs(bundle.graph)
        else:
            probs = link_prob_service.heuristic_probs(bundle.graph, args.method, args.threads)
        probs.validate(bundle.graph)

    with recorder.stage("write"):
        link_prob_service.write_probs(out, bundle.graph, probs)
        recorder.add([out])
    # writing into the bundle keeps its ingest manifest
    if out.parent.resolve() != args.bundle.resolve():
        recorder.finish()
