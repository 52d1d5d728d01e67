"""
sample: draw one uniform node sample and write its induced subgraph
"""
import argparse
from pathlib import Path

from dropreef.cli.common import RunRecorder, add_common_flags
from dropreef.core.logging import logger
from dropreef.services.bundle_service import ID_MAP_FILE, bundle_service
from dropreef.services.sampling_service import sampling_service
from dropreef.utils.validators import validate_positive


def register(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="Sample nodes and extract the induced subgraph")
    parser.add_argument("bundle", type=Path)
    parser.add_argument("--budget", type=int, required=True, help="Number of nodes to sample")
    parser.add_argument("--out", type=Path, required=True, help="Output bundle directory")
    add_common_flags(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    validate_positive(args.budget, "--budget", allow_zero=True)
    bundle = bundle_service.load_bundle(args.bundle)
    out: Path = args.out
    recorder = RunRecorder("sample", out, {"bundle": args.bundle},
                           {"budget": args.budget, "seed": args.seed})

    with recorder.stage("sample"):
        subgraph, id_map = sampling_service.sample_subgraph(bundle.graph, args.budget, args.seed)

    with recorder.stage("write"):
        written = bundle_service.save_bundle(
            out, subgraph, bundle.labels.remap(id_map), bundle.split.remap(id_map)
        )
        bundle_service.write_id_map(out / ID_MAP_FILE, id_map)
        recorder.add(written + [out / ID_MAP_FILE])

    recorder.finish()
    logger.info(f"Sampled {subgraph.num_nodes} nodes, {subgraph.num_undirected_edges} edges into {out}")
