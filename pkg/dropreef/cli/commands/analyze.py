"""
analyze: distribution and sampling diagnostics written as TSV or JSON
"""
import argparse
from pathlib import Path

from dropreef.cli.common import RunRecorder, add_common_flags, add_probs_flags, resolve_probs
from dropreef.core.config import settings
from dropreef.core.logging import logger
from dropreef.exceptions import UsageError
from dropreef.services.bundle_service import bundle_service
from dropreef.services.dropreef_service import dropreef_service
from dropreef.services.metrics_service import metrics_service
from dropreef.services.sampling_service import sampling_service
from dropreef.utils.tables import write_model, write_rows

ANALYSES = ("quantiles", "overlap", "subgraph-stats", "shared-neighbors", "hints", "compare")


def register(subparsers) -> None:
    parser = subparsers.add_parser("analyze", help="Degree, overlap and sampling diagnostics")
    parser.add_argument("bundle", type=Path)
    parser.add_argument("which", choices=ANALYSES)
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument("--top-fraction", type=float, default=settings.TOP_FRACTION)
    parser.add_argument("--buckets", type=int, default=settings.QUANTILE_BUCKETS)
    parser.add_argument("--wnh-top-fraction", type=float, default=settings.WNH_TOP_FRACTION)
    parser.add_argument("--all-nodes", action="store_true",
                        help="overlap/hints: rank every node instead of the training set")
    parser.add_argument("--budget", type=int, default=None, help="Nodes per sample")
    parser.add_argument("--num-samples", type=int, default=1)
    parser.add_argument("--cap", type=int, default=settings.SHARED_NEIGHBOR_CAP,
                        help="Largest subgraph for the dense shared-neighbor matrix")
    parser.add_argument("--window", type=int, default=3)
    parser.add_argument("--stride", type=int, default=1)
    parser.add_argument("--top-k", type=int, default=settings.DENSITY_TOP_K,
                        help="Densest windows to report; 0 reports all")
    parser.add_argument("--against", type=Path, default=None,
                        help="compare: low-redundancy bundle to compare with")
    add_probs_flags(parser)
    add_common_flags(parser)
    parser.set_defaults(func=run)


def _require_budget(args: argparse.Namespace) -> int:
    if args.budget is None:
        raise UsageError(f"analyze {args.which} needs --budget")
    return args.budget


def run(args: argparse.Namespace) -> None:
    bundle = bundle_service.load_bundle(args.bundle)
    graph = bundle.graph
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    name = args.which.replace("-", "_")
    config = {key: value for key, value in vars(args).items()
              if key not in ("func", "bundle", "out", "against", "probs_file", "log_level", "threads")}
    recorder = RunRecorder("analyze", out,
                           {"bundle": args.bundle, "against": args.against, "probs_file": args.probs_file},
                           config)

    with recorder.stage(name):
        if args.which == "quantiles":
            report = metrics_service.degree_quantiles(graph, args.top_fraction, args.buckets)
            written = write_model(out / name, report, args.format, "buckets")

        elif args.which in ("overlap", "hints"):
            probs = resolve_probs(args, bundle)
            subset = None if args.all_nodes else bundle.split.train_nodes()
            metrics = metrics_service.wnh_all(graph, bundle.labels, probs, subset, args.threads)
            if args.which == "overlap":
                report = metrics_service.overlap_report(
                    metrics, graph, args.wnh_top_fraction, args.top_fraction, args.buckets
                )
                written = write_model(out / name, report, args.format, "buckets")
            else:
                report = dropreef_service.threshold_hints(graph, bundle.labels, bundle.split, metrics)
                written = write_model(out / name, report, "json")

        elif args.which == "subgraph-stats":
            report = sampling_service.batch_stats(
                graph, _require_budget(args), args.num_samples, args.seed, args.threads
            )
            written = write_model(out / name, report, args.format)

        elif args.which == "shared-neighbors":
            subgraph, id_map = sampling_service.sample_subgraph(graph, _require_budget(args), args.seed)
            matrix = sampling_service.shared_neighbors(subgraph, args.cap)
            regions = sampling_service.region_density(matrix, args.window, args.top_k, args.stride)
            dense, sparse = out / "shared_neighbors_dense.tsv", out / "shared_neighbors_sparse.tsv"
            sampling_service.write_shared_neighbors(matrix, dense, sparse)
            bundle_service.write_node_ids(out / "sampled_nodes.txt", id_map.inverse)
            written = [write_rows(out / "density_regions", regions, args.format),
                       dense, sparse, out / "sampled_nodes.txt"]

        else:
            if args.against is None:
                raise UsageError("analyze compare needs --against BUNDLE")
            dropped = bundle_service.load_bundle(args.against)
            report = sampling_service.compare_stats(
                graph, dropped.graph, _require_budget(args), args.num_samples, args.seed, args.threads
            )
            written = write_model(out / name, report, "json")

    recorder.add(written)
    recorder.finish()
    logger.info(f"Analysis '{args.which}' written to {out}")
