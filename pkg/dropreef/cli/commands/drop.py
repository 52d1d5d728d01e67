"""
drop: run DropReef and write the low-redundancy bundle
"""
import argparse
from pathlib import Path

from pydantic import ValidationError

from dropreef.cli.common import RunRecorder, add_common_flags, add_probs_flags, resolve_probs
from dropreef.core.logging import logger
from dropreef.exceptions import UsageError
from dropreef.schemas.drop import ThresholdRequest
from dropreef.services.bundle_service import (
    GRAPH_FILE,
    ID_MAP_FILE,
    LABEL_INFO_FILE,
    LABELS_FILE,
    PROBS_FILE,
    SPLIT_FILE,
    bundle_service,
)
from dropreef.services.dropreef_service import dropreef_service
from dropreef.services.link_prob_service import link_prob_service
from dropreef.services.metrics_service import metrics_service
from dropreef.services.report_service import report_service
from dropreef.utils.tables import model_to_json
from dropreef.utils.helpers import write_text_atomic
from dropreef.utils.validators import validate_fraction

SNAPSHOT_FILE = "wnh_snapshot.tsv"
DROPPED_FILE = "dropped_ids.txt"
REPORT_FILE = "drop_report.json"
PDF_FILE = "drop_report.pdf"


def register(subparsers) -> None:
    parser = subparsers.add_parser("drop", help="Detect and drop redundant training nodes")
    parser.add_argument("bundle", type=Path)
    parser.add_argument("--out", type=Path, required=True, help="Output bundle directory")
    parser.add_argument("--th-wnh", type=float, default=None)
    parser.add_argument("--th-deg", type=int, default=None)
    parser.add_argument("--wnh-quantile", type=float, default=None,
                        help="TH_WNH as a nearest-rank quantile of training WNH")
    parser.add_argument("--deg-quantile", type=float, default=None,
                        help="TH_DEG as a nearest-rank quantile of training degrees")
    parser.add_argument("--naive-top-degree", type=float, default=None,
                        help="Drop this fraction of highest-degree training nodes instead")
    parser.add_argument("--retain-inference-edges", action="store_true")
    parser.add_argument("--emit-edge-list", action="store_true")
    parser.add_argument("--pdf", action="store_true", help=f"Also render {PDF_FILE}")
    add_probs_flags(parser)
    add_common_flags(parser)
    parser.set_defaults(func=run)


def _check_threshold_flags(args: argparse.Namespace) -> None:
    if args.naive_top_degree is not None:
        if any(v is not None for v in (args.th_wnh, args.th_deg, args.wnh_quantile, args.deg_quantile)):
            raise UsageError("--naive-top-degree cannot be combined with thresholds")
        validate_fraction(args.naive_top_degree, "--naive-top-degree", allow_zero=True)
        return
    if (args.th_wnh is None) == (args.wnh_quantile is None):
        raise UsageError("Give exactly one of --th-wnh or --wnh-quantile",
                         details="No default thresholds are shipped")
    if (args.th_deg is None) == (args.deg_quantile is None):
        raise UsageError("Give exactly one of --th-deg or --deg-quantile",
                         details="No default thresholds are shipped")
    for name in ("wnh_quantile", "deg_quantile"):
        if getattr(args, name) is not None:
            validate_fraction(getattr(args, name), f"--{name.replace('_', '-')}", allow_zero=True)


def run(args: argparse.Namespace) -> None:
    _check_threshold_flags(args)
    try:
        request = ThresholdRequest(
            th_wnh=args.th_wnh,
            th_deg=args.th_deg,
            wnh_quantile=args.wnh_quantile,
            deg_quantile=args.deg_quantile,
            naive_top_degree=args.naive_top_degree,
            retain_inference_edges=args.retain_inference_edges,
        )
    except ValidationError as e:
        raise UsageError("Invalid threshold flags", details=str(e))

    bundle = bundle_service.load_bundle(args.bundle)
    graph, labels, split = bundle.graph, bundle.labels, bundle.split
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    recorder = RunRecorder("drop", out, {"bundle": args.bundle, "probs_file": args.probs_file}, {})
    probs = resolve_probs(args, bundle)

    drop_run = dropreef_service.run_dropreef(
        graph, labels, probs, split, request, out / SNAPSHOT_FILE, args.threads
    )
    for name, seconds in drop_run.stage_seconds.items():
        recorder.manifest.stage_seconds[name] = round(seconds, 6)

    result = drop_run.result
    report = result.report
    report.wnh_snapshot = SNAPSHOT_FILE
    report.dropped_ids = DROPPED_FILE
    recorder.manifest.config = {
        "mode": report.mode,
        "th_wnh": report.th_wnh,
        "th_deg": report.th_deg,
        "wnh_quantile": args.wnh_quantile,
        "deg_quantile": args.deg_quantile,
        "retain_inference_edges": args.retain_inference_edges,
        "probs": args.probs,
    }

    with recorder.stage("write"):
        bundle_service.write_csr(out / GRAPH_FILE, result.graph)
        bundle_service.write_labels(out / LABELS_FILE, labels.remap(result.id_map))
        bundle_service.write_split(out / SPLIT_FILE, result.split)
        bundle_service.write_label_info(out, labels)
        bundle_service.write_id_map(out / ID_MAP_FILE, result.id_map)
        bundle_service.write_node_ids(out / DROPPED_FILE, drop_run.redundant)
        link_prob_service.write_probs(
            out / PROBS_FILE, result.graph, probs.remap(graph, result.graph, result.id_map)
        )
        write_text_atomic(out / REPORT_FILE, model_to_json(report))
        written = [out / name for name in (GRAPH_FILE, LABELS_FILE, SPLIT_FILE, LABEL_INFO_FILE, ID_MAP_FILE,
                                            DROPPED_FILE, PROBS_FILE, REPORT_FILE, SNAPSHOT_FILE)]
        if args.emit_edge_list:
            bundle_service.write_edge_list(out / "edges.txt", result.graph)
            written.append(out / "edges.txt")
        if args.pdf:
            hints = dropreef_service.threshold_hints(graph, labels, split, drop_run.metrics)
            quantiles = metrics_service.degree_quantiles(graph)
            report_service.render_pdf_report(report, hints, quantiles, out / PDF_FILE)
            written.append(out / PDF_FILE)
        recorder.add(written)

    recorder.finish()
    logger.info(
        f"Low-redundancy bundle written to {out}: dropped {report.dropped_count} nodes, "
        f"node ratio {report.drop_node_ratio:.4f}, edge ratio {report.drop_edge_ratio:.4f}"
    )
