"""
report: render the PDF summary of an earlier drop run
"""
import argparse
import json
from pathlib import Path

from pydantic import ValidationError

from dropreef.cli.common import add_common_flags
from dropreef.exceptions import GraphInputError
from dropreef.schemas.drop import DropReport, ThresholdHints
from dropreef.schemas.report import QuantileReport
from dropreef.services.report_service import report_service
from dropreef.utils.validators import validate_input_file


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="Render a drop report as PDF")
    parser.add_argument("drop_report", type=Path, help="drop_report.json of a drop run")
    parser.add_argument("--hints", type=Path, default=None, help="hints.json from analyze hints")
    parser.add_argument("--quantiles", type=Path, default=None,
                        help="quantiles.json from analyze quantiles --format json")
    parser.add_argument("--out", type=Path, required=True, help="PDF path")
    add_common_flags(parser)
    parser.set_defaults(func=run)


def _load(model, path: Path):
    path = validate_input_file(path, allow_empty=False)
    try:
        return model.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise GraphInputError(f"Not a valid {model.__name__} file", details=str(e), path=path)


def run(args: argparse.Namespace) -> None:
    report = _load(DropReport, args.drop_report)
    hints = _load(ThresholdHints, args.hints) if args.hints else None
    quantiles = _load(QuantileReport, args.quantiles) if args.quantiles else None
    report_service.render_pdf_report(report, hints, quantiles, args.out)
