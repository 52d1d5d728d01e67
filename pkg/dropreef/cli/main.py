"""
CLI initialization and dispatch
"""
import argparse
import json
import sys
from typing import List, Optional

from dropreef.core.config import settings
from dropreef.core.logging import log_error, logger, set_level
from dropreef.exceptions import DropReefError
from dropreef.cli.commands import analyze, drop, ingest, probs, report, sample, wnh


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Detect and drop redundant nodes of large graphs, offline",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include commands
    for command in (ingest, probs, wnh, drop, sample, analyze, report):
        command.register(subparsers)
    return parser


def _emit_error(record: dict) -> None:
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "log_level", None):
        set_level(args.log_level)

    logger.info(f"Starting {settings.APP_NAME} v{settings.APP_VERSION}: {args.command}")
    try:
        args.func(args)
        return 0

    except DropReefError as e:
        log_error(e, args.command)
        _emit_error(e.to_record())
        return e.exit_code

    except Exception as e:
        log_error(e, f"{args.command} (uncaught)")
        _emit_error({"error": "InternalError", "message": str(e), "details": type(e).__name__})
        return 1
