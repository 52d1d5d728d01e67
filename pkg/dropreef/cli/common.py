"""
Shared command plumbing: common flags, probability sources, run manifests
"""
import argparse
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterable, Optional

from dropreef.core.config import settings
from dropreef.core.logging import log_stage
from dropreef.exceptions import UsageError
from dropreef.schemas.manifest import RunManifest
from dropreef.services.bundle_service import MANIFEST_FILE, Bundle
from dropreef.services.link_prob_service import HEURISTIC_METHODS, EdgeProbabilities, link_prob_service
from dropreef.utils.helpers import file_digest, write_text_atomic

PROB_SOURCES = ("uniform", "bundle", "file") + HEURISTIC_METHODS
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=settings.DEFAULT_THREADS,
                        help="Worker threads; results are identical for any value")
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED,
                        help=f"Master seed (default {settings.DEFAULT_SEED})")
    parser.add_argument("--format", choices=("tsv", "json"), default="tsv",
                        help="Report format")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None,
                        help="Override LOG_LEVEL")


def add_probs_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--probs", choices=PROB_SOURCES, default="uniform",
                        help="Linking probability provider (bundle = <bundle>/probs.tsv)")
    parser.add_argument("--probs-file", type=Path, default=None,
                        help="Probability file, required with --probs file")


def resolve_probs(args: argparse.Namespace, bundle: Bundle) -> EdgeProbabilities:
    """Build EdgeProbabilities from the --probs/--probs-file flags"""
    source = args.probs
    if source == "uniform":
        return link_prob_service.uniform_probs(bundle.graph)
    if source == "file":
        if args.probs_file is None:
            raise UsageError("--probs file needs --probs-file PATH")
        return link_prob_service.load_probs(args.probs_file, bundle.graph)
    if source == "bundle":
        if bundle.probs_path is None:
            raise UsageError("Bundle has no probs.tsv", details="Run `dropreef probs` first")
        return link_prob_service.load_probs(bundle.probs_path, bundle.graph)
    return link_prob_service.heuristic_probs(bundle.graph, source, args.threads)


class RunRecorder:
    """Collects stage timings and outputs, then writes manifest.json"""

    def __init__(self, command: str, output_dir: Path, inputs: Dict[str, Path], config: Dict):
        self.manifest = RunManifest(
            command=command,
            tool_version=settings.APP_VERSION,
            inputs={name: str(path) for name, path in inputs.items() if path is not None},
            output_dir=str(output_dir),
            config=config,
        )
        self.output_dir = Path(output_dir)
        self.outputs = []

    @contextmanager
    def stage(self, name: str):
        started = time.perf_counter()
        yield
        seconds = time.perf_counter() - started
        self.manifest.stage_seconds[name] = round(seconds, 6)
        log_stage(name, seconds)

    def add(self, paths: Iterable[Optional[Path]]) -> None:
        self.outputs.extend(Path(p) for p in paths if p is not None)

    def finish(self) -> Path:
        for path in sorted(set(self.outputs)):
            try:
                name = str(path.relative_to(self.output_dir))
            except ValueError:
                name = str(path)
            self.manifest.outputs[name] = file_digest(path)
        target = self.output_dir / MANIFEST_FILE
        write_text_atomic(target, self.manifest.model_dump_json(indent=2) + "\n")
        return target
