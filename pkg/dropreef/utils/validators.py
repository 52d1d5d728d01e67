"""
Input validation utilities
"""
import math
from pathlib import Path
from typing import Union

from dropreef.core.logging import logger
from dropreef.exceptions import GraphInputError, UsageError
from dropreef.utils.helpers import format_file_size


def validate_input_file(path: Union[str, Path], allow_empty: bool = True) -> Path:
    """
    Validate that an input file exists and is readable

    Raises:
        GraphInputError: If the file is missing, a directory, or empty when
            emptiness is not allowed
    """
    path = Path(path)
    if not path.exists():
        raise GraphInputError("File not found", path=path)
    if not path.is_file():
        raise GraphInputError("Not a regular file", path=path)

    size = path.stat().st_size
    if size == 0 and not allow_empty:
        raise GraphInputError("File is empty", path=path)

    logger.debug(f"Input file ok: {path} ({format_file_size(size)})")
    return path


def validate_fraction(value: float, name: str, allow_zero: bool = False) -> float:
    """Check a fraction lies in (0, 1] (or [0, 1] when allow_zero)"""
    if not math.isfinite(value):
        raise UsageError(f"{name} must be finite", details=f"Received: {value}")
    low_ok = value >= 0 if allow_zero else value > 0
    if not low_ok or value > 1:
        bounds = "[0, 1]" if allow_zero else "(0, 1]"
        raise UsageError(f"{name} must lie in {bounds}", details=f"Received: {value}")
    return value


def validate_positive(value: int, name: str, allow_zero: bool = False) -> int:
    if value < 0 or (value == 0 and not allow_zero):
        raise UsageError(f"{name} must be {'non-negative' if allow_zero else 'positive'}",
                         details=f"Received: {value}")
    return value


def parse_node_id(token: str, num_nodes: int, path, line: int) -> int:
    """Parse one decimal node id and range-check it"""
    try:
        value = int(token)
    except ValueError:
        raise GraphInputError(f"Invalid node id '{token}'", path=path, line=line)
    if not 0 <= value < num_nodes:
        raise GraphInputError(
            f"Node id {value} outside [0, {num_nodes})", path=path, line=line
        )
    return value
