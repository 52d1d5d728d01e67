"""
Custom exception classes for the toolkit
"""
from pathlib import Path
from typing import Optional, Union


class DropReefError(Exception):
    """Base exception for all toolkit errors"""
    exit_code = 1

    def __init__(self, message: str, details: Optional[str] = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def to_record(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class GraphInputError(DropReefError):
    """
    Raised when an input file, record or argument is invalid

    Examples:
        - Node id out of range on an edge-list line
        - Label file with the wrong number of lines
        - Probability outside [0, 1]
    """
    exit_code = 3

    def __init__(
        self,
        message: str,
        details: Optional[str] = None,
        path: Optional[Union[str, Path]] = None,
        line: Optional[int] = None,
    ):
        self.path = str(path) if path is not None else None
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message, details)

    def to_record(self) -> dict:
        record = super().to_record()
        record.update({"path": self.path, "line": self.line})
        return record


class ConsistencyError(DropReefError):
    """
    Raised when an internal invariant does not hold

    Examples:
        - Metrics missing for a training node
        - Probabilities not aligned with the graph
    """
    exit_code = 5


class ResourceLimitError(DropReefError):
    """
    Raised when a request exceeds a configured resource cap

    Examples:
        - Shared-neighbor matrix above SHARED_NEIGHBOR_CAP nodes
    """
    exit_code = 4


class UsageError(DropReefError):
    """
    Raised when command-line arguments are missing or contradictory

    Examples:
        - drop without thresholds
        - --th-wnh together with --wnh-quantile
    """
    exit_code = 2


class ConfigurationError(DropReefError):
    """
    Raised when toolkit configuration is invalid

    Examples:
        - Non-positive thread count
    """
    exit_code = 2
