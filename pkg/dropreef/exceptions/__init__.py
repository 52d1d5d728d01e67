"""
Custom exception classes
"""
from dropreef.exceptions.custom_exceptions import (
    DropReefError,
    GraphInputError,
    ConsistencyError,
    ResourceLimitError,
    UsageError,
    ConfigurationError,
)

__all__ = [
    "DropReefError",
    "GraphInputError",
    "ConsistencyError",
    "ResourceLimitError",
    "UsageError",
    "ConfigurationError",
]
