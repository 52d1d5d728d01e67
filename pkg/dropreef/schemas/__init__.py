"""
Pydantic schemas for configurations and reports
"""
from dropreef.schemas.drop import DropConfig, DropReport, ThresholdHints
from dropreef.schemas.report import (
    QuantileBucket,
    QuantileReport,
    OverlapBucket,
    OverlapReport,
    SubgraphStats,
    StatsComparison,
    DensityRegion,
)
from dropreef.schemas.manifest import LabelInfo, RunManifest

__all__ = [
    "DropConfig",
    "DropReport",
    "ThresholdHints",
    "QuantileBucket",
    "QuantileReport",
    "OverlapBucket",
    "OverlapReport",
    "SubgraphStats",
    "StatsComparison",
    "DensityRegion",
    "RunManifest",
    "LabelInfo",
]
