"""
Pydantic models for distribution and subgraph diagnostics
"""
from typing import List

from pydantic import BaseModel, Field


class QuantileBucket(BaseModel):
    """One equal-count slice of the degree-sorted node list"""
    label: str
    start_rank: int = Field(..., ge=0)
    end_rank: int = Field(..., ge=0)
    node_count: int = Field(..., ge=0)
    degree_sum: int = Field(..., ge=0)
    neighbor_share: float = Field(..., ge=0, le=1)
    average_degree: float = Field(..., ge=0)


class QuantileReport(BaseModel):
    """Share of all neighbor slots held by the highest-degree nodes"""
    num_nodes: int
    total_degree: int
    top_fraction: float
    tracked_nodes: int
    buckets: List[QuantileBucket]
    remainder_share: float = Field(..., ge=0, le=1)


class OverlapBucket(BaseModel):
    label: str
    start_rank: int
    end_rank: int
    fraction: float = Field(..., ge=0, le=1)


class OverlapReport(BaseModel):
    """Where the top-WNH nodes fall among the degree buckets"""
    num_nodes: int
    wnh_top_fraction: float
    degree_top_fraction: float
    top_wnh_count: int
    buckets: List[OverlapBucket]
    outside_fraction: float = Field(..., ge=0, le=1)


class SubgraphStats(BaseModel):
    """Mean structural statistics over sampled subgraphs"""
    num_samples: int = Field(..., ge=0)
    budget: int = Field(..., ge=0)
    seed: int
    clustering_coefficient: float = Field(..., ge=0, le=1)
    closed_triads: float = Field(..., ge=0)


class StatsComparison(BaseModel):
    """Vanilla against low-redundancy sampling statistics"""
    vanilla: SubgraphStats
    dropped: SubgraphStats
    clustering_coefficient_delta: float
    closed_triads_delta: float


class DensityRegion(BaseModel):
    """A window of the shared-neighbor matrix and its total"""
    row: int
    col: int
    total: int
