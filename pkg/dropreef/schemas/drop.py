"""
Pydantic models for redundancy detection and dropping
"""
import math
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class DropConfig(BaseModel):
    """
    Thresholds of the redundancy predicate

    A training node is redundant when degree >= th_deg and WNH >= th_wnh.
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"th_wnh": 1.0, "th_deg": 50, "retain_inference_edges": False}
        },
    )

    th_wnh: float = Field(..., ge=0, description="TH_WNH, inclusive lower bound on WNH")
    th_deg: int = Field(..., ge=1, description="TH_DEG, inclusive lower bound on degree")
    retain_inference_edges: bool = Field(
        default=False,
        description="Keep dropped nodes and their edges to validation/test nodes",
    )

    @field_validator("th_wnh")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("th_wnh must be finite")
        return v


class ThresholdRequest(BaseModel):
    """
    How to pick the dropped nodes when thresholds are not fixed up front

    Each threshold is given directly or as a nearest-rank quantile of the
    training set; naive_top_degree replaces both with the top-degree baseline.
    """
    model_config = ConfigDict(frozen=True)

    th_wnh: Optional[float] = Field(default=None, ge=0)
    th_deg: Optional[int] = Field(default=None, ge=1)
    wnh_quantile: Optional[float] = Field(default=None, ge=0, le=1)
    deg_quantile: Optional[float] = Field(default=None, ge=0, le=1)
    naive_top_degree: Optional[float] = Field(default=None, ge=0, le=1)
    retain_inference_edges: bool = False

    @property
    def mode(self) -> str:
        if self.naive_top_degree is not None:
            return f"naive-top-degree {self.naive_top_degree:g}"
        return "thresholds"


class DropReport(BaseModel):
    """Outcome of one drop: which nodes went and what it cost"""

    dropped: List[int] = Field(default_factory=list, exclude=True)
    dropped_count: int = Field(..., ge=0)
    train_count: int = Field(..., ge=0)
    removed_edge_count: int = Field(..., ge=0)
    train_edge_count: int = Field(..., ge=0)
    drop_node_ratio: float = Field(..., ge=0, le=1)
    drop_edge_ratio: float = Field(..., ge=0, le=1)
    th_wnh: Optional[float] = None
    th_deg: Optional[int] = None
    mode: str = "thresholds"
    retain_inference_edges: bool = False
    wnh_snapshot: Optional[str] = None
    dropped_ids: Optional[str] = None


class ThresholdHints(BaseModel):
    """Reference values for choosing TH_WNH and TH_DEG"""

    multi_label: bool
    num_classes: int
    wnh_upper_bound: float
    average_degree: float
    train_count: int
    degree_quantiles: Dict[str, float]
    wnh_quantiles: Dict[str, float]
