"""
Run manifest written next to every command output
"""
from typing import Any, Dict

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """What a command read, what it wrote and how long each stage took"""
    command: str
    tool_version: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    output_dir: str
    config: Dict[str, Any] = Field(default_factory=dict)
    stage_seconds: Dict[str, float] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(
        default_factory=dict,
        description="Relative output path -> sha256 hex digest",
    )


class LabelInfo(BaseModel):
    """Label shape fixed at ingest; read back so a bundle keeps N_c and the mode"""
    num_classes: int = Field(..., ge=0)
    multi_label: bool
