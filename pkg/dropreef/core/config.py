"""
Toolkit configuration management using Pydantic Settings
Loads and validates optional environment variables from a .env file
"""

from typing import Literal

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from dropreef import __version__


class Settings(BaseSettings):
    """Toolkit settings; every field has a default, none is required"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    # ───────────────────────────
    # Application Settings
    # ───────────────────────────
    APP_NAME: str = "dropreef"
    APP_VERSION: str = __version__

    # ───────────────────────────
    # Logging
    # ───────────────────────────
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["json", "text"] = "json"

    # ───────────────────────────
    # Execution
    # ───────────────────────────
    DEFAULT_SEED: int = 0
    DEFAULT_THREADS: int = Field(default=1, ge=1)
    # Node-range size of one parallel work unit. Fixed independently of the
    # worker count so that chunk boundaries never move.
    CHUNK_NODES: int = Field(default=65536, ge=1)
    NODE_ID_BITS: Literal[32, 64] = 32

    # ───────────────────────────
    # Analysis Defaults
    # ───────────────────────────
    SHARED_NEIGHBOR_CAP: int = Field(default=10_000, ge=1)
    DENSITY_TOP_K: int = Field(default=10, ge=1)
    TOP_FRACTION: float = Field(default=0.5, gt=0, le=1)
    QUANTILE_BUCKETS: int = Field(default=5, ge=1)
    WNH_TOP_FRACTION: float = Field(default=0.1, gt=0, le=1)

    # ───────────────────────────
    # Computed Properties
    # ───────────────────────────
    @property
    def node_id_dtype(self) -> np.dtype:
        return np.dtype(np.uint32 if self.NODE_ID_BITS == 32 else np.uint64)

    @property
    def log_level(self) -> str:
        return self.LOG_LEVEL.upper()


# Global settings instance
settings = Settings()
