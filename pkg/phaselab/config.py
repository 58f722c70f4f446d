"""
Runtime settings for phaselab.
Loaded from PHASELAB_* environment variables; scenario physics lives in
the YAML scenario configs, not here.
"""
import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator

DEFAULT_OUT_DIR = "runs"
DEFAULT_SNAPSHOT_CAP = 256


class RuntimeSettings(BaseModel):
    """Process-wide settings with validation"""
    out_dir: Path = Field(
        default=Path(DEFAULT_OUT_DIR),
        description="Root directory under which run directories are created"
    )
    log_level: str = Field(
        default="INFO",
        description="Root logger level"
    )
    jobs: int = Field(
        default=1,
        ge=1,
        description="Configs executed concurrently by `run`"
    )
    snapshot_cap: int = Field(
        default=DEFAULT_SNAPSHOT_CAP,
        ge=2,
        description="Maximum in-memory snapshots per evolution"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level '{v}'")
        return level


def get_settings(out_dir: Optional[str] = None) -> RuntimeSettings:
    """Load runtime settings from the environment; explicit arguments win."""
    return RuntimeSettings(
        out_dir=Path(out_dir or os.getenv("PHASELAB_OUT_DIR", DEFAULT_OUT_DIR)),
        log_level=os.getenv("PHASELAB_LOG_LEVEL", "INFO"),
        jobs=int(os.getenv("PHASELAB_JOBS", "1")),
        snapshot_cap=int(os.getenv("PHASELAB_SNAPSHOT_CAP", str(DEFAULT_SNAPSHOT_CAP))),
    )
