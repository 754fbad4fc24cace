"""Runtime settings read from the environment (``.env`` supported).

Each numerical knob has a keyword override on the function that uses it; the
values here are only the defaults.
"""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from .constants import CONDITION_LIMIT

# Load .env early
load_dotenv()

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r, using %s", name, raw, default)
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning("Ignoring non-numeric %s=%r, using %s", name, raw, default)
        return default


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    log_level: str = Field("INFO", description="Root log level for CLIs and the API.")
    workers: int = Field(1, ge=1, description="Default worker processes for experiments.")
    eta_resolution: int = Field(61, ge=3, description="Quadrature nodes per axis for the mollifier.")
    probe_resolution: int = Field(128, ge=2, description="Per-axis probe grid for intensity bounds.")
    lgcp_grid: int = Field(64, ge=2, description="Per-axis resolution of the LGCP Gaussian field.")
    thomas_dilation: float = Field(4.0, gt=0, description="Parent window dilation in units of sigma.")
    condition_limit: float = Field(CONDITION_LIMIT, gt=1, description="Singularity cutoff for A.")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings(
        log_level=os.getenv("VARE_LOG_LEVEL", "INFO").upper(),
        workers=max(1, _env_int("VARE_WORKERS", 1)),
        eta_resolution=max(3, _env_int("VARE_ETA_RESOLUTION", 61)),
        probe_resolution=max(2, _env_int("VARE_PROBE_RESOLUTION", 128)),
        lgcp_grid=max(2, _env_int("VARE_LGCP_GRID", 64)),
        thomas_dilation=_env_float("VARE_THOMAS_DILATION", 4.0),
        condition_limit=_env_float("VARE_CONDITION_LIMIT", CONDITION_LIMIT),
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Install a basic root handler; called by entry points, never by library code."""
    name = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


__all__ = ["Settings", "get_settings", "configure_logging"]
