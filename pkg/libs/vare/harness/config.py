"""Loading and saving experiment configs (JSON)."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional, Tuple, Union

from pydantic import ValidationError

from ..errors import ParseError
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _locate(text: str, key: Optional[str]) -> Optional[int]:
    """1-based line of the first ``"key":`` in ``text``."""
    if not key:
        return None
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def _describe(exc: ValidationError) -> Tuple[str, Optional[str]]:
    first = exc.errors()[0]
    loc = [str(part) for part in first.get("loc", ())]
    key = next((part for part in reversed(loc) if not part.isdigit()), None)
    path = ".".join(loc)
    if first.get("type") == "extra_forbidden":
        return f"unknown key '{key}' at {path}", key
    return f"{path}: {first.get('msg')}", key


def parse_config(text: str) -> ExperimentConfig:
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", line=1)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        message, key = _describe(exc)
        raise ParseError(message, line=_locate(text, key), field=key) from exc


def load_config(path: PathLike) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text)
    logger.info("Loaded %s study config from %s", cfg.study, path)
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n"


def save_config(cfg: ExperimentConfig, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(dump_config(cfg), encoding="utf-8")
    return path


__all__ = ["parse_config", "load_config", "dump_config", "save_config"]
