"""Plain-text pattern and grid-covariate files.

Pattern file::

    # d=2 window=-1,-1..1,1 process=poisson seed=7
    0.125 -0.5
    ...

Grid covariate file: a header ``d p n1 .. nd lower.. upper..`` followed by one
row of ``p`` samples per node in row-major order.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .covariate import GridCovariate
from .errors import ParseError
from .geometry import Grid, Window
from .simulate import PointPattern

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def parse_window(text: str) -> Window:
    """``"l1,l2..u1,u2"`` -> Window."""
    try:
        lower_s, upper_s = text.strip().split("..")
        lower = [float(v) for v in lower_s.split(",")]
        upper = [float(v) for v in upper_s.split(",")]
        return Window(tuple(lower), tuple(upper))
    except ValueError as exc:
        raise ParseError(f"bad window '{text}': expected l1,..,ld..u1,..,ud ({exc})", field="window") from exc


def window_token(w: Window) -> str:
    return ",".join(repr(v) for v in w.lower) + ".." + ",".join(repr(v) for v in w.upper)


def write_pattern(pattern: PointPattern, path: PathLike) -> Path:
    path = Path(path)
    meta = pattern.meta
    header = (
        f"# d={pattern.window.d} window={window_token(pattern.window)} "
        f"process={meta.get('process', 'unknown')} seed={meta.get('seed', 'none')}"
    )
    lines = [header]
    lines.extend(" ".join(repr(float(c)) for c in row) for row in pattern.points)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("wrote %s points to %s", pattern.n, path)
    return path


def _parse_header(line: str) -> Dict[str, str]:
    if not line.startswith("#"):
        raise ParseError("pattern file must start with a '# d=... window=...' header", line=1)
    fields: Dict[str, str] = {}
    for token in line[1:].split():
        if "=" not in token:
            raise ParseError(f"header token '{token}' is not key=value", line=1)
        key, value = token.split("=", 1)
        fields[key] = value
    for key in ("d", "window"):
        if key not in fields:
            raise ParseError("missing header key", line=1, field=key)
    return fields


def read_pattern(path: PathLike) -> PointPattern:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ParseError("empty pattern file", line=1)
    header = _parse_header(text[0].strip())
    try:
        d = int(header["d"])
    except ValueError as exc:
        raise ParseError(f"d must be an integer, got '{header['d']}'", line=1, field="d") from exc
    window = parse_window(header["window"])
    if window.d != d:
        raise ParseError(f"window has dimension {window.d}, header says d={d}", line=1, field="window")
    rows: List[List[float]] = []
    for lineno, raw in enumerate(text[1:], start=2):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != d:
            raise ParseError(f"expected {d} coordinates, got {len(parts)}", line=lineno)
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ParseError(f"non-numeric coordinate in '{raw}'", line=lineno) from exc
    seed_raw = header.get("seed", "none")
    try:
        seed: Optional[int] = None if seed_raw in ("none", "None", "") else int(seed_raw)
    except ValueError as exc:
        raise ParseError(f"seed must be an integer, got '{seed_raw}'", line=1, field="seed") from exc
    meta: Dict[str, Any] = {"process": header.get("process", "unknown"), "seed": seed}
    try:
        return PointPattern(np.asarray(rows, dtype=float).reshape(-1, d), window, meta)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def write_grid_covariate(cov: GridCovariate, path: PathLike) -> Path:
    path = Path(path)
    grid = cov.grid
    header = [str(grid.d), str(cov.p)] + [str(c) for c in grid.counts]
    header += [repr(v) for v in grid.window.lower] + [repr(v) for v in grid.window.upper]
    lines = [" ".join(header)]
    lines.extend(" ".join(repr(float(v)) for v in row) for row in cov.samples)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_grid_covariate(path: PathLike) -> GridCovariate:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    if not lines:
        raise ParseError("empty grid covariate file", line=1)
    head = lines[0].split()
    try:
        d, p = int(head[0]), int(head[1])
        counts = tuple(int(v) for v in head[2:2 + d])
        lower = tuple(float(v) for v in head[2 + d:2 + 2 * d])
        upper = tuple(float(v) for v in head[2 + 2 * d:2 + 3 * d])
    except (ValueError, IndexError) as exc:
        raise ParseError("header must be 'd p n1..nd lower.. upper..'", line=1) from exc
    if len(head) != 2 + 3 * d or len(counts) != d:
        raise ParseError(f"header has {len(head)} fields, expected {2 + 3 * d}", line=1)
    grid = Grid(Window(lower, upper), counts)
    samples = np.empty((grid.size, p))
    row = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        if row >= grid.size:
            raise ParseError(f"more than {grid.size} sample rows", line=lineno)
        parts = raw.split()
        if len(parts) != p:
            raise ParseError(f"expected {p} samples, got {len(parts)}", line=lineno)
        try:
            samples[row] = [float(v) for v in parts]
        except ValueError as exc:
            raise ParseError(f"non-numeric sample in '{raw.strip()}'", line=lineno) from exc
        row += 1
    if row != grid.size:
        raise ParseError(f"expected {grid.size} sample rows, got {row}", line=len(lines))
    return GridCovariate(grid, samples)


__all__ = [
    "parse_window",
    "window_token",
    "write_pattern",
    "read_pattern",
    "write_grid_covariate",
    "read_grid_covariate",
]
