"""Observation windows, regular grids and midpoint quadrature.

Windows are closed axis-aligned boxes. Erosion and dilation move every face by
the same distance, which for boxes is erosion by the max-norm ball; the
Euclidean ball of radius r sits inside that ball, so supports built from the
eroded box still stay inside the original window.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyErosion

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


def _as_tuple(values: ArrayLike) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class Window:
    """Closed box ``[lower, upper]`` in R^d."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", _as_tuple(self.lower))
        object.__setattr__(self, "upper", _as_tuple(self.upper))
        if len(self.lower) == 0:
            raise ValueError("Window needs at least one axis")
        if len(self.lower) != len(self.upper):
            raise ValueError(
                f"lower/upper length mismatch: {len(self.lower)} vs {len(self.upper)}"
            )
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
                raise ValueError(f"axis {j}: lower {lo} must be < upper {hi}")

    @classmethod
    def square(cls, a: float, b: float, d: int = 2) -> "Window":
        return cls((a,) * d, (b,) * d)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Window":
        return cls(tuple(data["lower"]), tuple(data["upper"]))

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper)

    def to_dict(self) -> Dict[str, Any]:
        return {"lower": list(self.lower), "upper": list(self.upper)}


def volume(w: Window) -> float:
    return float(np.prod(w.sides))


def erode(w: Window, r: float) -> Window:
    """Shrink every face inward by ``r``."""
    if r < 0:
        raise ValueError(f"erosion radius must be >= 0, got {r}")
    if r == 0:
        return w
    if 2.0 * r >= float(np.min(w.sides)):
        raise EmptyErosion(f"eroding {format_window(w)} by {r} leaves no interior")
    return Window(w.lower_array + r, w.upper_array - r)


def dilate(w: Window, r: float) -> Window:
    if r < 0:
        raise ValueError(f"dilation radius must be >= 0, got {r}")
    if r == 0:
        return w
    return Window(w.lower_array - r, w.upper_array + r)


def contains(w: Window, u: ArrayLike) -> Union[bool, np.ndarray]:
    """Closed-box membership for one point or an ``(n, d)`` array of points."""
    pts = np.asarray(u, dtype=float)
    inside = np.all((pts >= w.lower_array) & (pts <= w.upper_array), axis=-1)
    if inside.ndim == 0:
        return bool(inside)
    return inside


def uniform_sample(w: Window, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Independent uniform coordinates on each side; one point or ``(size, d)``."""
    if size is None:
        return rng.uniform(w.lower_array, w.upper_array)
    return rng.uniform(w.lower_array, w.upper_array, size=(int(size), w.d))


def format_window(w: Window) -> str:
    """Short label: ``[-1,1]^2`` for cubes, ``[l1,u1]x[l2,u2]`` otherwise."""

    def _num(x: float) -> str:
        return f"{x:g}"

    if len(set(w.lower)) == 1 and len(set(w.upper)) == 1:
        return f"[{_num(w.lower[0])},{_num(w.upper[0])}]^{w.d}"
    return "x".join(f"[{_num(lo)},{_num(hi)}]" for lo, hi in zip(w.lower, w.upper))


@dataclass(frozen=True)
class Grid:
    """Cell-centre nodes of a regular partition of ``window``; row-major order."""

    window: Window
    counts: Tuple[int, ...]
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        if len(counts) != self.window.d:
            raise ValueError(f"counts has {len(counts)} entries, window has d={self.window.d}")
        if any(c < 1 for c in counts):
            raise ValueError(f"grid counts must be positive, got {counts}")
        object.__setattr__(self, "counts", counts)
        axes = [self.axis_centers(j) for j in range(len(counts))]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def d(self) -> int:
        return self.window.d

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacing(self) -> np.ndarray:
        return self.window.sides / np.asarray(self.counts, dtype=float)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, j: int) -> np.ndarray:
        lo = self.window.lower[j]
        h = (self.window.upper[j] - lo) / self.counts[j]
        return lo + h * (np.arange(self.counts[j]) + 0.5)

    def nearest_index(self, u: ArrayLike) -> np.ndarray:
        """Per-axis index of the nearest node (clipped to the grid)."""
        pts = np.asarray(u, dtype=float)
        raw = np.floor((pts - self.window.lower_array) / self.spacing).astype(int)
        return np.clip(raw, 0, np.asarray(self.counts) - 1)

    def flat_index(self, multi: ArrayLike) -> np.ndarray:
        idx = np.asarray(multi, dtype=int)
        return np.ravel_multi_index(tuple(np.moveaxis(idx, -1, 0)), self.counts)


def regular_grid(w: Window, counts: Union[int, Sequence[int]]) -> Grid:
    """Regular grid; a scalar ``counts`` is used on every axis."""
    if np.ndim(counts) == 0:
        counts = (int(counts),) * w.d
    return Grid(w, tuple(counts))


def midpoint_integral(
    fn: Callable[[np.ndarray], np.ndarray],
    w: Window,
    counts: Union[int, Sequence[int]],
    chunk_size: int = 200_000,
) -> np.ndarray:
    """Tensor-product midpoint rule of ``fn`` over ``w``.

    ``fn`` maps an ``(n, d)`` array of nodes to ``(n,)`` or ``(n, ...)`` values.
    Nodes are generated chunk by chunk so large d-dimensional grids never need
    to be held in memory at once.
    """
    if np.ndim(counts) == 0:
        counts = (int(counts),) * w.d
    counts = tuple(int(c) for c in counts)
    total = int(np.prod(counts))
    spacing = w.sides / np.asarray(counts, dtype=float)
    cell = float(np.prod(spacing))
    acc: Optional[np.ndarray] = None
    for start in range(0, total, chunk_size):
        flat = np.arange(start, min(start + chunk_size, total))
        multi = np.stack(np.unravel_index(flat, counts), axis=-1)
        nodes = w.lower_array + spacing * (multi + 0.5)
        part = np.sum(np.asarray(fn(nodes), dtype=float), axis=0)
        acc = part if acc is None else acc + part
    return np.asarray(acc) * cell


__all__ = [
    "Window",
    "Grid",
    "volume",
    "erode",
    "dilate",
    "contains",
    "uniform_sample",
    "regular_grid",
    "midpoint_integral",
    "format_window",
]
