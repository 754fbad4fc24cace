"""Smooth window indicator eta_W built from a compactly supported bump.

``phi(v) = c exp(-1 / (1 - |v|^2))`` on the unit ball, ``phi_eps(v) = eps^-d
phi(v / eps)``, and ``eta_W = 1_{W eroded by eps} * phi_eps``. Then eta equals 1
on W eroded by 2 eps, vanishes outside W, and is smooth in between.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import integrate, special

from .constants import CONSTANT_RESOLUTION
from .errors import EmptyErosion
from .geometry import Window, contains, erode, midpoint_integral
from .settings import get_settings

logger = logging.getLogger(__name__)

# Largest number of kernel evaluations held in memory per chunk.
_EVAL_BUDGET = 2_000_000

# Tensor rules are used up to this dimension; above it the radial reduction.
_TENSOR_MAX_D = 3


def _unnormalised(v: np.ndarray) -> np.ndarray:
    """exp(-1/(1-|v|^2)) inside the unit ball, 0 outside; last axis is space."""
    r2 = np.sum(np.square(v), axis=-1)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


def _unnormalised_div(v: np.ndarray) -> np.ndarray:
    """Sum of partials of the unnormalised bump: -2 e(v) sum_j v_j / (1-|v|^2)^2."""
    r2 = np.sum(np.square(v), axis=-1)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    gap = 1.0 - r2[inside]
    out[inside] = -2.0 * np.exp(-1.0 / gap) * np.sum(v[inside], axis=-1) / gap ** 2
    return out


def _sphere_area(d: int) -> float:
    return 2.0 * np.pi ** (d / 2.0) / special.gamma(d / 2.0)


def _radial_mass(d: int) -> float:
    val, _ = integrate.quad(lambda r: r ** (d - 1) * np.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0, limit=200)
    return _sphere_area(d) * val


def _radial_div_mass(d: int) -> float:
    # |sum_j v_j| = sqrt(d) |v . e| and the sphere integral of |w_1| is 2 pi^((d-1)/2) / Gamma((d+1)/2).
    val, _ = integrate.quad(
        lambda r: r ** d * np.exp(-1.0 / (1.0 - r * r)) / (1.0 - r * r) ** 2, 0.0, 1.0, limit=200
    )
    abs_first_moment = 2.0 * np.pi ** ((d - 1) / 2.0) / special.gamma((d + 1) / 2.0)
    return 2.0 * np.sqrt(d) * abs_first_moment * val


def _resolve_method(d: int, method: str) -> str:
    if method == "auto":
        return "tensor" if d <= _TENSOR_MAX_D else "radial"
    if method not in ("tensor", "radial"):
        raise ValueError(f"method must be 'auto', 'tensor' or 'radial', got {method!r}")
    return method


@lru_cache(maxsize=64)
def normalizing_constant(d: int, method: str = "auto", resolution: Optional[int] = None) -> float:
    """c such that the bump integrates to one over the unit ball in R^d."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if _resolve_method(d, method) == "radial":
        mass = _radial_mass(d)
    else:
        res = resolution or CONSTANT_RESOLUTION.get(d, 100)
        mass = float(midpoint_integral(_unnormalised, Window.square(-1.0, 1.0, d), res))
    c = 1.0 / mass
    logger.debug("bump normalising constant d=%s method=%s: %.6f", d, method, c)
    return c


@lru_cache(maxsize=64)
def kappa(d: int, method: str = "auto", resolution: Optional[int] = None) -> float:
    """Integral over the unit ball of |div phi|."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    c = normalizing_constant(d, method, resolution)
    if _resolve_method(d, method) == "radial":
        return c * _radial_div_mass(d)
    res = resolution or CONSTANT_RESOLUTION.get(d, 100)
    mass = midpoint_integral(lambda v: np.abs(_unnormalised_div(v)), Window.square(-1.0, 1.0, d), res)
    return c * float(mass)


def bump(u, d: Optional[int] = None) -> np.ndarray:
    """phi(u) for one point ``(d,)`` or a batch ``(n, d)``."""
    v = np.asarray(u, dtype=float)
    dim = d or v.shape[-1]
    out = normalizing_constant(dim) * _unnormalised(v)
    return float(out) if np.ndim(out) == 0 else out


def bump_div(u, d: Optional[int] = None) -> np.ndarray:
    v = np.asarray(u, dtype=float)
    dim = d or v.shape[-1]
    out = normalizing_constant(dim) * _unnormalised_div(v)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Mollifier:
    """eta_W and div eta_W for a box window and smoothing width ``epsilon``.

    Both are computed in one midpoint pass over the part of the kernel support
    that meets ``W eroded by eps``. The nodes span that clipped box, so the
    quadrature moves continuously with ``u`` and its numerical derivative agrees
    with the div eta quadrature. Sums are normalised by the quadrature mass of
    the full kernel, making eta exactly 1 wherever the support is not clipped.
    """

    window: Window
    epsilon: float
    resolution: int = 0
    inner: Optional[Window] = field(init=False, repr=False, compare=False)
    support: Window = field(init=False, repr=False, compare=False)
    _mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        res = int(self.resolution) if self.resolution else get_settings().eta_resolution
        if res < 3:
            raise ValueError(f"resolution must be >= 3, got {res}")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "support", erode(self.window, self.epsilon))
        try:
            inner: Optional[Window] = erode(self.window, 2.0 * self.epsilon)
        except EmptyErosion:
            inner = None
        object.__setattr__(self, "inner", inner)
        # Same nodes as an unclipped evaluation, in kernel coordinates.
        ticks = -1.0 + 2.0 * (np.arange(res) + 0.5) / res
        mesh = np.stack(np.meshgrid(*([ticks] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
        mass = float(np.sum(_unnormalised(mesh))) * (2.0 / res) ** self.d
        object.__setattr__(self, "_mass", mass)

    @property
    def d(self) -> int:
        return self.window.d

    @property
    def c(self) -> float:
        return normalizing_constant(self.d)

    def evaluate(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(eta, div_eta)`` at an ``(n, d)`` array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[0]
        eta = np.zeros(n)
        div = np.zeros(n)
        if n == 0:
            return eta, div
        in_w = np.asarray(contains(self.window, pts), dtype=bool).reshape(n)
        deep = np.zeros(n, dtype=bool)
        if self.inner is not None:
            deep = np.asarray(contains(self.inner, pts), dtype=bool).reshape(n)
        eta[deep] = 1.0
        band = np.flatnonzero(in_w & ~deep)
        if band.size:
            per_point = self.resolution ** self.d
            step = max(1, _EVAL_BUDGET // per_point)
            for start in range(0, band.size, step):
                chunk = band[start:start + step]
                e, g = self._band(pts[chunk])
                eta[chunk] = e
                div[chunk] = g
        return eta, div

    def _band(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        eps, res, d = self.epsilon, self.resolution, self.d
        lo = np.maximum(pts - eps, self.support.lower_array)
        hi = np.minimum(pts + eps, self.support.upper_array)
        width = hi - lo
        empty = np.any(width <= 0, axis=1)
        width = np.where(empty[:, None], 0.0, width)
        frac = (np.arange(res) + 0.5) / res
        # Per-axis node coordinates in kernel space, shape (n, d, res).
        v_axes = lo[:, :, None] + width[:, :, None] * frac[None, None, :]
        w_axes = (pts[:, :, None] - v_axes) / eps
        grids = np.meshgrid(*([np.arange(res)] * d), indexing="ij")
        flat = [g.ravel() for g in grids]
        w_nodes = np.stack([w_axes[:, j, flat[j]] for j in range(d)], axis=-1)
        cell = np.prod(width / eps / res, axis=1)
        scale = cell / self._mass
        eta = np.sum(_unnormalised(w_nodes), axis=1) * scale
        div = np.sum(_unnormalised_div(w_nodes), axis=1) * scale / eps
        eta[empty] = 0.0
        div[empty] = 0.0
        return np.clip(eta, 0.0, 1.0), div

    def eta(self, u) -> np.ndarray:
        values, _ = self.evaluate(u)
        return float(values[0]) if np.ndim(u) == 1 else values

    def div_eta(self, u) -> np.ndarray:
        _, values = self.evaluate(u)
        return float(values[0]) if np.ndim(u) == 1 else values


def eta(m: Mollifier, u) -> np.ndarray:
    return m.eta(u)


def div_eta(m: Mollifier, u) -> np.ndarray:
    return m.div_eta(u)


__all__ = [
    "Mollifier",
    "bump",
    "bump_div",
    "normalizing_constant",
    "kappa",
    "eta",
    "div_eta",
]
