"""Covariate fields z: R^d -> R^p and their divergence operators.

Divergence here is the *sum of first partial derivatives*, applied componentwise
to vector fields: ``div h(u) = dh/du_1 + ... + dh/du_d``. It is not the
gradient and ``div_div`` is not the Laplacian: the mixed partials enter too,
``(div div z)_i = sum_{j,k} d^2 z_i / du_j du_k``.

Every evaluator accepts a single point ``(d,)`` or a batch ``(n, d)`` and
returns ``(p,)`` or ``(n, p)`` accordingly.
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable, Sequence, Union

import numpy as np

from .constants import MODEL_THETA, SINE_FREQUENCY, SINE_THETA_VALUE
from .errors import OutOfStencil, UnknownModel
from .geometry import Grid

logger = logging.getLogger(__name__)

ModelId = Union[int, str]

_K = SINE_FREQUENCY * np.pi


class CovariateField:
    """Base class: subclasses implement the batched ``_value``/``_div``/``_div_div``."""

    d: int = 2
    p: int = 1
    name: str = "field"

    def _value(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _div(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _div_div(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _apply(self, fn: Callable[[np.ndarray], np.ndarray], u) -> np.ndarray:
        pts = np.asarray(u, dtype=float)
        single = pts.ndim == 1
        batch = pts.reshape(1, -1) if single else pts
        if batch.shape[-1] != self.d:
            raise ValueError(f"{self.name}: expected points of dimension {self.d}, got {batch.shape[-1]}")
        out = np.asarray(fn(batch), dtype=float).reshape(batch.shape[0], self.p)
        return out[0] if single else out

    def value(self, u) -> np.ndarray:
        return self._apply(self._value, u)

    def div(self, u) -> np.ndarray:
        return self._apply(self._div, u)

    def div_div(self, u) -> np.ndarray:
        return self._apply(self._div_div, u)

    def log_linear(self, u, theta) -> np.ndarray:
        """theta^T z(u), the covariate part of log intensity."""
        theta = np.asarray(theta, dtype=float).reshape(self.p)
        return self.value(u) @ theta

    def __repr__(self) -> str:
        return f"{type(self).__name__}(d={self.d}, p={self.p})"


# ------------------------- Builtin analytic fields -------------------------


class Model1Field(CovariateField):
    """z(u) = u1^2 u2^2."""

    d, p, name = 2, 1, "model1"

    def _value(self, pts):
        u1, u2 = pts[:, 0], pts[:, 1]
        return (u1 ** 2 * u2 ** 2)[:, None]

    def _div(self, pts):
        u1, u2 = pts[:, 0], pts[:, 1]
        return (2 * u1 * u2 ** 2 + 2 * u1 ** 2 * u2)[:, None]

    def _div_div(self, pts):
        u1, u2 = pts[:, 0], pts[:, 1]
        return (2 * u2 ** 2 + 2 * u1 ** 2 + 8 * u1 * u2)[:, None]


class Model2Field(CovariateField):
    """z(u) = (sin 4 pi u1, sin 4 pi u2)."""

    d, p, name = 2, 2, "model2"

    def _value(self, pts):
        return np.sin(_K * pts)

    def _div(self, pts):
        return _K * np.cos(_K * pts)

    def _div_div(self, pts):
        return -(_K ** 2) * np.sin(_K * pts)


class Model3Field(CovariateField):
    """z(u) = sin(4 pi u1 u2)."""

    d, p, name = 2, 1, "model3"

    def _value(self, pts):
        return np.sin(_K * pts[:, 0] * pts[:, 1])[:, None]

    def _div(self, pts):
        u1, u2 = pts[:, 0], pts[:, 1]
        return (_K * (u1 + u2) * np.cos(_K * u1 * u2))[:, None]

    def _div_div(self, pts):
        u1, u2 = pts[:, 0], pts[:, 1]
        a = _K * u1 * u2
        s = u1 + u2
        return (-(_K ** 2) * s ** 2 * np.sin(a) + 2 * _K * np.cos(a))[:, None]


class Model4Field(CovariateField):
    """z(u) = (u1, u1^2, u1^3)."""

    d, p, name = 2, 3, "model4"

    def _value(self, pts):
        u1 = pts[:, 0]
        return np.stack([u1, u1 ** 2, u1 ** 3], axis=-1)

    def _div(self, pts):
        u1 = pts[:, 0]
        return np.stack([np.ones_like(u1), 2 * u1, 3 * u1 ** 2], axis=-1)

    def _div_div(self, pts):
        u1 = pts[:, 0]
        return np.stack([np.zeros_like(u1), np.full_like(u1, 2.0), 6 * u1], axis=-1)


class SineField(CovariateField):
    """z_i(u) = sin(4 pi u_i) / d for i = 1..d, so p = d."""

    name = "sine"

    def __init__(self, d: int) -> None:
        if d < 1:
            raise ValueError(f"sine field needs d >= 1, got {d}")
        self.d = int(d)
        self.p = int(d)

    def _value(self, pts):
        return np.sin(_K * pts) / self.d

    def _div(self, pts):
        return _K * np.cos(_K * pts) / self.d

    def _div_div(self, pts):
        return -(_K ** 2) * np.sin(_K * pts) / self.d


class ConstantField(CovariateField):
    name = "constant"

    def __init__(self, c: Sequence[float], d: int) -> None:
        self.c = np.atleast_1d(np.asarray(c, dtype=float))
        self.d = int(d)
        self.p = int(self.c.size)

    def _value(self, pts):
        return np.broadcast_to(self.c, (pts.shape[0], self.p))

    def _div(self, pts):
        return np.zeros((pts.shape[0], self.p))

    _div_div = _div


class LinearField(CovariateField):
    """z(u) = C u with ``C`` of shape ``(p, d)``."""

    name = "linear"

    def __init__(self, coef, d: int) -> None:
        coef = np.asarray(coef, dtype=float)
        if coef.ndim == 1:
            coef = coef[None, :]
        if coef.shape[1] != d:
            raise ValueError(f"linear coefficients must have {d} columns, got {coef.shape}")
        self.coef = coef
        self.d = int(d)
        self.p = int(coef.shape[0])

    def _value(self, pts):
        return pts @ self.coef.T

    def _div(self, pts):
        return np.broadcast_to(self.coef.sum(axis=1), (pts.shape[0], self.p))

    def _div_div(self, pts):
        return np.zeros((pts.shape[0], self.p))


class HomogeneousField(CovariateField):
    """Zero-dimensional covariate (p = 0): intensity exp(beta)."""

    name = "homogeneous"
    p = 0

    def __init__(self, d: int) -> None:
        self.d = int(d)

    def _value(self, pts):
        return np.zeros((pts.shape[0], 0))

    _div = _value
    _div_div = _value


class ShiftedField(CovariateField):
    """``base`` translated by ``offset``: z(u) = base(u - offset)."""

    name = "shifted"

    def __init__(self, base: CovariateField, offset: Sequence[float]) -> None:
        self.base = base
        self.offset = np.asarray(offset, dtype=float).reshape(base.d)
        self.d = base.d
        self.p = base.p

    def _value(self, pts):
        return self.base._value(pts - self.offset)

    def _div(self, pts):
        return self.base._div(pts - self.offset)

    def _div_div(self, pts):
        return self.base._div_div(pts - self.offset)


def constant(c: Sequence[float], d: int = 2) -> ConstantField:
    return ConstantField(c, d)


def linear(coef, d: int = 2) -> LinearField:
    return LinearField(coef, d)


def homogeneous(d: int = 2) -> HomogeneousField:
    return HomogeneousField(d)


_PLANAR = {"1": Model1Field, "2": Model2Field, "3": Model3Field, "4": Model4Field}


def _normalise_model_id(model_id: ModelId) -> str:
    key = str(model_id).strip().lower()
    if key.startswith("sine"):
        return "sine"
    return key


def builtin(model_id: ModelId, d: int = 2) -> CovariateField:
    """Analytic benchmark field: models ``1``-``4`` (planar) or ``sine`` in any d."""
    key = _normalise_model_id(model_id)
    if key == "sine":
        return SineField(d)
    if key not in _PLANAR:
        raise UnknownModel(f"unknown covariate model '{model_id}'")
    if d != 2:
        raise ValueError(f"model {key} is planar, got d={d}")
    return _PLANAR[key]()


def model_theta(model_id: ModelId, d: int = 2) -> np.ndarray:
    """True theta used for ``model_id`` in the benchmark studies."""
    key = _normalise_model_id(model_id)
    if key == "sine":
        return np.full(int(d), SINE_THETA_VALUE)
    if key not in MODEL_THETA:
        raise UnknownModel(f"unknown covariate model '{model_id}'")
    return np.asarray(MODEL_THETA[key], dtype=float)


# ------------------------- Grid-sampled covariates -------------------------


class GridCovariate(CovariateField):
    """Covariate known only at the nodes of a regular grid.

    Operators use central differences on the 3x3 (3^d in general) subgrid
    centred at the node nearest to ``u`` and are evaluated at that node, not at
    ``u``. ``fd_div``/``fd_div_div`` refuse points whose nearest node lies on the
    grid boundary; the ``CovariateField`` interface instead shifts to the
    closest subgrid that fits.
    """

    name = "grid"

    def __init__(self, grid: Grid, samples) -> None:
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape[0] != grid.size:
            raise ValueError(f"expected {grid.size} node samples, got {samples.shape[0]}")
        if any(c < 3 for c in grid.counts):
            raise ValueError(f"grid needs at least 3 nodes per axis for the stencil, got {grid.counts}")
        self.grid = grid
        self.samples = samples
        self.d = grid.d
        self.p = int(samples.shape[1])
        self._cube = samples.reshape(tuple(grid.counts) + (self.p,))
        self._offsets = [np.asarray(o) for o in itertools.product((-1, 0, 1), repeat=self.d)]

    @classmethod
    def sample(cls, field: CovariateField, grid: Grid) -> "GridCovariate":
        return cls(grid, field.value(grid.nodes))

    # -- stencil centres --

    def _centres(self, pts: np.ndarray, strict: bool) -> np.ndarray:
        idx = self.grid.nearest_index(pts)
        upper = np.asarray(self.grid.counts) - 2
        if strict:
            bad = np.any((idx < 1) | (idx > upper), axis=-1)
            if np.any(bad):
                first = pts[np.argmax(bad)]
                raise OutOfStencil(f"point {first.tolist()} is within one cell of the grid boundary")
            return idx
        return np.clip(idx, 1, upper)

    def stencil_centres(self, u) -> np.ndarray:
        """Coordinates of the (clamped) subgrid midpoints for ``u``."""
        pts = np.atleast_2d(np.asarray(u, dtype=float))
        idx = self._centres(pts, strict=False)
        return self.grid.window.lower_array + self.grid.spacing * (idx + 0.5)

    def stencil_nodes(self, points) -> np.ndarray:
        """Sorted flat indices of the union of subgrids used by ``points``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            return np.zeros(0, dtype=int)
        idx = self._centres(pts, strict=False)
        blocks = [self.grid.flat_index(idx + off) for off in self._offsets]
        return np.unique(np.concatenate(blocks))

    # -- finite differences --

    def _at(self, idx: np.ndarray, offset) -> np.ndarray:
        shifted = idx + np.asarray(offset, dtype=int)
        return self._cube[tuple(shifted.T)]

    def _unit(self, j: int, sign: int = 1) -> np.ndarray:
        e = np.zeros(self.d, dtype=int)
        e[j] = sign
        return e

    def _fd_first(self, idx: np.ndarray) -> np.ndarray:
        h = self.grid.spacing
        out = np.zeros((idx.shape[0], self.p))
        for j in range(self.d):
            out += (self._at(idx, self._unit(j)) - self._at(idx, self._unit(j, -1))) / (2 * h[j])
        return out

    def _fd_second(self, idx: np.ndarray) -> np.ndarray:
        h = self.grid.spacing
        centre = self._at(idx, np.zeros(self.d, dtype=int))
        out = np.zeros((idx.shape[0], self.p))
        for j in range(self.d):
            plus, minus = self._at(idx, self._unit(j)), self._at(idx, self._unit(j, -1))
            out += (plus - 2 * centre + minus) / h[j] ** 2
        for j, k in itertools.combinations(range(self.d), 2):
            ej, ek = self._unit(j), self._unit(k)
            mixed = (
                self._at(idx, ej + ek)
                - self._at(idx, ej - ek)
                - self._at(idx, -ej + ek)
                + self._at(idx, -ej - ek)
            ) / (4 * h[j] * h[k])
            out += 2 * mixed
        return out

    def fd_div(self, u) -> np.ndarray:
        return self._apply(lambda pts: self._fd_first(self._centres(pts, strict=True)), u)

    def fd_div_div(self, u) -> np.ndarray:
        return self._apply(lambda pts: self._fd_second(self._centres(pts, strict=True)), u)

    def _value(self, pts):
        return self._at(self._centres(pts, strict=False), np.zeros(self.d, dtype=int))

    def _div(self, pts):
        return self._fd_first(self._centres(pts, strict=False))

    def _div_div(self, pts):
        return self._fd_second(self._centres(pts, strict=False))


__all__ = [
    "CovariateField",
    "Model1Field",
    "Model2Field",
    "Model3Field",
    "Model4Field",
    "SineField",
    "ConstantField",
    "LinearField",
    "HomogeneousField",
    "ShiftedField",
    "GridCovariate",
    "builtin",
    "model_theta",
    "constant",
    "linear",
    "homogeneous",
]
