"""Simulation of point processes with log-linear intensity exp(beta + theta^T z(u)).

Three processes share the same first-order intensity: inhomogeneous Poisson,
log-Gaussian Cox (LGCP) and the Thomas cluster process. Generators take a
``numpy.random.Generator``; harness code obtains one per replication through
``replication_rng`` so runs are reproducible for any worker layout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, optimize
from scipy.spatial.distance import cdist

from .constants import (
    CALIBRATION_RESOLUTION,
    CALIBRATION_RESOLUTION_FALLBACK,
    CHOLESKY_JITTER,
    LAMBDA_SAFETY,
    LGCP_PRESETS,
    PROBE_NODE_CAP,
    THOMAS_PRESETS,
)
from .covariate import CovariateField
from .errors import BoundViolation, CholeskyFailure, UnknownModel
from .geometry import Grid, Window, contains, dilate, midpoint_integral, regular_grid, uniform_sample, volume
from .settings import get_settings

logger = logging.getLogger(__name__)

PROCESS_KINDS = ("poisson", "lgcp", "thomas")


@dataclass
class PointPattern:
    """Finite point set in ``window`` with provenance in ``meta``."""

    points: np.ndarray
    window: Window
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.window.d)
        if pts.ndim != 2 or pts.shape[1] != self.window.d:
            raise ValueError(f"points must have shape (n, {self.window.d}), got {pts.shape}")
        if pts.shape[0] and not np.all(contains(self.window, pts)):
            raise ValueError("every point of a pattern must lie inside its window")
        self.points = pts

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window": self.window.to_dict(),
            "points": self.points.tolist(),
            "meta": dict(self.meta),
        }


@dataclass(frozen=True)
class ProcessSpec:
    """Process kind, intensity parameters and the active cluster/field block."""

    kind: str
    covariate: CovariateField
    theta: Tuple[float, ...]
    beta: float = 0.0
    sigma2: Optional[float] = None
    alpha: Optional[float] = None
    kappa: Optional[float] = None
    sigma: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in PROCESS_KINDS:
            raise UnknownModel(f"unknown process kind '{self.kind}'")
        theta = tuple(float(t) for t in np.atleast_1d(np.asarray(self.theta, dtype=float)))
        if self.covariate.p == 0:
            theta = ()
        if len(theta) != self.covariate.p:
            raise ValueError(f"theta has {len(theta)} entries, covariate has p={self.covariate.p}")
        object.__setattr__(self, "theta", theta)
        lgcp_block = (self.sigma2, self.alpha)
        thomas_block = (self.kappa, self.sigma)
        if self.kind == "lgcp":
            if any(v is None or not v > 0 for v in lgcp_block):
                raise ValueError("lgcp needs sigma2 > 0 and alpha > 0")
            if any(v is not None for v in thomas_block):
                raise ValueError("lgcp spec must not carry kappa/sigma")
        elif self.kind == "thomas":
            if any(v is None or not v > 0 for v in thomas_block):
                raise ValueError("thomas needs kappa > 0 and sigma > 0")
            if any(v is not None for v in lgcp_block):
                raise ValueError("thomas spec must not carry sigma2/alpha")
        elif any(v is not None for v in lgcp_block + thomas_block):
            raise ValueError("poisson spec takes no field or cluster parameters")
        if self.name is None:
            object.__setattr__(self, "name", self.kind)

    @property
    def d(self) -> int:
        return self.covariate.d

    @property
    def theta_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)

    def with_beta(self, beta: float) -> "ProcessSpec":
        return replace(self, beta=float(beta))

    def log_intensity(self, u) -> np.ndarray:
        return self.beta + self.covariate.log_linear(u, self.theta_array)

    def intensity(self, u) -> np.ndarray:
        return np.exp(self.log_intensity(u))

    def parameters(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"beta": self.beta, "theta": list(self.theta)}
        for key in ("sigma2", "alpha", "kappa", "sigma"):
            value = getattr(self, key)
            if value is not None:
                params[key] = value
        return params


def process_preset(
    name: str,
    covariate: CovariateField,
    theta: Sequence[float],
    beta: float = 0.0,
) -> ProcessSpec:
    """``poisson``, ``lgcp1``, ``lgcp2``, ``thomas1`` or ``thomas2``."""
    key = name.strip().lower()
    if key == "poisson":
        return ProcessSpec("poisson", covariate, tuple(theta), beta=beta, name=key)
    if key in LGCP_PRESETS:
        return ProcessSpec("lgcp", covariate, tuple(theta), beta=beta, name=key, **LGCP_PRESETS[key])
    if key in THOMAS_PRESETS:
        return ProcessSpec("thomas", covariate, tuple(theta), beta=beta, name=key, **THOMAS_PRESETS[key])
    raise UnknownModel(f"unknown process preset '{name}'")


def replication_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(master_seed, *key)``."""
    entropy = [int(master_seed)] + [int(k) for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


# ------------------------- Moments and calibration -------------------------


def _calibration_counts(d: int, resolution: Optional[int]) -> int:
    if resolution:
        return int(resolution)
    return CALIBRATION_RESOLUTION.get(d, CALIBRATION_RESOLUTION_FALLBACK)


def expected_sum(
    fn: Callable[[np.ndarray], np.ndarray],
    spec: ProcessSpec,
    w: Window,
    resolution: Optional[int] = None,
) -> np.ndarray:
    """Campbell integral of ``fn`` against the intensity over ``w``."""
    counts = _calibration_counts(w.d, resolution)

    def integrand(nodes: np.ndarray) -> np.ndarray:
        rho = spec.intensity(nodes)
        vals = np.asarray(fn(nodes), dtype=float)
        return vals * rho.reshape((-1,) + (1,) * (vals.ndim - 1))

    return midpoint_integral(integrand, w, counts)


def expected_count(spec: ProcessSpec, w: Window, resolution: Optional[int] = None) -> float:
    counts = _calibration_counts(w.d, resolution)
    return float(midpoint_integral(spec.intensity, w, counts))


def calibrate_beta(
    spec: ProcessSpec,
    w: Window,
    mu_star: float,
    resolution: Optional[int] = None,
) -> float:
    """beta giving ``mu_star`` expected points in ``w``; ``spec.beta`` is ignored."""
    if not mu_star > 0:
        raise ValueError(f"mu_star must be > 0, got {mu_star}")
    counts = _calibration_counts(w.d, resolution)
    theta = spec.theta_array
    mass = float(midpoint_integral(lambda x: np.exp(spec.covariate.log_linear(x, theta)), w, counts))
    beta = float(np.log(mu_star) - np.log(mass))
    logger.debug("calibrated beta=%.6f for %s on %s (mu*=%s)", beta, spec.name, w.to_dict(), mu_star)
    return beta


# ------------------------- Intensity bounds -------------------------


@lru_cache(maxsize=256)
def _max_log_linear_cached(
    covariate: CovariateField, theta: Tuple[float, ...], w: Window, resolution: int
) -> float:
    theta_arr = np.asarray(theta, dtype=float)
    if covariate.p == 0 or not np.any(theta_arr):
        return 0.0
    per_axis = max(2, min(resolution, int(np.floor(PROBE_NODE_CAP ** (1.0 / w.d)))))
    probe = regular_grid(w, per_axis)
    values = covariate.log_linear(probe.nodes, theta_arr)
    best = float(np.max(values))
    bounds = list(zip(w.lower, w.upper))

    def neg(x: np.ndarray) -> float:
        return -float(covariate.log_linear(x, theta_arr))

    for start in probe.nodes[np.argsort(values)[-5:]]:
        res = optimize.minimize(neg, start, method="L-BFGS-B", bounds=bounds)
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    logger.debug("max theta^T z on %s: %.6f (probe %s^%s)", w.to_dict(), best, per_axis, w.d)
    return best


def max_log_linear(
    covariate: CovariateField, theta, w: Window, resolution: Optional[int] = None
) -> float:
    """Maximum of theta^T z over ``w``: probe grid refined by bounded local searches."""
    res = int(resolution or get_settings().probe_resolution)
    key = tuple(float(t) for t in np.atleast_1d(np.asarray(theta, dtype=float)))
    return _max_log_linear_cached(covariate, key, w, res)


def _meta(spec: ProcessSpec, seed: Optional[int], **extra: Any) -> Dict[str, Any]:
    meta: Dict[str, Any] = {"process": spec.name, "kind": spec.kind, "seed": seed}
    meta.update(spec.parameters())
    meta.update(extra)
    return meta


# ------------------------- Poisson -------------------------


def simulate_poisson(
    spec: ProcessSpec,
    w: Window,
    rng: np.random.Generator,
    probe_resolution: Optional[int] = None,
    seed: Optional[int] = None,
) -> PointPattern:
    """Inhomogeneous Poisson pattern by thinning a homogeneous proposal."""
    s_max = max_log_linear(spec.covariate, spec.theta, w, probe_resolution)
    lam_max = LAMBDA_SAFETY * np.exp(spec.beta + s_max)
    n_prop = rng.poisson(lam_max * volume(w))
    proposals = uniform_sample(w, rng, size=n_prop)
    rho = spec.intensity(proposals) if n_prop else np.zeros(0)
    if np.any(rho > lam_max):
        raise BoundViolation(
            f"intensity {float(np.max(rho)):.6g} exceeds thinning bound {lam_max:.6g}; "
            "increase the probe resolution"
        )
    keep = rng.uniform(size=n_prop) < rho / lam_max
    return PointPattern(proposals[keep], w, _meta(spec, seed, lambda_max=float(lam_max)))


# ------------------------- Log-Gaussian Cox -------------------------


@lru_cache(maxsize=2)
def _covariance_factor(w: Window, counts: Tuple[int, ...], sigma2: float, alpha: float) -> np.ndarray:
    grid = Grid(w, counts)
    cov = sigma2 * np.exp(-cdist(grid.nodes, grid.nodes) / alpha)
    cov[np.diag_indices_from(cov)] += CHOLESKY_JITTER
    try:
        factor = linalg.cholesky(cov, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise CholeskyFailure(
            f"field covariance on {counts} grid (sigma2={sigma2}, alpha={alpha}) is not positive definite"
        ) from exc
    logger.debug("cached Cholesky factor for %s nodes", grid.size)
    return factor


def _field_grid(w: Window, field_grid_counts: Union[int, Sequence[int], None]) -> Grid:
    counts = field_grid_counts or get_settings().lgcp_grid
    return regular_grid(w, counts)


def sample_gaussian_field(
    spec: ProcessSpec,
    grid: Grid,
    rng: np.random.Generator,
) -> np.ndarray:
    """One draw of Y at the grid nodes: mean beta + theta^T z - sigma2/2, exponential covariance."""
    if spec.kind != "lgcp":
        raise ValueError(f"gaussian field needs an lgcp spec, got '{spec.kind}'")
    factor = _covariance_factor(grid.window, grid.counts, float(spec.sigma2), float(spec.alpha))
    residual = factor @ rng.standard_normal(grid.size)
    return spec.log_intensity(grid.nodes) - 0.5 * spec.sigma2 + residual


def _points_in_cells(grid: Grid, cells: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    multi = np.stack(np.unravel_index(cells, grid.counts), axis=-1)
    corner = grid.window.lower_array + grid.spacing * multi
    return corner + grid.spacing * rng.uniform(size=corner.shape)


def simulate_lgcp(
    spec: ProcessSpec,
    w: Window,
    rng: np.random.Generator,
    field_grid_counts: Union[int, Sequence[int], None] = None,
    exact_trend: bool = True,
    probe_resolution: Optional[int] = None,
    seed: Optional[int] = None,
) -> PointPattern:
    """LGCP pattern with the Gaussian field on a regular grid.

    With ``exact_trend`` the residual field is constant per cell but the
    log-linear trend is applied at each point by thinning; otherwise exp(Y) is
    used as a piecewise-constant intensity.
    """
    grid = _field_grid(w, field_grid_counts)
    y = sample_gaussian_field(spec, grid, rng)
    if not exact_trend:
        counts = rng.poisson(np.exp(y) * grid.cell_volume)
        cells = np.repeat(np.arange(grid.size), counts)
        pts = _points_in_cells(grid, cells, rng)
        return PointPattern(pts, w, _meta(spec, seed, field_grid=list(grid.counts), exact_trend=False))

    residual = y - spec.log_intensity(grid.nodes) + 0.5 * spec.sigma2
    s_bound = max_log_linear(spec.covariate, spec.theta, w, probe_resolution) + np.log(LAMBDA_SAFETY)
    cell_rate = np.exp(spec.beta - 0.5 * spec.sigma2 + residual + s_bound) * grid.cell_volume
    counts = rng.poisson(cell_rate)
    cells = np.repeat(np.arange(grid.size), counts)
    pts = _points_in_cells(grid, cells, rng)
    if pts.shape[0]:
        s = spec.covariate.log_linear(pts, spec.theta_array)
        if np.any(s > s_bound):
            raise BoundViolation("log-linear trend exceeds its probe bound; increase the probe resolution")
        keep = rng.uniform(size=pts.shape[0]) < np.exp(s - s_bound)
        pts = pts[keep]
    return PointPattern(pts, w, _meta(spec, seed, field_grid=list(grid.counts), exact_trend=True))


# ------------------------- Thomas -------------------------


def simulate_thomas(
    spec: ProcessSpec,
    w: Window,
    rng: np.random.Generator,
    dilation: Optional[float] = None,
    probe_resolution: Optional[int] = None,
    seed: Optional[int] = None,
    return_parents: bool = False,
):
    """Thomas pattern with log-linear first-order intensity.

    Parents form a homogeneous Poisson process of intensity kappa on ``w``
    dilated by ``dilation * sigma``; each parent gets Poisson(exp(beta + s_max) /
    kappa) Gaussian offspring, thinned by exp(theta^T z - s_max) and clipped to
    ``w``.
    """
    kappa, sigma = float(spec.kappa), float(spec.sigma)
    reach = (dilation if dilation is not None else get_settings().thomas_dilation) * sigma
    parent_window = dilate(w, reach)
    parents = uniform_sample(parent_window, rng, size=rng.poisson(kappa * volume(parent_window)))
    s_bound = max_log_linear(spec.covariate, spec.theta, w, probe_resolution) + np.log(LAMBDA_SAFETY)
    per_parent = rng.poisson(np.exp(spec.beta + s_bound) / kappa, size=parents.shape[0])
    centres = np.repeat(parents, per_parent, axis=0)
    offspring = centres + sigma * rng.standard_normal(centres.shape)
    if offspring.shape[0]:
        offspring = offspring[np.asarray(contains(w, offspring), dtype=bool)]
    if offspring.shape[0]:
        s = spec.covariate.log_linear(offspring, spec.theta_array)
        if np.any(s > s_bound):
            raise BoundViolation("log-linear trend exceeds its probe bound; increase the probe resolution")
        keep = rng.uniform(size=offspring.shape[0]) < np.exp(s - s_bound)
        offspring = offspring[keep]
    pattern = PointPattern(offspring, w, _meta(spec, seed, n_parents=int(parents.shape[0])))
    if return_parents:
        return pattern, parents
    return pattern


def simulate(spec: ProcessSpec, w: Window, rng: np.random.Generator, **kwargs: Any) -> PointPattern:
    """Dispatch on ``spec.kind``."""
    if spec.kind == "poisson":
        return simulate_poisson(spec, w, rng, **kwargs)
    if spec.kind == "lgcp":
        return simulate_lgcp(spec, w, rng, **kwargs)
    return simulate_thomas(spec, w, rng, **kwargs)


__all__ = [
    "PointPattern",
    "ProcessSpec",
    "process_preset",
    "replication_rng",
    "expected_count",
    "expected_sum",
    "calibrate_beta",
    "max_log_linear",
    "sample_gaussian_field",
    "simulate_poisson",
    "simulate_lgcp",
    "simulate_thomas",
    "simulate",
]
