"""Estimators of theta for log-linear intensities.

The variational estimator solves ``A theta = -b`` with

    A = sum_{u in x} h(u) div z(u)^T,     b = sum_{u in x} div h(u),

for a test function ``h``. The composite-likelihood estimator maximises the
Poisson log-likelihood with the intensity integral replaced by a quadrature.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg, special, stats

from .constants import GLM_DEVIANCE_TOL, GLM_MAX_ITER, MCLE_GRAD_TOL, MCLE_MAX_ITER, SINE_FREQUENCY
from .covariate import CovariateField
from .errors import Degenerate, Nonconvergence, SingularSystem
from .geometry import Grid, Window, midpoint_integral, regular_grid, volume
from .mollifier import Mollifier
from .settings import get_settings
from .simulate import PointPattern

logger = logging.getLogger(__name__)

DIV_Z = "div-z"
ETA_DIV_Z = "eta-div-z"
Z = "z"
ETA_Z = "eta-z"
TEST_FUNCTIONS = (DIV_Z, ETA_DIV_Z, Z, ETA_Z)

_ALIASES = {
    "divz": DIV_Z,
    "div_z": DIV_Z,
    "etadivz": ETA_DIV_Z,
    "eta_div_z": ETA_DIV_Z,
    "etaz": ETA_Z,
    "eta_z": ETA_Z,
}

PatternLike = Union[PointPattern, np.ndarray]


def _points(x: PatternLike, d: int) -> np.ndarray:
    pts = x.points if isinstance(x, PointPattern) else np.asarray(x, dtype=float)
    if pts.size == 0:
        return np.zeros((0, d))
    return np.atleast_2d(pts)


def normalise_test_kind(kind: str) -> str:
    key = kind.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in TEST_FUNCTIONS:
        raise ValueError(f"unknown test function '{kind}', expected one of {TEST_FUNCTIONS}")
    return key


# ------------------------- Test functions -------------------------


@dataclass(frozen=True)
class TestFunction:
    """h = k or h = eta * k with k in {div z, z}."""

    __test__ = False  # not a pytest class

    kind: str
    covariate: CovariateField
    mollifier: Optional[Mollifier] = None

    def __post_init__(self) -> None:
        kind = normalise_test_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.mollified and self.mollifier is None:
            raise ValueError(f"test function '{kind}' needs a mollifier")
        if not self.mollified and self.mollifier is not None:
            raise ValueError(f"test function '{kind}' takes no mollifier")

    @property
    def mollified(self) -> bool:
        return self.kind in (ETA_DIV_Z, ETA_Z)

    @property
    def epsilon(self) -> float:
        return self.mollifier.epsilon if self.mollifier is not None else 0.0

    @property
    def p(self) -> int:
        return self.covariate.p

    def evaluate(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """``(h, div h)``, each of shape ``(n, p)``."""
        pts = _points(points, self.covariate.d)
        if self.kind in (DIV_Z, ETA_DIV_Z):
            k, div_k = self.covariate.div(pts), self.covariate.div_div(pts)
        else:
            k, div_k = self.covariate.value(pts), self.covariate.div(pts)
        if not self.mollified:
            return k, div_k
        eta, div_eta = self.mollifier.evaluate(pts)
        return eta[:, None] * k, eta[:, None] * div_k + k * div_eta[:, None]


def make_test_function(
    kind: str,
    covariate: CovariateField,
    window: Optional[Window] = None,
    epsilon: float = 0.0,
    resolution: Optional[int] = None,
) -> TestFunction:
    """Build ``h``; an eta variant with ``epsilon == 0`` falls back to the plain kind."""
    kind = normalise_test_kind(kind)
    if kind in (ETA_DIV_Z, ETA_Z):
        if epsilon <= 0:
            return TestFunction(DIV_Z if kind == ETA_DIV_Z else Z, covariate)
        if window is None:
            raise ValueError("mollified test functions need the observation window")
        return TestFunction(kind, covariate, Mollifier(window, float(epsilon), resolution or 0))
    return TestFunction(kind, covariate)


# ------------------------- Variational estimator -------------------------


@dataclass
class VareResult:
    theta_hat: np.ndarray
    A: np.ndarray
    b: np.ndarray
    condition_number: float
    n: int
    covariance: Optional[np.ndarray] = None

    def standard_errors(self) -> np.ndarray:
        if self.covariance is None:
            raise ValueError("no covariance attached; call vare(..., covariance=True)")
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def wald_intervals(self, level: float = 0.95) -> np.ndarray:
        """``(p, 2)`` array of lower/upper normal-approximation bounds."""
        if not 0 < level < 1:
            raise ValueError(f"level must be in (0, 1), got {level}")
        z = stats.norm.ppf(0.5 + level / 2.0)
        se = self.standard_errors()
        return np.stack([self.theta_hat - z * se, self.theta_hat + z * se], axis=-1)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "theta_hat": self.theta_hat.tolist(),
            "condition_number": float(self.condition_number),
            "n": self.n,
        }
        if self.covariance is not None:
            out["standard_errors"] = self.standard_errors().tolist()
        return out


def _assemble(pts: np.ndarray, z: CovariateField, h: TestFunction):
    hv, div_h = h.evaluate(pts)
    div_z = z.div(pts)
    return hv, div_h, div_z


def build_A(x: PatternLike, z: CovariateField, h: TestFunction) -> np.ndarray:
    pts = _points(x, z.d)
    hv, _ = h.evaluate(pts)
    return hv.T @ z.div(pts)


def build_b(x: PatternLike, z: CovariateField, h: TestFunction) -> np.ndarray:
    pts = _points(x, z.d)
    _, div_h = h.evaluate(pts)
    return div_h.sum(axis=0)


def _check_solvable(A: np.ndarray, n: int, limit: float) -> float:
    p = A.shape[0]
    if n < p:
        raise SingularSystem(f"{n} points cannot identify {p} parameters")
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > limit:
        raise SingularSystem(f"estimating equation is singular (condition number {cond:.3g})")
    return cond


def _sandwich(A: np.ndarray, meat: np.ndarray) -> np.ndarray:
    lu = linalg.lu_factor(A)
    left = linalg.lu_solve(lu, meat)
    cov = linalg.lu_solve(lu, left.T).T
    return 0.5 * (cov + cov.T)


def vare(
    x: PatternLike,
    z: CovariateField,
    h: TestFunction,
    covariance: bool = False,
    condition_limit: Optional[float] = None,
) -> VareResult:
    """theta_hat = -A^{-1} b by pivoted LU."""
    if z.p < 1:
        raise ValueError("the variational estimator needs p >= 1")
    limit = condition_limit or get_settings().condition_limit
    pts = _points(x, z.d)
    hv, div_h, div_z = _assemble(pts, z, h)
    A = hv.T @ div_z
    b = div_h.sum(axis=0)
    cond = _check_solvable(A, pts.shape[0], limit)
    theta_hat = linalg.lu_solve(linalg.lu_factor(A), -b)
    result = VareResult(theta_hat=theta_hat, A=A, b=b, condition_number=cond, n=int(pts.shape[0]))
    if covariance:
        f = hv * (div_z @ theta_hat)[:, None] + div_h
        result.covariance = _sandwich(A, f.T @ f)
    return result


def poisson_covariance(
    x: PatternLike,
    z: CovariateField,
    h: TestFunction,
    theta_hat,
    condition_limit: Optional[float] = None,
) -> np.ndarray:
    """Plug-in covariance of theta_hat for a Poisson process: S^-1 Sigma S^-T.

    S is estimated by A(x) and Sigma by the sum of f f^T with
    f(u) = h(u) div z(u)^T theta_hat + div h(u).
    """
    limit = condition_limit or get_settings().condition_limit
    pts = _points(x, z.d)
    hv, div_h, div_z = _assemble(pts, z, h)
    A = hv.T @ div_z
    _check_solvable(A, pts.shape[0], limit)
    theta = np.asarray(theta_hat, dtype=float).reshape(z.p)
    f = hv * (div_z @ theta)[:, None] + div_h
    return _sandwich(A, f.T @ f)


def model2_closed_form(x: PatternLike) -> np.ndarray:
    """Closed-form variational estimate for z = (sin 4 pi u1, sin 4 pi u2) with h = div z."""
    pts = _points(x, 2)
    k = SINE_FREQUENCY * np.pi
    cos = np.cos(k * pts)
    sin = np.sin(k * pts)
    return np.linalg.solve(cos.T @ cos, sin.sum(axis=0))


# ------------------------- Composite likelihood -------------------------


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Nodes and weights approximating the integral over the window."""

    nodes: np.ndarray
    weights: np.ndarray
    grid: Optional[Grid] = field(default=None, compare=False)
    n_data: int = 0

    def __post_init__(self) -> None:
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if nodes.shape[0] != weights.shape[0]:
            raise ValueError(f"{nodes.shape[0]} nodes but {weights.shape[0]} weights")
        if np.any(weights < 0):
            raise ValueError("quadrature weights must be non-negative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_grid(cls, grid: Grid) -> "Quadrature":
        return cls(grid.nodes, np.full(grid.size, grid.cell_volume), grid)

    @classmethod
    def subset(cls, grid: Grid, flat_indices) -> "Quadrature":
        """Selected grid nodes, each keeping the full-grid weight |W|/|G|."""
        idx = np.asarray(flat_indices, dtype=int)
        return cls(grid.nodes[idx], np.full(idx.size, grid.cell_volume), grid)

    @classmethod
    def berman_turner(cls, grid: Grid, points) -> "Quadrature":
        """Data points followed by the dummy nodes, weighted |cell| / (quadrature points in the cell).

        The data points come first so ``nodes[:n_data]`` is the pattern.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, grid.d)
        cells = np.concatenate([grid.flat_index(grid.nearest_index(pts)), np.arange(grid.size)])
        per_cell = np.bincount(cells, minlength=grid.size)
        nodes = np.vstack([pts, grid.nodes])
        return cls(nodes, grid.cell_volume / per_cell[cells], grid, n_data=pts.shape[0])

    @property
    def size(self) -> int:
        return int(self.weights.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass
class McleResult:
    beta_hat: float
    theta_hat: np.ndarray
    loglik: float
    iterations: int
    grid: Optional[Grid]
    n: int
    hessian_condition: float = float("nan")
    trace: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta_hat": float(self.beta_hat),
            "theta_hat": self.theta_hat.tolist(),
            "loglik": float(self.loglik),
            "iterations": self.iterations,
            "n": self.n,
        }


def _loglik(psi: np.ndarray, data_sum: np.ndarray, design: np.ndarray, weights: np.ndarray) -> float:
    with np.errstate(over="ignore"):
        val = float(data_sum @ psi - weights @ np.exp(design @ psi))
    return val if np.isfinite(val) else -np.inf


def mcle(
    x: PatternLike,
    z: CovariateField,
    grid: Union[Grid, Quadrature],
    max_iter: int = MCLE_MAX_ITER,
    tol: float = MCLE_GRAD_TOL,
) -> McleResult:
    """Maximise sum log rho(u) - sum_j w_j rho(v_j) over (beta, theta) by damped Newton."""
    quad = grid if isinstance(grid, Quadrature) else Quadrature.from_grid(grid)
    pts = _points(x, z.d)
    n = int(pts.shape[0])
    if n == 0:
        raise Degenerate("composite likelihood has no maximiser for an empty pattern")
    data = np.hstack([np.ones((n, 1)), z.value(pts)])
    design = np.hstack([np.ones((quad.size, 1)), z.value(quad.nodes)])
    data_sum = data.sum(axis=0)
    weights = quad.weights

    psi = np.zeros(design.shape[1])
    psi[0] = np.log(n / quad.total_weight)
    current = _loglik(psi, data_sum, design, weights)
    trace = [current]
    threshold = tol * (1.0 + n)
    iterations = 0
    neg_hess = np.eye(design.shape[1])
    while True:
        mass = weights * np.exp(design @ psi)
        grad = data_sum - design.T @ mass
        neg_hess = design.T @ (design * mass[:, None])
        if np.linalg.norm(grad) <= threshold:
            break
        if iterations >= max_iter:
            raise Nonconvergence(f"Newton did not converge in {max_iter} iterations (|grad|={np.linalg.norm(grad):.3g})")
        try:
            step = linalg.solve(neg_hess, grad, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as exc:
            raise Degenerate("quadrature design is rank deficient") from exc
        t = 1.0
        for _ in range(60):
            candidate = psi + t * step
            value = _loglik(candidate, data_sum, design, weights)
            if value >= current - 1e-12 * abs(current):
                break
            t *= 0.5
        else:
            raise Nonconvergence("line search failed to increase the composite likelihood")
        psi, current = candidate, value
        trace.append(current)
        iterations += 1

    logger.debug("mcle converged in %s iterations (n=%s, nodes=%s)", iterations, n, quad.size)
    return McleResult(
        beta_hat=float(psi[0]),
        theta_hat=psi[1:].copy(),
        loglik=current,
        iterations=iterations,
        grid=quad.grid,
        n=n,
        hessian_condition=float(np.linalg.cond(neg_hess)),
        trace=trace,
    )


def _poisson_deviance(y: np.ndarray, mu: np.ndarray, weights: np.ndarray) -> float:
    return float(2.0 * weights @ (special.xlogy(y, y / mu) - (y - mu)))


def mcle_berman_turner(
    x: PatternLike,
    z: CovariateField,
    grid: Grid,
    max_iter: int = GLM_MAX_ITER,
    tol: float = GLM_DEVIANCE_TOL,
) -> McleResult:
    """Composite likelihood fitted as a weighted Poisson regression on data plus dummy points.

    The quadrature is ``Quadrature.berman_turner(grid, x)``. Responses are
    ``y_j = 1{data} / w_j`` with prior weights ``w_j``; iteratively reweighted
    least squares starts from ``mu = y + 0.1`` and stops when the relative
    change in deviance falls below ``tol``. The maximiser is the one ``mcle``
    finds on the same quadrature.
    """
    pts = _points(x, z.d)
    n = int(pts.shape[0])
    if n == 0:
        raise Degenerate("composite likelihood has no maximiser for an empty pattern")
    quad = Quadrature.berman_turner(grid, pts)
    weights = quad.weights
    design = np.hstack([np.ones((quad.size, 1)), z.value(quad.nodes)])
    data_sum = design[:n].sum(axis=0)
    y = np.zeros(quad.size)
    y[:n] = 1.0 / weights[:n]

    mu = y + 0.1
    eta = np.log(mu)
    deviance = _poisson_deviance(y, mu, weights)
    psi = np.zeros(design.shape[1])
    trace: List[float] = []
    iterations = 0
    while True:
        if iterations >= max_iter:
            raise Nonconvergence(f"IRLS did not converge in {max_iter} iterations")
        root = np.sqrt(weights * mu)
        psi, _, rank, _ = linalg.lstsq(design * root[:, None], (eta + (y - mu) / mu) * root, check_finite=False)
        if rank < design.shape[1]:
            raise Degenerate("quadrature design is rank deficient")
        eta = design @ psi
        with np.errstate(over="ignore"):
            mu = np.exp(eta)
        if not np.all(np.isfinite(mu)):
            raise Nonconvergence("IRLS diverged")
        iterations += 1
        previous, deviance = deviance, _poisson_deviance(y, mu, weights)
        trace.append(_loglik(psi, data_sum, design, weights))
        if abs(deviance - previous) / (abs(deviance) + 0.1) < tol:
            break

    logger.debug("berman-turner fit converged in %s iterations (n=%s, nodes=%s)", iterations, n, quad.size)
    neg_hess = design.T @ (design * (weights * mu)[:, None])
    return McleResult(
        beta_hat=float(psi[0]),
        theta_hat=psi[1:].copy(),
        loglik=trace[-1],
        iterations=iterations,
        grid=grid,
        n=n,
        hessian_condition=float(np.linalg.cond(neg_hess)),
        trace=trace,
    )


# ------------------------- Condition checks -------------------------


def _check_counts(w: Window, resolution: Optional[int]) -> int:
    if resolution:
        return int(resolution)
    return {1: 4096, 2: 256, 3: 48}.get(w.d, 16)


def _intensity(z: CovariateField, beta: float, theta: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    return np.exp(beta + z.log_linear(nodes, theta))


def check_condition_ii(
    z: CovariateField, h: TestFunction, w: Window, resolution: Optional[int] = None
) -> Dict[str, float]:
    """Sup-norm estimates of z, div z, h and div h over grid nodes of ``w``."""
    nodes = regular_grid(w, _check_counts(w, resolution)).nodes
    hv, div_h = h.evaluate(nodes)
    return {
        "z": float(np.max(np.abs(z.value(nodes)), initial=0.0)),
        "div_z": float(np.max(np.abs(z.div(nodes)), initial=0.0)),
        "h": float(np.max(np.abs(hv), initial=0.0)),
        "div_h": float(np.max(np.abs(div_h), initial=0.0)),
    }


def check_condition_iii(
    z: CovariateField,
    h: TestFunction,
    w: Window,
    beta: float,
    theta,
    resolution: Optional[int] = None,
) -> float:
    """Smallest eigenvalue of the symmetrised S/|W|, S = int h div z^T rho."""
    theta = np.asarray(theta, dtype=float).reshape(z.p)

    def integrand(nodes: np.ndarray) -> np.ndarray:
        hv, _ = h.evaluate(nodes)
        rho = _intensity(z, beta, theta, nodes)
        return np.einsum("ni,nj,n->nij", hv, z.div(nodes), rho)

    S = midpoint_integral(integrand, w, _check_counts(w, resolution), chunk_size=20_000)
    sym = 0.5 * (S + S.T)
    return float(np.min(np.linalg.eigvalsh(sym)) / volume(w))


def check_condition_vi_poisson(
    z: CovariateField,
    h: TestFunction,
    w: Window,
    beta: float,
    theta,
    resolution: Optional[int] = None,
) -> float:
    """Smallest eigenvalue of Sigma/|W| for a Poisson process, Sigma = int f f^T rho."""
    theta = np.asarray(theta, dtype=float).reshape(z.p)

    def integrand(nodes: np.ndarray) -> np.ndarray:
        hv, div_h = h.evaluate(nodes)
        f = hv * (z.div(nodes) @ theta)[:, None] + div_h
        rho = _intensity(z, beta, theta, nodes)
        return np.einsum("ni,nj,n->nij", f, f, rho)

    sigma = midpoint_integral(integrand, w, _check_counts(w, resolution), chunk_size=20_000)
    return float(np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))) / volume(w))


__all__ = [
    "DIV_Z",
    "ETA_DIV_Z",
    "Z",
    "ETA_Z",
    "TEST_FUNCTIONS",
    "TestFunction",
    "make_test_function",
    "normalise_test_kind",
    "VareResult",
    "McleResult",
    "Quadrature",
    "build_A",
    "build_b",
    "vare",
    "poisson_covariance",
    "model2_closed_form",
    "mcle",
    "mcle_berman_turner",
    "check_condition_ii",
    "check_condition_iii",
    "check_condition_vi_poisson",
]
