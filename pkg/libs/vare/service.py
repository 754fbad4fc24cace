"""Service functions shared by the command-line tools and the HTTP API.

Inputs are plain values (model ids, window objects, seeds) and outputs are
JSON-ready dictionaries; all numerical work is delegated to the library.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional

import numpy as np

from .covariate import builtin, model_theta
from .estimate import make_test_function, mcle, vare
from .geometry import Window, regular_grid
from .simulate import PointPattern, calibrate_beta, process_preset, replication_rng, simulate

logger = logging.getLogger(__name__)


def simulate_pattern(
    process: str,
    model: str,
    window: Window,
    mu_star: float,
    seed: int,
    d: Optional[int] = None,
) -> PointPattern:
    """Calibrate beta to ``mu_star`` and draw one pattern with the model's true theta."""
    dim = d or window.d
    covariate = builtin(model, dim)
    spec = process_preset(process, covariate, model_theta(model, dim))
    spec = spec.with_beta(calibrate_beta(spec, window, mu_star))
    pattern = simulate(spec, window, replication_rng(seed), seed=seed)
    logger.info("Simulated %s points (%s, model %s, mu*=%s, seed=%s)", pattern.n, process, model, mu_star, seed)
    return pattern


def estimate_pattern(
    pattern: PointPattern,
    model: str,
    method: str = "vare",
    test_fn: str = "div-z",
    eps: float = 0.0,
    grid: int = 80,
    ci: bool = False,
) -> Dict[str, Any]:
    """Fit theta on ``pattern``; the result dict follows the CSV column order."""
    covariate = builtin(model, pattern.window.d)
    if method == "mcle":
        fit = mcle(pattern, covariate, regular_grid(pattern.window, grid))
        return {
            "method": "mcle",
            "theta": fit.theta_hat.tolist(),
            "cond": fit.hessian_condition,
            "beta_hat": fit.beta_hat,
            "iterations": fit.iterations,
            "n": fit.n,
        }
    if method != "vare":
        raise ValueError(f"unknown method '{method}', expected vare or mcle")
    h = make_test_function(test_fn, covariate, pattern.window, eps)
    fit = vare(pattern, covariate, h, covariance=ci)
    out: Dict[str, Any] = {
        "method": "vare",
        "test_fn": h.kind,
        "eps": h.epsilon,
        "theta": fit.theta_hat.tolist(),
        "cond": fit.condition_number,
        "n": fit.n,
    }
    if ci:
        out["se"] = fit.standard_errors().tolist()
        out["ci95"] = fit.wald_intervals(0.95).tolist()
    return out


def result_csv_line(result: Dict[str, Any]) -> str:
    """``theta_1,..,theta_p,cond[,beta_hat][,se_1..se_p]``."""
    values = list(result["theta"]) + [result["cond"]]
    if "beta_hat" in result:
        values.append(result["beta_hat"])
    values.extend(result.get("se", []))
    return ",".join(f"{float(v):.10g}" for v in np.asarray(values, dtype=float))


__all__ = ["simulate_pattern", "estimate_pattern", "result_csv_line"]
