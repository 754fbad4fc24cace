"""Dimension scaling, timing and grid-sampled covariate studies."""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..covariate import GridCovariate, builtin, model_theta
from ..errors import VareError
from ..estimate import DIV_Z, Quadrature, TestFunction, mcle, mcle_berman_turner, vare
from ..geometry import Window, regular_grid
from ..simulate import calibrate_beta, process_preset
from .experiment import chunk_bounds, map_chunks, run_experiment, simulate_replication, timed
from .models import ExperimentConfig, ResultRow, block_median_time

logger = logging.getLogger(__name__)

# Stream tags keep the studies' replications apart from table cells.
_SCALING_STREAM = 101
_LOCAL_STREAM = 202


def dummy_grid_counts(tau: float, mu_star: float, d: int) -> int:
    """Per-axis count of a systematic grid with about ``tau * mu_star`` nodes."""
    return max(1, int(round((tau * mu_star) ** (1.0 / d))))


# ------------------------- Dimension scaling and timing -------------------------


def _scaling_chunk(
    d: int,
    tau_list: Sequence[float],
    mu_star: float,
    beta: float,
    seed: int,
    start: int,
    stop: int,
) -> List[Dict[str, Any]]:
    covariate = builtin("sine", d)
    window = Window.square(-1.0, 1.0, d)
    spec = process_preset("poisson", covariate, model_theta("sine", d), beta=beta)
    h = TestFunction(DIV_Z, covariate)
    grids = {tau: regular_grid(window, dummy_grid_counts(tau, mu_star, d)) for tau in tau_list}
    out: List[Dict[str, Any]] = []
    for r in range(start, stop):
        try:
            pattern = simulate_replication(spec, window, seed, (_SCALING_STREAM, d, r))
        except VareError as exc:
            logger.warning("replication %s skipped: %s", r, exc)
            continue
        theta, seconds = timed(lambda: vare(pattern, covariate, h).theta_hat)
        record: Dict[str, Any] = {"r": r, "n": pattern.n, "vare": theta, "vare_time": seconds, "mcle": {}, "mcle_time": {}}
        for tau, grid in grids.items():
            est, secs = timed(lambda: mcle_berman_turner(pattern, covariate, grid).theta_hat)
            record["mcle"][tau] = est
            record["mcle_time"][tau] = secs
        out.append(record)
    return out


def _scaling_records(
    d_list: Sequence[int],
    tau_list: Sequence[float],
    mu_star: float,
    R: int,
    seed: int,
    workers: int,
) -> Dict[int, List[Dict[str, Any]]]:
    results: Dict[int, List[Dict[str, Any]]] = {}
    for d in d_list:
        covariate = builtin("sine", d)
        window = Window.square(-1.0, 1.0, d)
        beta = calibrate_beta(process_preset("poisson", covariate, model_theta("sine", d)), window, mu_star)
        logger.info("Scaling d=%s mu*=%s beta=%.4f R=%s taus=%s", d, mu_star, beta, R, list(tau_list))
        jobs = [(d, list(tau_list), mu_star, beta, seed, a, b) for a, b in chunk_bounds(R, workers)]
        records = [rec for chunk in map_chunks(_scaling_chunk, jobs, workers) for rec in chunk]
        results[d] = sorted(records, key=lambda rec: rec["r"])
    return results


def _amse(estimates: List[Optional[List[float]]], truth: np.ndarray) -> float:
    ok = [e for e in estimates if e is not None]
    if not ok:
        return float("nan")
    return float(np.mean((np.asarray(ok) - truth) ** 2))


def run_dimension_scaling(
    d_list: Sequence[int],
    tau_list: Sequence[float],
    mu_star: float = 2000.0,
    R: int = 200,
    seed: int = 20240101,
    workers: int = 1,
) -> pd.DataFrame:
    """AMSE of MCLE over AMSE of VARE for the sine model, per (d, tau).

    The MCLE uses point-augmented quadrature on a systematic grid of about
    ``tau * mu_star`` dummy nodes.
    """
    records = _scaling_records(d_list, tau_list, mu_star, R, seed, workers)
    rows = []
    for d, recs in records.items():
        truth = model_theta("sine", d)
        amse_vare = _amse([rec["vare"] for rec in recs], truth)
        for tau in tau_list:
            amse_mcle = _amse([rec["mcle"][tau] for rec in recs], truth)
            rows.append(
                {
                    "d": d,
                    "tau": float(tau),
                    "n_dummy": dummy_grid_counts(tau, mu_star, d) ** d,
                    "amse_vare": amse_vare,
                    "amse_mcle": amse_mcle,
                    "ratio": amse_mcle / amse_vare,
                }
            )
    return pd.DataFrame(rows, columns=["d", "tau", "n_dummy", "amse_vare", "amse_mcle", "ratio"])


def run_timing(
    d_list: Sequence[int],
    tau_list: Sequence[float],
    R: int,
    mu_star: float = 2000.0,
    seed: int = 20240101,
    workers: int = 1,
) -> pd.DataFrame:
    """Mean wall time per estimate; VARE rows carry ``tau = NaN``.

    MCLE times include building the point-augmented quadrature.
    """
    records = _scaling_records(d_list, tau_list, mu_star, R, seed, workers)
    rows = []
    for d, recs in records.items():
        rows.append(
            {
                "d": d,
                "estimator": "vare",
                "tau": float("nan"),
                "mean_time_s": block_median_time([rec["vare_time"] for rec in recs]),
            }
        )
        for tau in tau_list:
            rows.append(
                {
                    "d": d,
                    "estimator": "mcle",
                    "tau": float(tau),
                    "mean_time_s": block_median_time([rec["mcle_time"][tau] for rec in recs]),
                }
            )
    return pd.DataFrame(rows, columns=["d", "estimator", "tau", "mean_time_s"])


# ------------------------- Grid-sampled covariates -------------------------


def _local_chunk(
    cfg_data: Dict[str, Any],
    window_index: int,
    beta: float,
    start: int,
    stop: int,
) -> List[Tuple[int, str, Optional[List[float]], float]]:
    cfg = ExperimentConfig.model_validate(cfg_data)
    covariate = builtin("2", 2)
    window = cfg.window_objects()[window_index]
    spec = process_preset("poisson", covariate, cfg.true_theta(), beta=beta)
    h = TestFunction(DIV_Z, covariate)
    sampled = {}
    for n in cfg.grid_sizes:
        grid = regular_grid(window, n)
        gc = GridCovariate.sample(covariate, grid)
        sampled[n] = (grid, gc, TestFunction(DIV_Z, gc))
    out = []
    for r in range(start, stop):
        try:
            pattern = simulate_replication(spec, window, cfg.seed, (_LOCAL_STREAM, window_index, r))
        except VareError as exc:
            logger.warning("replication %s skipped: %s", r, exc)
            continue
        theta, secs = timed(lambda: vare(pattern, covariate, h).theta_hat)
        out.append((r, "vare", theta, secs))
        for n, (grid, gc, h_loc) in sampled.items():
            theta, secs = timed(lambda: vare(pattern, gc, h_loc).theta_hat)
            out.append((r, f"vare_loc_{n}", theta, secs))
            theta, secs = timed(lambda: mcle(pattern, covariate, grid).theta_hat)
            out.append((r, f"mcle_{n}", theta, secs))
            theta, secs = timed(
                lambda: mcle(pattern, covariate, Quadrature.subset(grid, gc.stencil_nodes(pattern.points))).theta_hat
            )
            out.append((r, f"mcle_loc_{n}", theta, secs))
    return out


def run_local_covariate(cfg: ExperimentConfig, workers: Optional[int] = None) -> List[ResultRow]:
    """VARE, VARE(loc), MCLE and MCLE(loc) for planar model 2 with z known on grids."""
    workers = workers or cfg.workers
    covariate = builtin("2", 2)
    theta_true = cfg.true_theta()
    cfg_data = cfg.model_dump(mode="json")
    rows: List[ResultRow] = []
    for wi, window in enumerate(cfg.window_objects()):
        mu = cfg.mu_for(wi)
        beta = calibrate_beta(process_preset("poisson", covariate, theta_true), window, mu)
        logger.info("Grid-sampled study window=%s mu*=%s grids=%s", window.to_dict(), mu, cfg.grid_sizes)
        jobs = [(cfg_data, wi, beta, a, b) for a, b in chunk_bounds(cfg.replications, workers)]
        records = sorted(
            (rec for chunk in map_chunks(_local_chunk, jobs, workers) for rec in chunk),
            key=lambda rec: rec[0],
        )
        labels = ["vare"] + [f"{kind}_{n}" for n in cfg.grid_sizes for kind in ("vare_loc", "mcle", "mcle_loc")]
        for label in labels:
            mine = [rec for rec in records if rec[1] == label and rec[2] is not None]
            rows.append(
                ResultRow.from_estimates(
                    model="2",
                    process="poisson",
                    window=window,
                    estimator=label,
                    eps=0.0,
                    attempted=cfg.replications,
                    theta_true=theta_true,
                    estimates=[rec[2] for rec in mine],
                    times=[rec[3] for rec in mine],
                )
            )
    return rows


def run_study(cfg: ExperimentConfig, workers: Optional[int] = None):
    """Dispatch on ``cfg.study``: rows for table/local, a DataFrame for scaling/timing."""
    workers = workers or cfg.workers
    if cfg.study == "table":
        return run_experiment(cfg, workers)
    if cfg.study == "local":
        return run_local_covariate(cfg, workers)
    if cfg.study == "scaling":
        return run_dimension_scaling(cfg.d_list, cfg.tau_list, cfg.mu_for(0), cfg.replications, cfg.seed, workers)
    return run_timing(cfg.d_list, cfg.tau_list, cfg.replications, cfg.mu_for(0), cfg.seed, workers)


__all__ = [
    "dummy_grid_counts",
    "run_dimension_scaling",
    "run_timing",
    "run_local_covariate",
    "run_study",
]
