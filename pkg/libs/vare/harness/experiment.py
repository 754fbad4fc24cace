"""Replication runner for estimator comparison tables.

Each (process, window) cell simulates ``R`` patterns and applies every
configured estimator to the same patterns. Replication ``r`` always draws from
``replication_rng(seed, process_index, window_index, r)`` and chunks are
reassembled by replication index, so results do not depend on the number of
workers.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..covariate import CovariateField, builtin
from ..errors import BoundViolation, VareError
from ..estimate import make_test_function, mcle, vare
from ..geometry import Window, regular_grid
from ..simulate import PointPattern, ProcessSpec, calibrate_beta, process_preset, replication_rng, simulate
from .models import EstimatorSpec, ExperimentConfig, ResultRow

logger = logging.getLogger(__name__)

# Fresh substreams tried when a thinning bound is exceeded.
SIMULATION_ATTEMPTS = 3

Estimator = Callable[[PointPattern], np.ndarray]

# (replication index, estimator index, estimate or None, seconds)
Record = Tuple[int, int, Optional[List[float]], float]


def chunk_bounds(total: int, workers: int) -> List[Tuple[int, int]]:
    """Contiguous ``[start, stop)`` ranges covering ``range(total)``."""
    parts = max(1, min(workers, total))
    edges = np.linspace(0, total, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def map_chunks(fn: Callable[..., List[Any]], jobs: Sequence[Tuple[Any, ...]], workers: int) -> List[List[Any]]:
    """Run ``fn(*job)`` for every job, in order; in a process pool when ``workers > 1``."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def build_estimator(spec: EstimatorSpec, covariate: CovariateField, window: Window) -> Estimator:
    if spec.method == "mcle":
        grid = regular_grid(window, spec.grid)
        return lambda pattern: mcle(pattern, covariate, grid).theta_hat
    h = make_test_function(spec.test_fn, covariate, window, spec.resolve_eps(window))
    return lambda pattern: vare(pattern, covariate, h).theta_hat


def simulate_replication(
    spec: ProcessSpec,
    window: Window,
    seed: int,
    key: Tuple[int, ...],
    lgcp_grid: Optional[int] = None,
) -> PointPattern:
    """Simulate replication ``key``; retries on a fresh substream after a bound violation."""
    kwargs: Dict[str, Any] = {}
    if spec.kind == "lgcp" and lgcp_grid:
        kwargs["field_grid_counts"] = lgcp_grid
    for attempt in range(SIMULATION_ATTEMPTS):
        rng = replication_rng(seed, *key, attempt) if attempt else replication_rng(seed, *key)
        try:
            return simulate(spec, window, rng, seed=seed, **kwargs)
        except BoundViolation as exc:
            logger.warning("replication %s attempt %s: %s", key, attempt, exc)
    raise BoundViolation(f"replication {key} exceeded the thinning bound {SIMULATION_ATTEMPTS} times")


def timed(fn: Callable[[], np.ndarray]) -> Tuple[Optional[List[float]], float]:
    """Run an estimator; failures become ``None``."""
    start = time.perf_counter()
    try:
        theta = fn()
        out: Optional[List[float]] = [float(v) for v in np.atleast_1d(theta)]
    except (VareError, np.linalg.LinAlgError) as exc:
        logger.debug("estimator failed: %s", exc)
        out = None
    return out, time.perf_counter() - start


def _cell_chunk(
    cfg_data: Dict[str, Any],
    process_index: int,
    window_index: int,
    beta: float,
    start: int,
    stop: int,
) -> List[Record]:
    cfg = ExperimentConfig.model_validate(cfg_data)
    covariate = builtin(cfg.model, cfg.d)
    window = cfg.window_objects()[window_index]
    spec = process_preset(cfg.processes[process_index], covariate, cfg.true_theta(), beta=beta)
    estimators = [build_estimator(e, covariate, window) for e in cfg.estimators]
    records: List[Record] = []
    for r in range(start, stop):
        try:
            pattern = simulate_replication(spec, window, cfg.seed, (process_index, window_index, r), cfg.lgcp_grid)
        except VareError as exc:
            logger.warning("replication %s skipped: %s", r, exc)
            records.extend((r, k, None, 0.0) for k in range(len(estimators)))
            continue
        for k, estimator in enumerate(estimators):
            theta, seconds = timed(lambda: estimator(pattern))
            records.append((r, k, theta, seconds))
    return records


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> List[ResultRow]:
    """Table study: one ResultRow per (process, window, estimator)."""
    workers = workers or cfg.workers
    covariate = builtin(cfg.model, cfg.d)
    theta_true = cfg.true_theta()
    cfg_data = cfg.model_dump(mode="json")
    rows: List[ResultRow] = []
    for pi, process in enumerate(cfg.processes):
        for wi, window in enumerate(cfg.window_objects()):
            mu = cfg.mu_for(wi)
            spec = process_preset(process, covariate, theta_true)
            beta = calibrate_beta(spec, window, mu)
            logger.info(
                "Cell model=%s process=%s window=%s mu*=%s beta=%.4f R=%s",
                cfg.model, process, window.to_dict(), mu, beta, cfg.replications,
            )
            jobs = [(cfg_data, pi, wi, beta, a, b) for a, b in chunk_bounds(cfg.replications, workers)]
            records = [rec for chunk in map_chunks(_cell_chunk, jobs, workers) for rec in chunk]
            records.sort(key=lambda rec: (rec[0], rec[1]))
            for k, est in enumerate(cfg.estimators):
                mine = [rec for rec in records if rec[1] == k]
                estimates = [rec[2] for rec in mine if rec[2] is not None]
                failures = len(mine) - len(estimates)
                if failures:
                    logger.warning("%s: %s of %s fits failed", est.display_label(), failures, len(mine))
                rows.append(
                    ResultRow.from_estimates(
                        model=cfg.model,
                        process=process,
                        window=window,
                        estimator=est.display_label(),
                        eps=est.resolve_eps(window),
                        attempted=cfg.replications,
                        theta_true=theta_true,
                        estimates=estimates,
                        times=[rec[3] for rec in mine if rec[2] is not None],
                    )
                )
            logger.info("Cell process=%s window=%s done", process, window.to_dict())
    return rows


__all__ = [
    "chunk_bounds",
    "map_chunks",
    "build_estimator",
    "simulate_replication",
    "run_experiment",
]
