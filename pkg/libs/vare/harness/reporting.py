"""CSV output for result rows and study tables."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from .models import ResultRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BASE_COLUMNS = ["model", "process", "window", "estimator", "eps", "R", "succeeded"]


def results_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    """Wide table: ``model,process,window,estimator,eps,R,succeeded,mse_1..mse_p,amse,mean_time_s``."""
    p = max((len(r.mse) for r in rows), default=1)
    mse_cols = [f"mse_{i + 1}" for i in range(p)]
    records = []
    for row in rows:
        rec = {col: getattr(row, col) for col in BASE_COLUMNS}
        for i, col in enumerate(mse_cols):
            rec[col] = row.mse[i] if i < len(row.mse) else float("nan")
        rec["amse"] = row.amse
        rec["mean_time_s"] = row.mean_time_s
        records.append(rec)
    return pd.DataFrame(records, columns=BASE_COLUMNS + mse_cols + ["amse", "mean_time_s"])


def write_results(rows: Sequence[ResultRow], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(rows).to_csv(path, index=False)
    logger.info("Wrote %s result rows to %s", len(rows), path)
    return path


def estimates_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    """Long table of the successful per-replication estimates behind each row."""
    records: List[dict] = []
    for row in rows:
        for k, est in enumerate(row.estimates):
            for i, value in enumerate(est):
                records.append(
                    {
                        "model": row.model,
                        "process": row.process,
                        "window": row.window,
                        "estimator": row.estimator,
                        "fit": k,
                        "coordinate": i + 1,
                        "estimate": value,
                    }
                )
    return pd.DataFrame(
        records, columns=["model", "process", "window", "estimator", "fit", "coordinate", "estimate"]
    )


def write_estimates(rows: Sequence[ResultRow], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    estimates_frame(rows).to_csv(path, index=False)
    return path


def ratio_table(df: pd.DataFrame) -> pd.DataFrame:
    """Pivot a scaling frame to d x tau ratios."""
    return df.pivot(index="d", columns="tau", values="ratio").sort_index()


def timing_table(df: pd.DataFrame) -> pd.DataFrame:
    """Pivot a timing frame to one row per d: vare time then mcle time per tau."""
    vare_time = df[df["estimator"] == "vare"].set_index("d")["mean_time_s"].rename("vare")
    mcle_time = df[df["estimator"] == "mcle"].pivot(index="d", columns="tau", values="mean_time_s")
    return pd.concat([vare_time, mcle_time], axis=1).sort_index()


def write_frame(df: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    logger.info("Wrote %s rows to %s", len(df), path)
    return path


__all__ = [
    "results_frame",
    "write_results",
    "estimates_frame",
    "write_estimates",
    "ratio_table",
    "timing_table",
    "write_frame",
]
