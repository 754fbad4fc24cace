"""Pydantic models for experiment configs and result rows."""

from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..constants import EPS_FRACTION_DEFAULT, PROCESS_NAMES
from ..covariate import builtin, model_theta
from ..errors import UnknownModel
from ..estimate import TEST_FUNCTIONS, normalise_test_kind
from ..geometry import Window, format_window

METHODS = ("vare", "mcle")
STUDIES = ("table", "scaling", "timing", "local")


class WindowModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def _valid_box(self) -> "WindowModel":
        Window(tuple(self.lower), tuple(self.upper))
        return self

    def to_window(self) -> Window:
        return Window(tuple(self.lower), tuple(self.upper))

    @classmethod
    def from_window(cls, w: Window) -> "WindowModel":
        return cls(lower=list(w.lower), upper=list(w.upper))


class EstimatorSpec(BaseModel):
    """One estimator column of a results table."""

    model_config = ConfigDict(extra="forbid")

    method: Literal["vare", "mcle"]
    test_fn: str = Field("div-z", description="div-z, eta-div-z, z or eta-z (vare only).")
    eps: Optional[float] = Field(None, ge=0, description="Absolute smoothing width.")
    eps_fraction: Optional[float] = Field(None, ge=0, lt=0.25, description="Width as a fraction of the shortest side.")
    grid: int = Field(80, ge=1, description="Per-axis quadrature grid for mcle.")
    label: Optional[str] = None

    @field_validator("test_fn")
    @classmethod
    def _known_test_fn(cls, v: str) -> str:
        return normalise_test_kind(v)

    @model_validator(mode="after")
    def _one_eps(self) -> "EstimatorSpec":
        if self.eps is not None and self.eps_fraction is not None:
            raise ValueError("give either eps or eps_fraction, not both")
        return self

    @property
    def mollified(self) -> bool:
        return self.method == "vare" and self.test_fn.startswith("eta")

    def resolve_eps(self, window: Window) -> float:
        """Absolute width on ``window``; 5% of the shortest side when unspecified."""
        if not self.mollified:
            return 0.0
        if self.eps is not None:
            return float(self.eps)
        fraction = EPS_FRACTION_DEFAULT if self.eps_fraction is None else self.eps_fraction
        return float(fraction * np.min(window.sides))

    def display_label(self) -> str:
        if self.label:
            return self.label
        if self.method == "mcle":
            return f"mcle_{self.grid}"
        base = f"vare_{self.test_fn}"
        if not self.mollified:
            return base
        if self.eps is not None:
            return f"{base}_eps{self.eps:g}"
        fraction = EPS_FRACTION_DEFAULT if self.eps_fraction is None else self.eps_fraction
        return f"{base}_eps{100 * fraction:g}pct"


def _default_estimators() -> List[EstimatorSpec]:
    return [
        EstimatorSpec(method="vare", test_fn="div-z"),
        EstimatorSpec(method="vare", test_fn="eta-div-z", eps_fraction=EPS_FRACTION_DEFAULT),
        EstimatorSpec(method="mcle", grid=80),
    ]


class ExperimentConfig(BaseModel):
    """A replication study; ``study`` picks the runner."""

    model_config = ConfigDict(extra="forbid")

    study: Literal["table", "scaling", "timing", "local"] = "table"
    model: str = "2"
    d: int = Field(2, ge=1)
    theta: Optional[List[float]] = None
    processes: List[str] = Field(default_factory=lambda: ["poisson"])
    windows: List[WindowModel] = Field(
        default_factory=lambda: [WindowModel(lower=[-1.0, -1.0], upper=[1.0, 1.0])]
    )
    mu_star: List[float] = Field(default_factory=lambda: [200.0], description="One per window, or one for all.")
    replications: int = Field(1000, ge=1)
    estimators: List[EstimatorSpec] = Field(default_factory=_default_estimators)
    seed: int = Field(20240101, ge=0)
    workers: int = Field(1, ge=1)
    output: Optional[str] = None
    lgcp_grid: Optional[int] = Field(None, ge=2)
    d_list: List[int] = Field(default_factory=lambda: [2, 3])
    tau_list: List[float] = Field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0, 4.0, 10.0])
    grid_sizes: List[int] = Field(default_factory=lambda: [20, 40, 80])

    @field_validator("model")
    @classmethod
    def _known_model(cls, v: str) -> str:
        key = str(v).strip().lower()
        if key.startswith("sine"):
            return "sine"
        if key not in ("1", "2", "3", "4"):
            raise ValueError(f"unknown covariate model '{v}'")
        return key

    @field_validator("processes")
    @classmethod
    def _known_processes(cls, v: List[str]) -> List[str]:
        out = [p.strip().lower() for p in v]
        for p in out:
            if p not in PROCESS_NAMES:
                raise ValueError(f"unknown process '{p}', expected one of {PROCESS_NAMES}")
        return out

    @field_validator("mu_star", "tau_list")
    @classmethod
    def _positive(cls, v: List[float]) -> List[float]:
        if not v or any(x <= 0 for x in v):
            raise ValueError("values must be a non-empty list of positive numbers")
        return v

    @field_validator("d_list", "grid_sizes")
    @classmethod
    def _positive_ints(cls, v: List[int]) -> List[int]:
        if not v or any(x < 1 for x in v):
            raise ValueError("values must be a non-empty list of positive integers")
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if len(self.mu_star) not in (1, len(self.windows)):
            raise ValueError(f"mu_star needs 1 or {len(self.windows)} entries, got {len(self.mu_star)}")
        if self.study in ("table", "local"):
            try:
                field = builtin(self.model, self.d)
            except UnknownModel as exc:
                raise ValueError(str(exc)) from exc
            for wm in self.windows:
                if len(wm.lower) != self.d:
                    raise ValueError(f"window dimension {len(wm.lower)} does not match d={self.d}")
            if self.theta is not None and len(self.theta) != field.p:
                raise ValueError(f"theta needs {field.p} entries for model {self.model}")
        if self.study == "local" and (self.model != "2" or self.d != 2):
            raise ValueError("the grid-sampled covariate study uses planar model 2")
        return self

    def window_objects(self) -> List[Window]:
        return [wm.to_window() for wm in self.windows]

    def mu_for(self, index: int) -> float:
        return float(self.mu_star[0] if len(self.mu_star) == 1 else self.mu_star[index])

    def true_theta(self) -> np.ndarray:
        if self.theta is not None:
            return np.asarray(self.theta, dtype=float)
        if self.study == "local":
            return np.ones(2)
        return model_theta(self.model, self.d)


class ResultRow(BaseModel):
    """One (model, process, window, estimator) cell."""

    model: str
    process: str
    window: str
    estimator: str
    eps: float = 0.0
    R: int
    succeeded: int
    mse: List[float]
    amse: float
    mean_time_s: float
    estimates: List[List[float]] = Field(default_factory=list, description="Successful fits, in replication order.")

    @classmethod
    def from_estimates(
        cls,
        *,
        model: str,
        process: str,
        window: Window,
        estimator: str,
        eps: float,
        attempted: int,
        theta_true,
        estimates: List[List[float]],
        times: List[float],
    ) -> "ResultRow":
        truth = np.asarray(theta_true, dtype=float)
        if estimates:
            err = np.asarray(estimates, dtype=float) - truth
            mse = np.mean(err ** 2, axis=0)
        else:
            mse = np.full(truth.size, np.nan)
        return cls(
            model=model,
            process=process,
            window=format_window(window),
            estimator=estimator,
            eps=float(eps),
            R=int(attempted),
            succeeded=len(estimates),
            mse=[float(v) for v in mse],
            amse=float(np.mean(mse)),
            mean_time_s=block_median_time(times),
            estimates=[[float(v) for v in row] for row in estimates],
        )

    @property
    def failed(self) -> int:
        return self.R - self.succeeded


def block_median_time(times: List[float], blocks: int = 10) -> float:
    """Median of the means of up to ``blocks`` runs of consecutive timings."""
    if not times:
        return float("nan")
    chunks = np.array_split(np.asarray(times, dtype=float), min(blocks, len(times)))
    return float(np.median([c.mean() for c in chunks]))


__all__ = [
    "METHODS",
    "STUDIES",
    "TEST_FUNCTIONS",
    "WindowModel",
    "EstimatorSpec",
    "ExperimentConfig",
    "ResultRow",
    "block_median_time",
]
