from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Dict, List, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, field_validator, model_validator

ROOT = Path(__file__).resolve().parents[2]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from libs.vare.constants import PROCESS_NAMES
from libs.vare.errors import VareError
from libs.vare.estimate import TEST_FUNCTIONS
from libs.vare.geometry import Window
from libs.vare.service import estimate_pattern, simulate_pattern
from libs.vare.settings import configure_logging
from libs.vare.simulate import PointPattern

configure_logging()

app = FastAPI(title="VARE API", version="0.1.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class WindowIn(BaseModel):
    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def _box(self) -> "WindowIn":
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every lower bound must be below its upper bound")
        return self

    def to_window(self) -> Window:
        return Window(tuple(self.lower), tuple(self.upper))


class SimulateRequest(BaseModel):
    process: str = "poisson"
    model: str = "2"
    window: WindowIn = Field(default_factory=lambda: WindowIn(lower=[-1.0, -1.0], upper=[1.0, 1.0]))
    mu_star: float = Field(200.0, gt=0)
    seed: int = Field(1, ge=0)

    @field_validator("process")
    @classmethod
    def _process(cls, v: str) -> str:
        if v not in PROCESS_NAMES:
            raise ValueError(f"process must be one of {PROCESS_NAMES}")
        return v


class EstimateRequest(BaseModel):
    window: WindowIn
    points: List[List[float]]
    model: str = "2"
    method: Literal["vare", "mcle"] = "vare"
    test_fn: str = "div-z"
    eps: float = Field(0.0, ge=0)
    grid: int = Field(80, ge=1)
    ci: bool = False

    @field_validator("test_fn")
    @classmethod
    def _test_fn(cls, v: str) -> str:
        if v not in TEST_FUNCTIONS:
            raise ValueError(f"test_fn must be one of {TEST_FUNCTIONS}")
        return v


@app.get("/health")
def health() -> Dict[str, str]:
    return {"status": "ok"}


@app.post("/simulate")
def simulate(req: SimulateRequest) -> Dict[str, Any]:
    try:
        pattern = simulate_pattern(req.process, req.model, req.window.to_window(), req.mu_star, req.seed)
    except (VareError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return pattern.to_dict()


@app.post("/estimate")
def estimate(req: EstimateRequest) -> Dict[str, Any]:
    try:
        pattern = PointPattern(req.points, req.window.to_window(), {"process": "upload"})
        return estimate_pattern(
            pattern,
            req.model,
            method=req.method,
            test_fn=req.test_fn,
            eps=req.eps,
            grid=req.grid,
            ci=req.ci,
        )
    except (VareError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="0.0.0.0", port=8000)
