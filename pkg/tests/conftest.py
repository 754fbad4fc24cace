from __future__ import annotations

import numpy as np
import pytest

from libs.vare.covariate import builtin, model_theta
from libs.vare.geometry import Window
from libs.vare.simulate import calibrate_beta, process_preset, replication_rng, simulate


@pytest.fixture
def w1() -> Window:
    return Window.square(-1.0, 1.0)


@pytest.fixture
def w2() -> Window:
    return Window.square(-2.0, 2.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def model2():
    return builtin("2")


@pytest.fixture
def poisson_model2(model2, w1):
    """Poisson spec for model 2 on [-1,1]^2 calibrated to 200 expected points."""
    spec = process_preset("poisson", model2, model_theta("2"))
    return spec.with_beta(calibrate_beta(spec, w1, 200.0))


@pytest.fixture
def model2_pattern(poisson_model2, w1):
    return simulate(poisson_model2, w1, replication_rng(7), seed=7)
