"""Variational and composite-likelihood estimation for log-linear point-process intensities.

Quick start::

    from libs.vare import Window, builtin, process_preset, calibrate_beta, simulate
    from libs.vare import make_test_function, replication_rng, vare

    w = Window.square(-1, 1)
    z = builtin("2")
    spec = process_preset("poisson", z, (1.0, 4.0))
    spec = spec.with_beta(calibrate_beta(spec, w, 200))
    x = simulate(spec, w, replication_rng(7))
    fit = vare(x, z, make_test_function("eta-div-z", z, w, 0.1))
"""

from .covariate import CovariateField, GridCovariate, builtin, constant, homogeneous, linear, model_theta
from .errors import (
    BoundViolation,
    CholeskyFailure,
    Degenerate,
    EmptyErosion,
    Nonconvergence,
    OutOfStencil,
    ParseError,
    SingularSystem,
    UnknownModel,
    VareError,
)
from .estimate import (
    McleResult,
    Quadrature,
    TestFunction,
    VareResult,
    build_A,
    build_b,
    check_condition_ii,
    check_condition_iii,
    check_condition_vi_poisson,
    make_test_function,
    mcle,
    mcle_berman_turner,
    model2_closed_form,
    poisson_covariance,
    vare,
)
from .geometry import Grid, Window, contains, dilate, erode, midpoint_integral, regular_grid, uniform_sample, volume
from .mollifier import Mollifier, bump, div_eta, eta, kappa, normalizing_constant
from .settings import Settings, configure_logging, get_settings
from .simulate import (
    PointPattern,
    ProcessSpec,
    calibrate_beta,
    expected_count,
    expected_sum,
    process_preset,
    replication_rng,
    simulate,
    simulate_lgcp,
    simulate_poisson,
    simulate_thomas,
)

__all__ = [
    "Window",
    "Grid",
    "volume",
    "erode",
    "dilate",
    "contains",
    "uniform_sample",
    "regular_grid",
    "midpoint_integral",
    "CovariateField",
    "GridCovariate",
    "builtin",
    "model_theta",
    "constant",
    "linear",
    "homogeneous",
    "Mollifier",
    "bump",
    "normalizing_constant",
    "kappa",
    "eta",
    "div_eta",
    "PointPattern",
    "ProcessSpec",
    "process_preset",
    "replication_rng",
    "calibrate_beta",
    "expected_count",
    "expected_sum",
    "simulate",
    "simulate_poisson",
    "simulate_lgcp",
    "simulate_thomas",
    "TestFunction",
    "make_test_function",
    "VareResult",
    "McleResult",
    "Quadrature",
    "build_A",
    "build_b",
    "vare",
    "mcle",
    "mcle_berman_turner",
    "poisson_covariance",
    "model2_closed_form",
    "check_condition_ii",
    "check_condition_iii",
    "check_condition_vi_poisson",
    "Settings",
    "get_settings",
    "configure_logging",
    "VareError",
    "EmptyErosion",
    "UnknownModel",
    "OutOfStencil",
    "BoundViolation",
    "CholeskyFailure",
    "SingularSystem",
    "Nonconvergence",
    "Degenerate",
    "ParseError",
]
