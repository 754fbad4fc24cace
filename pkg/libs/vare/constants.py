"""Constants for the intensity models, process presets and numerical defaults."""

from __future__ import annotations

# ------------------------- Covariate models -------------------------

# True parameters of the planar benchmark models and the d-dimensional sine model.
MODEL_THETA = {
    "1": (-2.0,),
    "2": (1.0, 4.0),
    "3": (2.0,),
    "4": (-1.0, -1.0, -0.5),
}
SINE_THETA_VALUE = 1.0

# Frequency of the sine covariates: sin(4*pi*u).
SINE_FREQUENCY = 4.0

# ------------------------- Process presets -------------------------

LGCP_PRESETS = {
    "lgcp1": {"sigma2": 0.5, "alpha": 1.0 / 15.0},
    "lgcp2": {"sigma2": 1.5, "alpha": 1.0 / 30.0},
}

THOMAS_PRESETS = {
    "thomas1": {"kappa": 100.0, "sigma": 0.05},
    "thomas2": {"kappa": 300.0, "sigma": 0.1},
}

PROCESS_NAMES = ("poisson", "lgcp1", "lgcp2", "thomas1", "thomas2")

# ------------------------- Numerical defaults -------------------------

# Safety factor on the thinning bound.
LAMBDA_SAFETY = 1.0001

# Diagonal jitter added before the Cholesky factorisation of field covariances.
CHOLESKY_JITTER = 1e-10

# Condition number above which the estimating equation is treated as singular.
CONDITION_LIMIT = 1e12

# Mollified test functions default to 5% of the window side length.
EPS_FRACTION_DEFAULT = 0.05

# Newton settings for the composite likelihood.
MCLE_MAX_ITER = 100
MCLE_GRAD_TOL = 1e-8

# IRLS settings for the point-augmented Poisson regression fit.
GLM_MAX_ITER = 25
GLM_DEVIANCE_TOL = 1e-8

# Midpoint nodes per axis used to calibrate beta, by dimension.
CALIBRATION_RESOLUTION = {1: 4096, 2: 256, 3: 64, 4: 32, 5: 20, 6: 16}
CALIBRATION_RESOLUTION_FALLBACK = 12

# Nodes per axis for the mollifier constants: tensor rule up to d=4, radial beyond.
CONSTANT_RESOLUTION = {1: 4000, 2: 400, 3: 100, 4: 100}

# Probe grids never exceed this many nodes in total.
PROBE_NODE_CAP = 128 ** 2
