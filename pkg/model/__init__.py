# Model Package
from model.params import ModelParams, Regime, classify, CRITICAL_RTOL
from model.errors import (
    LabError,
    InvalidParameterError,
    UnsupportedRegimeError,
    NoFiniteMomentError,
    OutOfDiscError,
    RadiusExceededError,
    NoConvergenceError,
    SolverFailureError,
    QuadratureError,
    StabilityError,
    FrontExitError,
    SpineHorizonError,
    CrosscheckFailure,
)

__all__ = [
    "ModelParams",
    "Regime",
    "classify",
    "CRITICAL_RTOL",
    "LabError",
    "InvalidParameterError",
    "UnsupportedRegimeError",
    "NoFiniteMomentError",
    "OutOfDiscError",
    "RadiusExceededError",
    "NoConvergenceError",
    "SolverFailureError",
    "QuadratureError",
    "StabilityError",
    "FrontExitError",
    "SpineHorizonError",
    "CrosscheckFailure",
]
