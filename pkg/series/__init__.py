# Series Package
from series.coefficients import (
    DEFAULT_N_MAX,
    SeriesTable,
    build_coefficients,
    build_rescaled_limit,
    eval_phi,
    eval_phi_prime,
    eval_phi_second,
    eval_phi_with_bound,
    eval_psi,
    eval_psi_prime,
)
from series.constants import (
    WaveConstants,
    S0Curve,
    S0CurvePoint,
    find_wave_constants,
    find_rescaled_minimum,
    solve_B,
    omega_s,
    omega_s_prime,
    wave_profile,
    tail_prediction,
    s0_limit_curve,
)

__all__ = [
    "DEFAULT_N_MAX",
    "SeriesTable",
    "build_coefficients",
    "build_rescaled_limit",
    "eval_phi",
    "eval_phi_prime",
    "eval_phi_second",
    "eval_phi_with_bound",
    "eval_psi",
    "eval_psi_prime",
    "WaveConstants",
    "S0Curve",
    "S0CurvePoint",
    "find_wave_constants",
    "find_rescaled_minimum",
    "solve_B",
    "omega_s",
    "omega_s_prime",
    "wave_profile",
    "tail_prediction",
    "s0_limit_curve",
]
