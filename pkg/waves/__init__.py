# Waves Package
from waves.integrator import (
    DecayClass,
    WaveSolution,
    shoot_standing_wave,
    sweep_launch_slopes,
    classify_shot,
    default_x_max,
)
from waves.standing import solve_omega, find_s0_by_shooting
from waves.fronts import solve_hstar, solve_extinction, hstar_left_rate
from waves.identities import ACheckRow, a_of_s_checks, a_integral, a_series, a_identity_residual

__all__ = [
    "DecayClass",
    "WaveSolution",
    "shoot_standing_wave",
    "sweep_launch_slopes",
    "classify_shot",
    "default_x_max",
    "solve_omega",
    "find_s0_by_shooting",
    "solve_hstar",
    "solve_extinction",
    "hstar_left_rate",
    "ACheckRow",
    "a_of_s_checks",
    "a_integral",
    "a_series",
    "a_identity_residual",
]
