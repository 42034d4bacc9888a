from pde.solver import (
    PdeState,
    RelaxationResult,
    Scheme,
    default_dt,
    extend,
    initial_state,
    relax,
    step,
)
from pde.front import FrontTrace, fit_front, half_position, run_front, shape_distance

__all__ = [
    "PdeState",
    "RelaxationResult",
    "Scheme",
    "default_dt",
    "extend",
    "initial_state",
    "relax",
    "step",
    "FrontTrace",
    "fit_front",
    "half_position",
    "run_front",
    "shape_distance",
]
