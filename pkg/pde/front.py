"""
Фронт в режимах A и B: u(t, x) = P^x[K(t) = 0] при s = 0.

Положение m_½(t) - точка, где u = ½ (линейная интерполяция). По второй
половине горизонта подгоняется m_½(t) = v·t + k·log t + C.
"""

import math
import logging
from dataclasses import dataclass

import numpy as np

from model.errors import FrontExitError, InvalidParameterError, UnsupportedRegimeError
from model.params import ModelParams
from pde.solver import PdeState, Scheme, extend, initial_state, step


logger = logging.getLogger(__name__)

DEFAULT_DX = 0.02
AHEAD = 30.0
RECORD_EVERY = 0.5
MAX_CELLS = 5_000_000
# окно сравнения с h_*: |y| ≤ SHAPE_WINDOW/√β
SHAPE_WINDOW = 10.0


@dataclass(frozen=True)
class FrontTrace:
    times: np.ndarray
    half_positions: np.ndarray
    fitted_speed: float
    fitted_log_coeff: float
    fitted_constant: float
    shape_distance: float
    final_state: PdeState

    @property
    def expected_speed(self) -> float:
        return self.final_state.params.critical_speed - self.final_state.params.mu

    @property
    def expected_log_coeff(self) -> float:
        return -1.5 / self.final_state.params.critical_speed


def half_position(state: PdeState) -> float | None:
    """m_½: первая точка внутренней части сетки, где u достигает ½."""
    u = state.u
    above = np.flatnonzero(u[1:-1] >= 0.5)
    if above.size == 0:
        return None
    i = int(above[0]) + 1
    if u[i - 1] >= 0.5:
        return None
    return (i - 1 + (0.5 - u[i - 1]) / (u[i] - u[i - 1])) * state.dx


def fit_front(times: np.ndarray, positions: np.ndarray, t_from: float) -> tuple[float, float, float]:
    """Наименьшие квадраты в базисе {t, log t, 1} по t ≥ t_from."""
    mask = (times >= t_from) & (times > 0)
    if np.count_nonzero(mask) < 3:
        raise InvalidParameterError("слишком мало точек траектории фронта для подгонки")
    t = times[mask]
    design = np.column_stack((t, np.log(t), np.ones_like(t)))
    (v, k, c), *_ = np.linalg.lstsq(design, positions[mask], rcond=None)
    return float(v), float(k), float(c)


def shape_distance(state: PdeState, m_half: float, hstar) -> float:
    """sup |u(t, m_½ + y) − h_*(y)| по |y| ≤ SHAPE_WINDOW/√β внутри сетки."""
    width = SHAPE_WINDOW / math.sqrt(state.params.beta)
    y = hstar.grid
    mask = (np.abs(y) <= width) & (m_half + y >= 0) & (m_half + y <= state.x_max)
    u = np.interp(m_half + y[mask], state.x, state.u)
    return float(np.max(np.abs(u - hstar.values[mask])))


def run_front(
    params: ModelParams,
    horizon: float,
    dx: float = DEFAULT_DX,
    dt: float | None = None,
    ahead: float = AHEAD,
    record_every: float = RECORD_EVERY,
    max_cells: int = MAX_CELLS,
    scheme: Scheme = Scheme.SEMI_IMPLICIT,
    hstar=None,
) -> FrontTrace:
    """Эволюция с s = 0 из u(0, ·) = 1 до horizon с отслеживанием m_½."""
    if params.in_regime_c:
        raise UnsupportedRegimeError("фронт существует только при μ < √(2β); в режиме C используйте relax")
    if horizon < 100.0 / params.beta:
        raise InvalidParameterError(f"горизонт {horizon:g} меньше 100/β = {100.0 / params.beta:g}")
    if hstar is None:
        from waves.fronts import solve_hstar

        hstar = solve_hstar(params.beta)

    state = initial_state(params, 0.0, dx, ahead + 10.0, dt, scheme)
    chunk = int(math.ceil(ahead / dx))
    record_stride = max(1, int(round(record_every / state.dt)))
    n_steps = int(round(horizon / state.dt))

    times: list[float] = []
    positions: list[float] = []
    for _ in range(n_steps):
        state = step(state)
        if state.steps % record_stride and state.steps != n_steps:
            continue
        m = half_position(state)
        if m is None:
            raise FrontExitError(f"t={state.t:g}: уровень ½ не достигается внутри сетки")
        times.append(state.t)
        positions.append(m)
        if state.x_max - m < ahead:
            if state.n + chunk > max_cells:
                raise FrontExitError(f"t={state.t:g}: сетка превысила {max_cells} узлов")
            state = extend(state, chunk)
            logger.debug(f"t={state.t:g}: сетка расширена до x_max={state.x_max:g}")

    times_arr = np.asarray(times)
    positions_arr = np.asarray(positions)
    v, k, c = fit_front(times_arr, positions_arr, 0.5 * horizon)
    distance = shape_distance(state, positions_arr[-1], hstar)

    trace = FrontTrace(
        times=times_arr,
        half_positions=positions_arr,
        fitted_speed=v,
        fitted_log_coeff=k,
        fitted_constant=c,
        shape_distance=distance,
        final_state=state,
    )
    logger.info(
        f"Фронт μ={params.mu:g}, β={params.beta:g}, T={horizon:g}: v={v:.6f} "
        f"(ожидается {trace.expected_speed:.6f}), k={k:.4f}, C={c:.4f}, "
        f"расстояние до h_*={distance:.3e}"
    )
    return trace
