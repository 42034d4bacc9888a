"""
Стрельба для стоячих волн ½v″ + μv′ + β(v² − v) = 0 и классификация хвоста.

Интегрируется отклонение w = 1 − v:

    ½w″ + μw′ + β(w − w²) = 0

чтобы хвост w ~ A·e^{−Rx} + B·e^{−rx} сохранял относительную точность.
В критическом случае w ~ (Ax + B)·e^{−μx}.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from model.errors import SolverFailureError
from model.params import ModelParams


logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
ATOL = 1e-30
DEFAULT_GRID = 2001

DIVERGE_LEVEL = 10.0
CROSS_THRESHOLD = 1e-13
# |w| в конце отрезка выше этого - траектория к 1 не сошлась
CONVERGED_LEVEL = 0.5
# |A| ≤ FAST_AMPLITUDE_RTOL·|B| - медленной моды нет
FAST_AMPLITUDE_RTOL = 1e-6
SLOW_SHARE_TOL = 0.01
# Точка для двухточечной подгонки амплитуд (доля длины отрезка)
FIT_POINT = 0.75


class DecayClass(str, Enum):
    """Тип приближения к 1."""
    SLOW_A = "SLOW_A"
    FAST_B = "FAST_B"
    DIVERGED = "DIVERGED"
    CROSSED = "CROSSED"


@dataclass(frozen=True)
class WaveSolution:
    """Решение ОДУ на сетке."""
    params: ModelParams
    s: float
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    deviations: np.ndarray          # 1 − v без потери точности в хвосте
    decay_class: DecayClass
    residual_max: float
    launch_slope: float = math.nan  # v′(0)
    log_slope: float = math.nan     # наклон log|1 − v| на хвосте
    amplitudes: tuple[float, float] | None = None

    def __call__(self, x):
        return np.interp(x, self.grid, self.values)

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])


@dataclass(frozen=True)
class Shot:
    """Сырой результат интегрирования в переменной w."""
    x: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    crossed: bool
    diverged: bool
    x_end: float
    amplitudes: tuple[float, float] | None


def default_x_max(params: ModelParams) -> float:
    """40/r: несколько длин затухания."""
    return 40.0 / params.r


def slow_mode(params: ModelParams, x):
    if params.critical:
        return x * np.exp(-params.r * x)
    return np.exp(-params.R_small * x)


def fast_mode(params: ModelParams, x):
    return np.exp(-params.r * x)


def mode_amplitudes(params: ModelParams, x1: float, w1: float, x2: float, w2: float) -> tuple[float, float]:
    """(A, B) из w(x) = A·slow(x) + B·fast(x) по двум точкам."""
    s1, s2 = slow_mode(params, x1), slow_mode(params, x2)
    f1, f2 = fast_mode(params, x1), fast_mode(params, x2)
    if params.critical:
        # q = w·e^{rx} = Ax + B
        q1, q2 = w1 / f1, w2 / f2
        A = (q2 - q1) / (x2 - x1)
        return A, q1 - A * x1
    # делим на быструю моду, чтобы не потерять точность
    det = s1 / f1 - s2 / f2
    A = (w1 / f1 - w2 / f2) / det
    B = w1 / f1 - A * s1 / f1
    return A, B


def integrate_deviation(
    params: ModelParams,
    w0: float,
    dw0: float,
    x_max: float,
    rtol: float = DEFAULT_RTOL,
    n_grid: int = DEFAULT_GRID,
) -> Shot:
    """Проинтегрировать (w, w′) из (w0, dw0) до x_max или до события."""
    mu, beta = params.mu, params.beta
    sign0 = np.sign(w0) if w0 != 0 else -np.sign(dw0)

    def rhs(x, y):
        w, dw = y
        return [dw, -2.0 * (mu * dw + beta * (w - w * w))]

    def crossed(x, y):
        return y[0] + sign0 * CROSS_THRESHOLD
    crossed.terminal = True
    crossed.direction = -sign0

    def diverged(x, y):
        return abs(1.0 - y[0]) - DIVERGE_LEVEL
    diverged.terminal = True
    diverged.direction = 1

    sol = solve_ivp(
        rhs,
        (0.0, x_max),
        [w0, dw0],
        method="RK45",
        rtol=rtol,
        atol=ATOL,
        dense_output=True,
        events=[crossed, diverged],
    )
    if sol.status == -1:
        raise SolverFailureError(f"интегрирование прервано: {sol.message}")

    x_end = float(sol.t[-1])
    grid = np.linspace(0.0, x_end, n_grid)
    w, dw = sol.sol(grid)
    is_crossed = sol.t_events[0].size > 0
    is_diverged = sol.t_events[1].size > 0

    amplitudes = None
    if not (is_crossed or is_diverged) and abs(w[-1]) < CONVERGED_LEVEL:
        x1 = FIT_POINT * x_end
        w1 = float(sol.sol(x1)[0])
        amplitudes = mode_amplitudes(params, x1, w1, x_end, float(w[-1]))

    return Shot(
        x=grid,
        w=w,
        dw=dw,
        crossed=is_crossed,
        diverged=is_diverged,
        x_end=x_end,
        amplitudes=amplitudes,
    )


def classify_shot(params: ModelParams, shot: Shot) -> DecayClass:
    """Классификация по дихотомии A·e^{−Rx} / B·e^{−rx}."""
    if shot.crossed:
        return DecayClass.CROSSED
    if shot.diverged or shot.amplitudes is None:
        return DecayClass.DIVERGED
    A, B = shot.amplitudes
    if A == 0.0 and B == 0.0:
        return DecayClass.FAST_B
    if abs(A) <= FAST_AMPLITUDE_RTOL * abs(B):
        return DecayClass.FAST_B
    slow_share = abs(A) * slow_mode(params, shot.x_end) / max(abs(shot.w[-1]), np.finfo(float).tiny)
    if slow_share <= SLOW_SHARE_TOL:
        return DecayClass.FAST_B
    return DecayClass.SLOW_A


def trusted_end(params: ModelParams, shot: Shot) -> float:
    """Точка, до которой медленная мода не больше 1% от решения."""
    if shot.amplitudes is None:
        return shot.x_end
    A, B = shot.amplitudes
    if A == 0.0 or B == 0.0:
        return shot.x_end
    ratio = SLOW_SHARE_TOL * abs(B) / abs(A)
    if params.critical:
        x_t = ratio
    else:
        if ratio <= 1.0:
            return shot.x_end
        x_t = math.log(ratio) / (params.r - params.R_small)
    return min(shot.x_end, x_t)


def tail_log_slope(x: np.ndarray, deviation: np.ndarray, x_end: float) -> float:
    """Наклон log|1 − v| на последней десятой части [0, x_end]."""
    mask = (x >= 0.9 * x_end) & (x <= x_end) & (np.abs(deviation) > 0)
    if np.count_nonzero(mask) < 3:
        return math.nan
    slope, _ = np.polyfit(x[mask], np.log(np.abs(deviation[mask])), 1)
    return float(slope)


def ode_residual(params: ModelParams, x: np.ndarray, v: np.ndarray, dv: np.ndarray) -> float:
    """max |½v″ + μv′ + β(v² − v)|, v″ разностной производной от v′."""
    if x.size < 3:
        return 0.0
    d2v = np.gradient(dv, x, edge_order=2)
    residual = 0.5 * d2v + params.mu * dv + params.beta * (v * v - v)
    return float(np.max(np.abs(residual)))


def to_solution(params: ModelParams, s: float, shot: Shot, decay_class: DecayClass | None = None) -> WaveSolution:
    """Перевести Shot в WaveSolution (v = 1 − w)."""
    if decay_class is None:
        decay_class = classify_shot(params, shot)
    values = 1.0 - shot.w
    derivs = -shot.dw
    x_tail = trusted_end(params, shot) if decay_class is DecayClass.FAST_B else shot.x_end
    return WaveSolution(
        params=params,
        s=s,
        grid=shot.x,
        values=values,
        derivs=derivs,
        deviations=shot.w,
        decay_class=decay_class,
        residual_max=ode_residual(params, shot.x, values, derivs),
        launch_slope=float(derivs[0]),
        log_slope=tail_log_slope(shot.x, shot.w, x_tail),
        amplitudes=shot.amplitudes,
    )


def constant_solution(params: ModelParams, x_max: float, n_grid: int = DEFAULT_GRID) -> WaveSolution:
    """v ≡ 1."""
    grid = np.linspace(0.0, x_max, n_grid)
    return WaveSolution(
        params=params,
        s=1.0,
        grid=grid,
        values=np.ones_like(grid),
        derivs=np.zeros_like(grid),
        deviations=np.zeros_like(grid),
        decay_class=DecayClass.FAST_B,
        residual_max=0.0,
        launch_slope=0.0,
        amplitudes=(0.0, 0.0),
    )


def shoot_standing_wave(
    params: ModelParams,
    s: float,
    c: float,
    x_max: float | None = None,
    rtol: float = DEFAULT_RTOL,
    n_grid: int = DEFAULT_GRID,
) -> WaveSolution:
    """Выстрел из (v, v′)(0) = (s, c)."""
    params.require_regime_c("shoot_standing_wave")
    if x_max is None:
        x_max = default_x_max(params)
    if s == 1.0 and c == 0.0:
        return constant_solution(params, x_max, n_grid)
    shot = integrate_deviation(params, 1.0 - s, -c, x_max, rtol, n_grid)
    return to_solution(params, s, shot)


def sweep_launch_slopes(
    params: ModelParams,
    s: float,
    slopes: list[float],
    x_max: float | None = None,
) -> list[WaveSolution]:
    """Семейство выстрелов при фиксированном s."""
    solutions = [shoot_standing_wave(params, s, c, x_max) for c in slopes]
    counts = {cls.value: sum(sol.decay_class is cls for sol in solutions) for cls in DecayClass}
    logger.info(f"Развёртка по c при s={s:g}: {counts}")
    return solutions
