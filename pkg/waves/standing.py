"""
Стоячие волны ω_s и s0 методом стрельбы.

ω_s при s < 1 - максимальное решение ниже 1, при s > 1 - минимальное выше 1;
в обоих случаях единственное с быстрым хвостом B·e^{−rx}.
"""

import logging

import numpy as np

from model.errors import InvalidParameterError, NoConvergenceError, NoFiniteMomentError, SolverFailureError
from model.params import ModelParams
from waves.integrator import (
    DEFAULT_RTOL,
    DEFAULT_GRID,
    DecayClass,
    Shot,
    classify_shot,
    WaveSolution,
    constant_solution,
    default_x_max,
    integrate_deviation,
    to_solution,
)


logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
MAX_ITER = 200
MAX_EXPANSIONS = 60
# окрестность s0, где ω_s берётся выстрелом из складки
FOLD_RTOL = 1e-6
FOLD_FLOOR = 1e-9


def overshoots(shot: Shot, sign0: float) -> bool:
    """
    Ушла ли траектория по другую сторону от 1.

    sign0 - знак w = 1 − v в начале. Пересечение, либо медленная мода
    со знаком, противоположным sign0, означают переход через сепаратрису.
    """
    if shot.crossed:
        return True
    if shot.diverged or shot.amplitudes is None:
        return False
    A, _ = shot.amplitudes
    return A != 0.0 and np.sign(A) == -sign0


def _resolve_s0(params: ModelParams, s0: float | None) -> float:
    if s0 is not None:
        return s0
    from series import build_coefficients, find_wave_constants

    return find_wave_constants(build_coefficients(params)).s0


def _fold_solution(params: ModelParams, s: float, x_max: float, rtol: float, n_grid: int) -> WaveSolution:
    """
    ω_s у s0: выстрел с c = 0.

    В складке соседние c по обе стороны пересекают 1, скобки нет. Если выстрел
    в конце уходит от 1, отрезок обрезается там, где |w| < FOLD_FLOOR·|w0|.
    """
    w0 = 1.0 - s
    shot = integrate_deviation(params, w0, 0.0, x_max, rtol, n_grid)
    if classify_shot(params, shot) is not DecayClass.FAST_B:
        small = np.flatnonzero(np.abs(shot.w) < FOLD_FLOOR * abs(w0))
        if small.size == 0 or shot.x[small[0]] <= 0.0:
            raise NoConvergenceError(f"выстрел из складки s={s:g} уходит от 1 раньше хвоста")
        x_cut = float(shot.x[small[0]])
        logger.debug(f"складка s={s:g}: отрезок обрезан до x={x_cut:.4g}")
        shot = integrate_deviation(params, w0, 0.0, x_cut, rtol, n_grid)
    return to_solution(params, s, shot, DecayClass.FAST_B)


def solve_omega(
    params: ModelParams,
    s: float,
    tol: float = DEFAULT_TOL,
    x_max: float | None = None,
    s0: float | None = None,
    rtol: float = DEFAULT_RTOL,
    n_grid: int = DEFAULT_GRID,
    max_iter: int = MAX_ITER,
) -> WaveSolution:
    """Бисекция по c = v′(0) до единственного решения с быстрым хвостом."""
    params.require_regime_c("solve_omega")
    if s < 0:
        raise InvalidParameterError(f"s должно быть ≥ 0, получено {s}")
    if x_max is None:
        x_max = default_x_max(params)
    if s == 1.0:
        return constant_solution(params, x_max, n_grid)
    if s > 1.0:
        s0_value = _resolve_s0(params, s0)
        if s > s0_value * (1.0 + 1e-9):
            raise NoFiniteMomentError(s, s0_value)
        if s >= s0_value * (1.0 - FOLD_RTOL):
            return _fold_solution(params, s, x_max, rtol, n_grid)

    w0 = 1.0 - s
    sign0 = float(np.sign(w0))

    def shoot(c: float) -> Shot:
        return integrate_deviation(params, w0, -c, x_max, rtol, n_grid)

    def too_large(c: float) -> bool:
        # s < 1: перелёт через 1 - c велико; s > 1: перелёт - c мало
        return overshoots(shoot(c), sign0) == (sign0 > 0)

    if sign0 > 0:
        lo, hi = 0.0, 1.0
        for _ in range(MAX_EXPANSIONS):
            if too_large(hi):
                break
            hi *= 2.0
        else:
            raise NoConvergenceError(f"не найдена верхняя граница для c при s={s:g}", (lo, hi))
    else:
        # ω_s убывает, c* ≤ 0; выстрел из (s, 0) при s < s0 остаётся выше 1
        lo, hi = -1.0, 0.0
        if not too_large(hi):
            raise NoConvergenceError(f"выстрел из (s, 0) падает ниже 1 при s={s:g}, s выше s0 стрельбы", (lo, hi))

    for _ in range(MAX_EXPANSIONS):
        if not too_large(lo):
            break
        lo = lo * 2.0 if lo < 0 else lo - 1.0
    else:
        raise NoConvergenceError(f"не найдена нижняя граница для c при s={s:g}", (lo, hi))

    for iteration in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if too_large(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise NoConvergenceError(f"бисекция по c не сошлась при s={s:g}", (lo, hi))

    # конец скобки, не перелетающий через 1
    c_star = lo if sign0 > 0 else hi
    solution = to_solution(params, s, shoot(c_star))
    if solution.decay_class is not DecayClass.FAST_B:
        raise NoConvergenceError(
            f"решение при s={s:g} классифицировано как {solution.decay_class.value}",
            (lo, hi),
        )
    logger.debug(f"ω_s при s={s:g}: c*={c_star:.12g}, итераций {iteration}")
    return solution


def find_s0_by_shooting(
    params: ModelParams,
    tol: float = 1e-8,
    x_max: float | None = None,
    rtol: float = DEFAULT_RTOL,
    max_iter: int = MAX_ITER,
) -> float:
    """s0 как сепаратриса выстрелов из (s, 0)."""
    params.require_regime_c("find_s0_by_shooting")
    if x_max is None:
        x_max = default_x_max(params)

    def too_large(s: float) -> bool:
        # падение ниже 1 - s слишком велико
        shot = integrate_deviation(params, 1.0 - s, 0.0, x_max, rtol, n_grid=257)
        return overshoots(shot, -1.0)

    lo, hi = 1.0 + 1e-6, 2.0
    if too_large(lo):
        raise SolverFailureError(f"выстрел из s={lo:g} уже падает ниже 1: скобка для s0 не построена")
    for _ in range(MAX_EXPANSIONS):
        if too_large(hi):
            break
        lo, hi = hi, 1.0 + 2.0 * (hi - 1.0)
    else:
        raise SolverFailureError(f"выстрел из s={hi:g} не падает ниже 1: скобка для s0 не построена")

    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if too_large(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise NoConvergenceError("бисекция по s не сошлась", (lo, hi))

    s0 = 0.5 * (lo + hi)
    logger.info(f"s0 стрельбой: {s0:.8f} (μ={params.mu:g}, β={params.beta:g})")
    return s0
