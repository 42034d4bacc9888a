"""
Бегущая волна h_* на всей прямой и волна вымирания θ на полупрямой.

    ½h″ + √(2β)h′ + β(h² − h) = 0,   h(−∞) = 0, h(+∞) = 1, h_*(0) = ½
    ½θ″ + μθ′ + β(θ² − θ) = 0,       θ(0) = 1, θ(∞) = 0
"""

import math
import logging

import numpy as np
from scipy.integrate import solve_ivp

from model.errors import NoConvergenceError, SolverFailureError, UnsupportedRegimeError
from model.params import ModelParams, Regime, classify
from waves.integrator import (
    ATOL,
    DEFAULT_GRID,
    DecayClass,
    WaveSolution,
    ode_residual,
)


logger = logging.getLogger(__name__)

HSTAR_EPS = 1e-8
HSTAR_SWITCH = 0.9
EXTINCTION_RTOL = 1e-12
MAX_ITER = 200
MAX_EXPANSIONS = 60
# Отступ от точки разворота: загрязнение растущей модой меньше 1e−3
TRUST_DECADES = 3.0


def hstar_left_rate(beta: float) -> float:
    """λ₊ = √β(2 − √2): положительный корень ½λ² + √(2β)λ − β = 0."""
    return math.sqrt(beta) * (2.0 - math.sqrt(2.0))


def solve_hstar(
    beta: float,
    tol: float = 1e-10,
    eps: float = HSTAR_EPS,
    n_grid: int = DEFAULT_GRID,
) -> WaveSolution:
    """
    Критическая бегущая волна h_*.

    Запуск из x_left = −20/√β по линеаризованному хвосту ε·e^{λ₊(x−x_left)};
    до h = 0.9 интегрируется h, дальше отклонение w = 1 − h.
    """
    params = classify(math.sqrt(2.0 * beta), beta)
    c = params.critical_speed
    lam = hstar_left_rate(beta)
    x_left = -20.0 / math.sqrt(beta)
    span = 100.0 / math.sqrt(beta)

    def rhs_h(x, y):
        h, dh = y
        return [dh, -2.0 * (c * dh + beta * (h * h - h))]

    def reached(x, y):
        return y[0] - HSTAR_SWITCH
    reached.terminal = True
    reached.direction = 1

    def went_negative(x, y):
        return y[0]
    went_negative.terminal = True
    went_negative.direction = -1

    left = solve_ivp(
        rhs_h,
        (x_left, x_left + span),
        [eps, lam * eps],
        method="RK45",
        rtol=tol,
        atol=ATOL,
        dense_output=True,
        events=[reached, went_negative],
    )
    if left.status == -1 or left.t_events[0].size == 0:
        raise SolverFailureError("траектория h_* не дошла до 0.9: волна не соединяет 0 и 1")
    x_switch = float(left.t_events[0][0])

    def rhs_w(x, y):
        w, dw = y
        return [dw, -2.0 * (c * dw + beta * (w - w * w))]

    def crossed(x, y):
        return y[0]
    crossed.terminal = True
    crossed.direction = -1

    right = solve_ivp(
        rhs_w,
        (x_switch, x_switch + 40.0 / c),
        [1.0 - HSTAR_SWITCH, -float(left.sol(x_switch)[1])],
        method="RK45",
        rtol=tol,
        atol=ATOL,
        dense_output=True,
        events=[crossed],
    )
    if right.status == -1 or right.t_events[0].size > 0:
        raise SolverFailureError("h_* перешла через 1: траектория не соединяет 0 и 1")

    n_left = n_grid // 2 + 1
    x1 = np.linspace(x_left, x_switch, n_left)
    x2 = np.linspace(x_switch, float(right.t[-1]), n_grid - n_left + 1)[1:]
    h1, dh1 = left.sol(x1)
    w2, dw2 = right.sol(x2)

    grid = np.concatenate((x1, x2))
    values = np.concatenate((h1, 1.0 - w2))
    derivs = np.concatenate((dh1, -dw2))
    deviations = np.concatenate((1.0 - h1, w2))

    if np.any(derivs <= 0):
        raise SolverFailureError("h_* не монотонна")

    # сдвиг: h(0) = ½ по линейной интерполяции
    i = int(np.searchsorted(values, 0.5))
    x_half = grid[i - 1] + (0.5 - values[i - 1]) * (grid[i] - grid[i - 1]) / (values[i] - values[i - 1])
    grid = grid - x_half

    # правый хвост (Ax + B)e^{−√(2β)x}: A ≠ 0 - медленный тип
    q = deviations[-2:] * np.exp(c * grid[-2:])
    slope = (q[1] - q[0]) / (grid[-1] - grid[-2])
    decay_class = DecayClass.SLOW_A if abs(slope) * grid[-1] > 0.01 * abs(q[1]) else DecayClass.FAST_B

    return WaveSolution(
        params=params,
        s=0.5,
        grid=grid,
        values=values,
        derivs=derivs,
        deviations=deviations,
        decay_class=decay_class,
        residual_max=ode_residual(params, grid, values, derivs),
        launch_slope=float(derivs[0]),
        log_slope=lam,
    )


def solve_extinction(
    params: ModelParams,
    tol: float = 1e-12,
    x_max: float | None = None,
    rtol: float = EXTINCTION_RTOL,
    n_grid: int = DEFAULT_GRID,
    max_iter: int = MAX_ITER,
) -> WaveSolution:
    """Волна вымирания θ: бисекция по θ′(0) = −c."""
    if params.regime is Regime.A:
        raise UnsupportedRegimeError("волна вымирания определена только при μ > −√(2β)")

    mu, beta = params.mu, params.beta
    rate = params.extinction_rate
    growth = -mu + math.sqrt(mu * mu + 2.0 * beta)
    if x_max is None:
        x_max = 40.0 / rate

    def rhs(x, y):
        th, dth = y
        return [dth, -2.0 * (mu * dth + beta * (th * th - th))]

    def crossed(x, y):
        return y[0]
    crossed.terminal = True
    crossed.direction = -1

    def turned(x, y):
        return y[1]
    turned.terminal = True
    turned.direction = 1

    def shoot(c: float):
        return solve_ivp(
            rhs,
            (0.0, x_max),
            [1.0, -c],
            method="RK45",
            rtol=rtol,
            atol=ATOL,
            dense_output=True,
            events=[crossed, turned],
        )

    def too_large(c: float) -> bool:
        return shoot(c).t_events[0].size > 0

    lo, hi = 0.0, 1.0
    for _ in range(MAX_EXPANSIONS):
        if too_large(hi):
            break
        hi *= 2.0
    else:
        raise NoConvergenceError("не найдена верхняя граница для θ′(0)", (lo, hi))

    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if too_large(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise NoConvergenceError("бисекция по θ′(0) не сошлась", (lo, hi))

    sol = shoot(lo)
    x_end = float(sol.t[-1])
    if sol.t_events[1].size > 0:
        x_end = float(sol.t_events[1][0]) - math.log(10.0 ** TRUST_DECADES) / (growth + rate)
    if x_end <= 0:
        raise SolverFailureError("волна вымирания: доверенный участок пуст")

    grid = np.linspace(0.0, x_end, n_grid)
    values, derivs = sol.sol(grid)
    if np.any(derivs[1:] >= 0) or np.any(values <= 0):
        raise SolverFailureError("θ не убывает строго на сетке")

    mask = grid >= 0.6 * x_end
    log_slope = float(np.polyfit(grid[mask], np.log(values[mask]), 1)[0])
    if abs(log_slope + rate) > 0.02 * rate:
        raise SolverFailureError(f"наклон хвоста θ {log_slope:.5f} отличается от −{rate:.5f} больше чем на 2%")
    logger.debug(f"Волна вымирания: θ′(0) = {-lo:.10g}, наклон хвоста {log_slope:.5f}")

    return WaveSolution(
        params=params,
        s=1.0,
        grid=grid,
        values=values,
        derivs=derivs,
        deviations=1.0 - values,
        decay_class=DecayClass.FAST_B,
        residual_max=ode_residual(params, grid, values, derivs),
        launch_slope=float(derivs[0]),
        log_slope=log_slope,
    )
