"""
Конечно-разностная схема для задачи на полупрямой

    ∂t u = ½∂xx u + μ∂x u + β(u² − u),   u(t, 0) = s,   u(0, x) = 1 (x > 0)

Хранится отклонение w = 1 − u: состояние u ≡ 1 неустойчиво, и ошибки
округления в 1 − u перед фронтом росли бы как e^{βt}. Для w дальнее поле - точный
ноль, а уравнение ∂t w = ½∂xx w + μ∂x w + β(w − w²).

Полунеявная схема: Кранк–Николсон для диффузии и сноса (трёхдиагональная
система, scipy.linalg.solve_banded), реакция явно по Стрэнгу: точное решение
w′ = β(w − w²) на двух полушагах вокруг линейного шага. Первые STARTUP_STEPS
шагов - неявный Эйлер, гасит разрыв в углу.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded

from model.errors import InvalidParameterError, StabilityError
from model.params import ModelParams


logger = logging.getLogger(__name__)

STARTUP_STEPS = 4
STABILITY_TOL = 1e-9
EXPLICIT_CFL = 0.25
# β·dt при явной реакции
REACTION_LIMIT = 0.5


class Scheme(str, Enum):
    SEMI_IMPLICIT = "semi-implicit"
    SEMI_IMPLICIT_UPWIND = "semi-implicit-upwind"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PdeState:
    """Снимок w(t, ·) = 1 − u(t, ·) на сетке [0, x_max]."""
    params: ModelParams
    s: float
    dx: float
    dt: float
    t: float
    w: np.ndarray
    steps: int = 0
    scheme: Scheme = Scheme.SEMI_IMPLICIT

    @property
    def u(self) -> np.ndarray:
        return 1.0 - self.w

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def x_max(self) -> float:
        return (self.n - 1) * self.dx

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx


def default_dt(dx: float, scheme: Scheme) -> float:
    if scheme is Scheme.EXPLICIT:
        return EXPLICIT_CFL * dx * dx
    return dx


def initial_state(
    params: ModelParams,
    s: float,
    dx: float,
    x_max: float,
    dt: float | None = None,
    scheme: Scheme = Scheme.SEMI_IMPLICIT,
) -> PdeState:
    """u(0, x) = 1 при x > 0, u(0, 0) = s."""
    if dx <= 0 or x_max <= dx:
        raise InvalidParameterError(f"нужно 0 < dx < x_max, получено dx={dx}, x_max={x_max}")
    if s < 0:
        raise InvalidParameterError(f"граничное значение s должно быть ≥ 0, получено {s}")
    if dt is None:
        dt = default_dt(dx, scheme)
    if dt <= 0:
        raise InvalidParameterError(f"dt должно быть положительным, получено {dt}")

    n = int(round(x_max / dx)) + 1
    w = np.zeros(n)
    w[0] = 1.0 - s
    return PdeState(params=params, s=s, dx=dx, dt=dt, t=0.0, w=w, scheme=scheme)


def extend(state: PdeState, cells: int) -> PdeState:
    """Дописать справа cells ячеек с u = 1."""
    w = np.concatenate((state.w, np.zeros(cells)))
    return replace(state, w=w)


@lru_cache(maxsize=64)
def _stencil(dx: float, mu: float, upwind: bool) -> tuple[float, float, float]:
    """Коэффициенты (l, d, q) оператора L u_i = l·u_{i−1} + d·u_i + q·u_{i+1}."""
    diff = 0.5 / (dx * dx)
    if not upwind:
        return diff - mu / (2 * dx), -2 * diff, diff + mu / (2 * dx)
    if mu >= 0:
        return diff, -2 * diff - mu / dx, diff + mu / dx
    return diff - mu / dx, -2 * diff + mu / dx, diff


@lru_cache(maxsize=64)
def _lhs_bands(n: int, dx: float, dt: float, mu: float, theta: float, upwind: bool) -> np.ndarray:
    """Ленточная матрица (I − θ·dt·L) с единичными граничными строками."""
    l, d, q = _stencil(dx, mu, upwind)
    ab = np.zeros((3, n))
    ab[0, 2:] = -theta * dt * q
    ab[1, :] = 1.0
    ab[1, 1:-1] = 1.0 - theta * dt * d
    ab[2, :-2] = -theta * dt * l
    ab.setflags(write=False)
    return ab


def _check_step(state: PdeState) -> None:
    if state.scheme is Scheme.EXPLICIT and state.dt > EXPLICIT_CFL * state.dx ** 2 * (1 + 1e-12):
        raise StabilityError(f"явная схема: dt={state.dt:g} > {EXPLICIT_CFL}·dx²={EXPLICIT_CFL * state.dx ** 2:g}")
    if state.params.beta * state.dt > REACTION_LIMIT:
        raise StabilityError(f"явная реакция: β·dt={state.params.beta * state.dt:g} > {REACTION_LIMIT}")


def _react(state: PdeState, w: np.ndarray, tau: float) -> np.ndarray:
    """w(τ) для w′ = β(w − w²): w₀ / (w₀ + (1 − w₀)e^{−βτ})."""
    denominator = w + (1.0 - w) * np.exp(-state.params.beta * tau)
    if np.any(denominator <= 0):
        # при w₀ < 0 (u₀ > 1) решение уходит на бесконечность за конечное время
        raise StabilityError(f"t={state.t:.6g}: реакция взрывается за полушаг {tau:g}, уменьшите dt")
    return w / denominator


def step(state: PdeState, right: float = 1.0) -> PdeState:
    """Один шаг по времени; u(0) = s, u(x_max) = right."""
    _check_step(state)
    params = state.params
    w = state.w
    dt, dx = state.dt, state.dx
    upwind = state.scheme is Scheme.SEMI_IMPLICIT_UPWIND
    left_w, right_w = 1.0 - state.s, 1.0 - right

    if state.scheme is Scheme.EXPLICIT:
        theta = 0.0
    elif state.steps < STARTUP_STEPS:
        theta = 1.0
    else:
        theta = 0.5

    l, d, q = _stencil(dx, params.mu, upwind)
    half = _react(state, w, 0.5 * dt)
    inner = half[1:-1]
    rhs = half.copy()
    rhs[1:-1] = inner + (1.0 - theta) * dt * (l * half[:-2] + d * inner + q * half[2:])
    rhs[0] = left_w
    rhs[-1] = right_w

    if theta > 0:
        ab = _lhs_bands(w.size, dx, dt, params.mu, theta, upwind)
        new_w = solve_banded((1, 1), ab, rhs, check_finite=False)
    else:
        new_w = rhs
    new_w = _react(state, new_w, 0.5 * dt)
    new_w[0] = left_w
    new_w[-1] = right_w

    lo = min(float(w.min()), left_w, right_w) - STABILITY_TOL
    hi = max(float(w.max()), left_w, right_w) + STABILITY_TOL
    new_min, new_max = float(new_w.min()), float(new_w.max())
    if new_min < lo or new_max > hi or not np.all(np.isfinite(new_w)):
        raise StabilityError(
            f"t={state.t + dt:.6g}: значения u в [{1.0 - new_max:.3e}, {1.0 - new_min:.3e}], "
            f"допустимо [{1.0 - hi:.3e}, {1.0 - lo:.3e}]"
        )

    steps = state.steps + 1
    return replace(state, w=new_w, t=steps * dt, steps=steps)


@dataclass(frozen=True)
class RelaxationResult:
    state: PdeState
    times: np.ndarray
    distances: np.ndarray   # sup |u(t, ·) − ω_s|
    snapshots: dict[float, np.ndarray]


def relax(
    params: ModelParams,
    s: float,
    t_final: float,
    dx: float = 0.02,
    dt: float | None = None,
    x_max: float | None = None,
    oracle=None,
    record_every: float = 1.0,
    snapshot_times: tuple[float, ...] = (),
    scheme: Scheme = Scheme.SEMI_IMPLICIT,
) -> RelaxationResult:
    """
    Релаксация к стоячей волне в режиме C.

    oracle - функция x ↦ ω_s(x); по умолчанию берётся из ряда.
    """
    params.require_regime_c("relax")
    if x_max is None:
        x_max = 40.0 / params.r
    if oracle is None:
        from series import build_coefficients, find_wave_constants, omega_s

        table = build_coefficients(params)
        consts = find_wave_constants(table)

        def oracle(x):
            return omega_s(table, consts, s, x)

    state = initial_state(params, s, dx, x_max, dt, scheme)
    target = np.asarray(oracle(state.x))
    record_stride = max(1, int(round(record_every / state.dt)))
    n_steps = int(round(t_final / state.dt))
    pending = sorted(snapshot_times)

    times = [0.0]
    distances = [float(np.max(np.abs(state.u - target)))]
    snapshots: dict[float, np.ndarray] = {}
    for _ in range(n_steps):
        state = step(state)
        if state.steps % record_stride == 0 or state.steps == n_steps:
            times.append(state.t)
            distances.append(float(np.max(np.abs(state.u - target))))
        while pending and state.t >= pending[0] - 0.5 * state.dt:
            snapshots[pending.pop(0)] = state.u.copy()

    logger.info(f"Релаксация s={s:g} до t={state.t:g}: sup|u − ω_s| = {distances[-1]:.3e}")
    return RelaxationResult(
        state=state,
        times=np.asarray(times),
        distances=np.asarray(distances),
        snapshots=snapshots,
    )
