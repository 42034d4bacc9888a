"""
Три независимых значения a(s) = ω_s′(0).

Умножив уравнение на e^{λx}, λ = μ − √(μ² + 2β), и проинтегрировав по частям:

    a(s) = −(μ + √(μ² + 2β))·s + 2β ∫₀^∞ ω_s(x)² e^{λx} dx

Кроме того ½a·a′ + μa + β(s² − s) = 0; невязка считается через (a²)′/4,
которая конечна и в s0.
"""

import math
import logging
import warnings
from dataclasses import dataclass

from scipy import integrate

from model.errors import QuadratureError
from model.params import ModelParams
from series import (
    SeriesTable,
    WaveConstants,
    build_coefficients,
    eval_phi,
    find_wave_constants,
    omega_s_prime,
    solve_B,
)
from waves.standing import solve_omega


logger = logging.getLogger(__name__)

INTEGRAND_FLOOR = 1e-14
QUAD_ABS_ERR = 1e-9
DIFF_STEP = 1e-4


@dataclass(frozen=True)
class ACheckRow:
    s: float
    a_ode: float
    a_integral: float
    a_series: float
    residual: float

    @property
    def gap_ode_series(self) -> float:
        return abs(self.a_ode - self.a_series)

    @property
    def gap_ode_integral(self) -> float:
        return abs(self.a_ode - self.a_integral)

    @property
    def gap_series_integral(self) -> float:
        return abs(self.a_series - self.a_integral)

    @property
    def max_gap(self) -> float:
        return max(self.gap_ode_series, self.gap_ode_integral, self.gap_series_integral)


def a_integral(table: SeriesTable, consts: WaveConstants, s: float) -> float:
    """a(s) через интегральное тождество; ω_s берётся из ряда."""
    params = table.params
    mu, beta = params.mu, params.beta
    q = math.sqrt(mu * mu + 2.0 * beta)
    lam = mu - q
    scale = max(1.0, s) ** 2
    upper = math.log(scale / INTEGRAND_FLOOR) / (q - mu)
    B = solve_B(table, consts, s)
    r = params.r

    def integrand(x: float) -> float:
        w = 1.0 - float(eval_phi(table, B * math.exp(-r * x)))
        return w * w * math.exp(lam * x)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-10, limit=200)
        except integrate.IntegrationWarning as e:
            raise QuadratureError(f"квадратура для a({s:g}) не сошлась: {e}") from e
    if abserr > QUAD_ABS_ERR:
        raise QuadratureError(f"квадратура для a({s:g}): оценка ошибки {abserr:.3g}")
    return -(mu + q) * s + 2.0 * beta * value


def a_series(table: SeriesTable, consts: WaveConstants, s: float) -> float:
    return omega_s_prime(table, consts, s, 0.0)


def a_identity_residual(table: SeriesTable, consts: WaveConstants, s: float, h: float = DIFF_STEP) -> float:
    """¼(a²)′ + μa + β(s² − s); (a²)′ разностью второго порядка."""
    params = table.params

    def a2(t: float) -> float:
        return a_series(table, consts, t) ** 2

    if s - h < 0:
        derivative = (-3.0 * a2(s) + 4.0 * a2(s + h) - a2(s + 2 * h)) / (2 * h)
    elif s + h > consts.s0:
        derivative = (3.0 * a2(s) - 4.0 * a2(s - h) + a2(s - 2 * h)) / (2 * h)
    else:
        derivative = (a2(s + h) - a2(s - h)) / (2 * h)
    a = a_series(table, consts, s)
    return 0.25 * derivative + params.mu * a + params.beta * (s * s - s)


def a_of_s_checks(
    params: ModelParams,
    s_grid: list[float],
    table: SeriesTable | None = None,
    consts: WaveConstants | None = None,
) -> list[ACheckRow]:
    """Таблица a(s): ОДУ, интеграл, ряд и невязка тождества."""
    params.require_regime_c("a_of_s_checks")
    if table is None:
        table = build_coefficients(params)
    if consts is None:
        consts = find_wave_constants(table)

    rows = []
    for s in s_grid:
        s = min(float(s), consts.s0)
        solution = solve_omega(params, s, s0=consts.s0)
        row = ACheckRow(
            s=s,
            a_ode=solution.launch_slope,
            a_integral=a_integral(table, consts, s),
            a_series=a_series(table, consts, s),
            residual=a_identity_residual(table, consts, s),
        )
        logger.info(
            f"a({s:.6g}): ОДУ={row.a_ode:.8f}, интеграл={row.a_integral:.8f}, "
            f"ряд={row.a_series:.8f}, невязка={row.residual:.2e}"
        )
        rows.append(row)
    return rows
