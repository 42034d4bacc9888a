import logging

import numpy as np

from cli.filters import ANY_REGIME, RegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from model import Regime
from series import build_coefficients, find_wave_constants, omega_s
from waves import a_of_s_checks, find_s0_by_shooting, solve_extinction, solve_hstar, solve_omega


logger = logging.getLogger(__name__)

regime_filter = RegimeFilter(ANY_REGIME, "waves")

# сравнение с рядом на [0, GAP_RANGE/r]
GAP_RANGE = 20.0


def _standing_waves(config: RunConfig, out: OutputDir, summary: dict) -> None:
    params = config.params()
    table = build_coefficients(params, config.n_max)
    consts = find_wave_constants(table)
    s_values = config.s_values if config.s_values is not None else [0.0, 0.5, consts.s0]

    s_col, x_col, ode_col, series_col = [], [], [], []
    for s in s_values:
        s = min(float(s), consts.s0)
        solution = solve_omega(params, s, tol=config.tol, s0=consts.s0, rtol=config.rtol)
        x = solution.grid[solution.grid <= GAP_RANGE / params.r]
        v_ode = solution.values[: x.size]
        v_series = omega_s(table, consts, s, x)
        gap = float(np.max(np.abs(v_ode - v_series)))
        summary[f"gap_series_ode(s={s:.6g})"] = gap
        summary[f"decay_class(s={s:.6g})"] = solution.decay_class
        summary[f"launch_slope(s={s:.6g})"] = solution.launch_slope
        s_col.append(np.full(x.size, s))
        x_col.append(x)
        ode_col.append(v_ode)
        series_col.append(v_series)
        logger.info(f"ω_s при s={s:.6g}: max|ОДУ − ряд| = {gap:.2e}, тип {solution.decay_class.value}")

    ode = np.concatenate(ode_col)
    ser = np.concatenate(series_col)
    out.table(
        "omega.csv",
        {"s": np.concatenate(s_col), "x": np.concatenate(x_col), "v_ode": ode, "v_series": ser, "gap": np.abs(ode - ser)},
    )

    summary["s0_series"] = consts.s0
    summary["s0_shooting"] = find_s0_by_shooting(params, rtol=config.rtol)

    rows = a_of_s_checks(params, list(np.linspace(0.0, consts.s0, 9)), table, consts)
    out.records("a_checks.csv", rows)
    summary["a_checks_max_gap"] = max(row.max_gap for row in rows)
    summary["a_identity_max_residual"] = max(abs(row.residual) for row in rows)


def handle(config: RunConfig, out: OutputDir) -> dict:
    """Стоячие волны (режим C), h_* и волна вымирания."""
    params = config.params()
    summary: dict = {"mu": params.mu, "beta": params.beta, "regime": params.regime}

    if params.in_regime_c:
        _standing_waves(config, out, summary)

    hstar = solve_hstar(params.beta)
    out.table("hstar.csv", {"x": hstar.grid, "h": hstar.values, "h_prime": hstar.derivs})
    summary["hstar_decay_class"] = hstar.decay_class
    summary["hstar_left_rate"] = hstar.log_slope

    if params.regime is not Regime.A:
        theta = solve_extinction(params, tol=config.tol)
        out.table("extinction.csv", {"x": theta.grid, "theta": theta.values, "theta_prime": theta.derivs})
        summary["extinction_slope"] = theta.launch_slope
        summary["extinction_log_slope"] = theta.log_slope
        summary["extinction_rate"] = params.extinction_rate
    return summary
