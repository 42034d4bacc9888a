import math
import logging

import numpy as np

from cli.filters import REGIME_C, RegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from mcsim import estimate_omega, mean_K, sample_K
from mcsim.estimators import N_SIGMA
from model.errors import CrosscheckFailure
from series import build_coefficients, find_wave_constants, omega_s
from waves import solve_omega


logger = logging.getLogger(__name__)

regime_filter = RegimeFilter(REGIME_C, "crosscheck")

ODE_SERIES_TOL = 1e-5
GAP_RANGE = 20.0


def handle(config: RunConfig, out: OutputDir) -> dict:
    """Сравнение ω_s: ряд против ОДУ и против Монте-Карло; FAIL → код 4."""
    params = config.params()
    table = build_coefficients(params, config.n_max)
    consts = find_wave_constants(table)
    s_values = config.s_values if config.s_values is not None else [0.0, 0.5, consts.s0]
    s_values = [min(float(s), consts.s0) for s in s_values]

    rows = []

    for s in s_values:
        solution = solve_omega(params, s, tol=config.tol, s0=consts.s0, rtol=config.rtol)
        mask = solution.grid <= GAP_RANGE / params.r
        series_values = omega_s(table, consts, s, solution.grid[mask])
        gap = float(np.max(np.abs(solution.values[mask] - series_values)))
        # допуск относительный: ω_s принимает значения до s
        tolerance = ODE_SERIES_TOL * max(1.0, s)
        rows.append(["series-ode", s, math.nan, gap, 0.0, gap, tolerance, gap < tolerance])

    # при s² ≥ s0 дисперсия s^K бесконечна, сравнение с МК не проводится
    mc_s_values = [s for s in s_values if s * s < consts.s0]
    skipped = [s for s in s_values if s * s >= consts.s0]
    if skipped:
        logger.warning(f"s = {', '.join(f'{s:g}' for s in skipped)}: Var(s^K) = ∞, МК-сравнение пропущено")

    settings = config.mc_settings()
    for x0 in config.x_points:
        sample = sample_K(params, x0, config.replicas, config.seed, settings, config.threads, progress=config.progress)
        for s in mc_s_values:
            estimate = estimate_omega(params, x0, s, config.replicas, config.seed, sample=sample, s0=consts.s0)
            reference = omega_s(table, consts, s, x0)
            tolerance = N_SIGMA * estimate.std_error
            gap = abs(estimate.value - reference)
            rows.append(["series-mc", s, x0, reference, estimate.value, gap, tolerance, gap <= tolerance])

        k_mean = mean_K(params, x0, config.replicas, config.seed, sample=sample)
        expected = math.exp(-params.r * x0)
        tolerance = N_SIGMA * k_mean.std_error
        gap = abs(k_mean.value - expected)
        rows.append(["mean-K", math.nan, x0, expected, k_mean.value, gap, tolerance, gap <= tolerance])

    out.rows(
        "crosscheck.csv",
        ["check", "s", "x", "value_a", "value_b", "gap", "tolerance", "pass"],
        rows,
    )
    failed = [row for row in rows if not row[-1]]
    for row in failed:
        logger.error(f"FAIL {row[0]} s={row[1]:.6g} x={row[2]:.6g}: разрыв {row[5]:.3e} > {row[6]:.3e}")

    summary = {
        "mu": params.mu,
        "beta": params.beta,
        "s0": consts.s0,
        "checks": len(rows),
        "failed": len(failed),
        "max_series_ode_gap": max(row[5] for row in rows if row[0] == "series-ode"),
        "mc_skipped_s": skipped,
        "status": "PASS" if not failed else "FAIL",
    }
    if failed:
        out.write_summary(summary)
        raise CrosscheckFailure(f"{len(failed)} из {len(rows)} сравнений вне допуска (см. crosscheck.csv)")
    return summary
