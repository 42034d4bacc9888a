import logging

import numpy as np

from cli.filters import REGIME_C, RegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from series import build_coefficients, eval_phi, find_wave_constants


logger = logging.getLogger(__name__)

regime_filter = RegimeFilter(REGIME_C, "series")

PHI_POINTS = 801
PHI_EDGE = 0.95


def handle(config: RunConfig, out: OutputDir) -> dict:
    """Коэффициенты ряда, Φ на отрезке и константы s0, B0, B_s0."""
    params = config.params()
    table = build_coefficients(params, config.n_max)
    consts = find_wave_constants(table)

    out.table("coefficients.csv", {"n": table.orders, "a_n": table.a, "b_n": table.b})

    z = np.linspace(-PHI_EDGE * table.radius_estimate, PHI_EDGE * table.radius_estimate, PHI_POINTS)
    out.table("phi.csv", {"z": z, "phi": eval_phi(table, z)})

    logger.info(f"s0 = {consts.s0:.6f}, B0 = {consts.B0:.6f}, B_s0 = {consts.B_s0:.6f}")
    return {
        "mu": params.mu,
        "beta": params.beta,
        "regime": params.regime,
        "r": params.r,
        "R": params.R_small,
        "p": params.p,
        "n_max": table.n_max,
        "s0": consts.s0,
        "B0": consts.B0,
        "B_s0": consts.B_s0,
        "m_p": consts.m_p,
        "radius_estimate": table.radius_estimate,
        "truncation_bound": consts.truncation_bound,
        "seed_max": table.seed_max,
        "small_p_bound": table.small_p_bound,
    }
