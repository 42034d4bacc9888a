import logging

from cli.filters import ANY_REGIME, RegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from series import build_rescaled_limit, eval_psi, s0_limit_curve


logger = logging.getLogger(__name__)

regime_filter = RegimeFilter(ANY_REGIME, "s0-curve")

# контрольные точки Ψ⁽⁰⁾
PSI0_CHECKPOINTS = (-3.0, -2.5)


def handle(config: RunConfig, out: OutputDir) -> dict:
    """s0 и p·s0 вдоль μ/√β; предел p → 0."""
    curve = s0_limit_curve(config.ratios, config.n_max)
    out.records("s0_curve.csv", sorted(curve.points, key=lambda pt: pt.ratio))

    limit_table = build_rescaled_limit(config.n_max)
    p_s0 = [pt.p_s0 for pt in sorted(curve.points, key=lambda pt: pt.ratio)]
    approaching = all(abs(b - curve.limit) < abs(a - curve.limit) for a, b in zip(p_s0, p_s0[1:]))

    summary = {
        "n_ratios": len(curve.points),
        "s0_increasing": curve.increasing,
        "p_s0_approaches_limit": approaching,
        "m0": curve.m0,
        "psi0_at_m0": curve.psi0_at_m0,
        "limit": curve.limit,
        "sign_discrepancy": curve.sign_discrepancy,
        "seed_max_p0": limit_table.seed_max,
    }
    for w in PSI0_CHECKPOINTS:
        summary[f"psi0({w:g})"] = float(eval_psi(limit_table, w))
    if curve.sign_discrepancy:
        logger.info("p·s0 > 0, а Ψ⁽⁰⁾(m⁽⁰⁾) < 0: предел сравнивается по модулю")
    return summary
