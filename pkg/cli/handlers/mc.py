import math
import logging

from cli.filters import REGIME_C, McRegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from mcsim import (
    estimate_omega,
    estimate_spine_constant,
    estimate_tail,
    martingale_check,
    mean_K,
    sample_K,
)


logger = logging.getLogger(__name__)

regime_filter = McRegimeFilter(REGIME_C, "mc")


def handle(config: RunConfig, out: OutputDir) -> dict:
    """Оценки по выборке K, гистограмма, мартингал и Q-хребты."""
    params = config.params()
    settings = config.mc_settings()
    sample = sample_K(
        params, config.x0, config.replicas, config.seed, settings, config.threads, progress=config.progress
    )
    summary: dict = {
        "mu": params.mu,
        "beta": params.beta,
        "regime": params.regime,
        "x0": config.x0,
        "replicas": config.replicas,
        "seed": config.seed,
        "epsilon": settings.epsilon,
        "dt": settings.time_step(params),
        "stopped_by": sample.stopped_by,
        "overflow_count": sample.overflow_count,
    }

    if not params.in_regime_c:
        # конечный горизонт: P(K(t) = 0)
        estimate = sample.estimate((sample.K[sample.valid] == 0).astype(float))
        summary["p_no_absorption"] = estimate.value
        summary["p_no_absorption_se"] = estimate.std_error
        return summary

    omega = estimate_omega(params, config.x0, config.s, config.replicas, config.seed, sample=sample)
    summary["s"] = config.s
    summary["omega_s"] = omega.value
    summary["omega_s_se"] = omega.std_error
    summary["unstable_count"] = omega.unstable_count
    k_mean = mean_K(params, config.x0, config.replicas, config.seed, sample=sample)
    summary["mean_K"] = k_mean.value
    summary["mean_K_se"] = k_mean.std_error
    summary["mean_K_expected"] = math.exp(-params.r * config.x0)
    summary["bias_bound"] = sample.bias_bound

    if config.n_tail:
        histogram = estimate_tail(params, config.x0, config.replicas, range(config.n_tail + 1), config.seed, sample=sample)
        out.records("histogram.csv", histogram.rows)
        summary["pmf_total_mass"] = histogram.total_mass
        summary["widened_uncertainty"] = histogram.widened_uncertainty

    if config.martingale_times:
        report = martingale_check(
            params, config.x0, config.martingale_times, config.replicas, config.seed, settings, config.threads
        )
        out.rows(
            "martingale.csv",
            ["t", "mean_Z", "std_error", "expected", "ok"],
            ([row.t, row.mean, row.std_error, row.expected, row.ok] for row in report.rows),
        )
        summary["martingale_passed"] = report.passed
        summary["terminal_gap"] = report.terminal_gap

    if config.spines:
        spine = estimate_spine_constant(
            params, config.spines, config.seed, settings, threads=config.threads, progress=config.progress
        )
        summary["spine_inverse_K"] = spine.value
        summary["spine_inverse_K_se"] = spine.std_error
    return summary
