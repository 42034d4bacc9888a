import logging

import numpy as np

from cli.filters import ANY_REGIME, RegimeFilter
from cli.output import OutputDir
from cli.run_config import RunConfig
from pde import relax, run_front


logger = logging.getLogger(__name__)

regime_filter = RegimeFilter(ANY_REGIME, "pde")


def handle(config: RunConfig, out: OutputDir) -> dict:
    """Режим C: релаксация к ω_s; режимы A/B: фронт и подгонка m_½(t)."""
    params = config.params()
    summary: dict = {"mu": params.mu, "beta": params.beta, "regime": params.regime, "horizon": config.horizon}

    if params.in_regime_c:
        result = relax(
            params,
            config.s,
            config.horizon,
            dx=config.dx,
            dt=config.dt,
            snapshot_times=tuple(config.snapshot_times),
            scheme=config.scheme,
        )
        out.table("relaxation.csv", {"t": result.times, "sup_distance": result.distances})
        x = result.state.x
        for t, u in sorted(result.snapshots.items()):
            out.table(f"snapshot_t{t:g}.csv", {"x": x[: u.size], "u": u})
        out.table("final_profile.csv", {"x": x, "u": result.state.u})
        summary["s"] = config.s
        summary["final_sup_distance"] = float(result.distances[-1])
        summary["monotone_relaxation"] = bool(np.all(np.diff(result.distances) <= 1e-9))
        return summary

    trace = run_front(params, config.horizon, dx=config.dx, dt=config.dt, scheme=config.scheme)
    out.table("front.csv", {"t": trace.times, "m_half": trace.half_positions})
    out.table("final_profile.csv", {"x": trace.final_state.x, "u": trace.final_state.u})
    summary.update(
        {
            "fitted_speed": trace.fitted_speed,
            "expected_speed": trace.expected_speed,
            "fitted_log_coeff": trace.fitted_log_coeff,
            "expected_log_coeff": trace.expected_log_coeff,
            "fitted_constant": trace.fitted_constant,
            "shape_distance": trace.shape_distance,
        }
    )
    return summary
