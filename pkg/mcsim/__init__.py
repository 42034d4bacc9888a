from mcsim.rng import replica_stream
from mcsim.engine import (
    OVERFLOW,
    BatchResult,
    McSettings,
    ParticleSystem,
    StopReason,
    default_time_step,
    run_batch,
    simulate_K,
)
from mcsim.estimators import (
    KSample,
    MartingaleReport,
    McEstimate,
    ShiftReport,
    Tally,
    TailHistogram,
    estimate_omega,
    estimate_tail,
    martingale_check,
    mean_K,
    sample_K,
    shift_check,
)
from mcsim.spine import (
    estimate_spine_constant,
    run_spines,
    simulate_spine_Q,
    spine_residual,
    spine_stop_level,
)

__all__ = [
    "replica_stream",
    "OVERFLOW",
    "BatchResult",
    "McSettings",
    "ParticleSystem",
    "StopReason",
    "default_time_step",
    "run_batch",
    "simulate_K",
    "KSample",
    "MartingaleReport",
    "McEstimate",
    "ShiftReport",
    "Tally",
    "TailHistogram",
    "estimate_omega",
    "estimate_tail",
    "martingale_check",
    "mean_K",
    "sample_K",
    "shift_check",
    "estimate_spine_constant",
    "run_spines",
    "simulate_spine_Q",
    "spine_residual",
    "spine_stop_level",
]
