"""
Оценки по выборке K(∞): ω_s, распределение K, среднее K и мартингал Z.

Все оценки строятся из одной выборки sample_K, поэтому при одном seed
P̂(K=0) и estimate_omega(s=0) совпадают реплика в реплику.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from model.errors import InvalidParameterError, NoFiniteMomentError
from model.params import ModelParams, Regime
from mcsim.engine import OVERFLOW, BatchResult, McSettings, StopReason, run_batch
from mcsim.rng import replica_stream


logger = logging.getLogger(__name__)

# s^K выше этого порога при s > 1 не усредняется
UNSTABLE_SUMMAND = 1e12
MIN_TAIL_HITS = 100
N_SIGMA = 3.0


@dataclass(frozen=True)
class Tally:
    """Ассоциативная свёртка (count, Σx, Σx²)."""
    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "Tally":
        values = np.asarray(values, dtype=float)
        return cls(int(values.size), float(values.sum()), float(np.square(values).sum()))

    def merge(self, other: "Tally") -> "Tally":
        return Tally(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    __add__ = merge

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else math.nan

    @property
    def std_error(self) -> float:
        """Выборочное стандартное отклонение / √n."""
        if self.count < 2:
            return 0.0
        variance = (self.total_sq - self.count * self.mean ** 2) / (self.count - 1)
        return math.sqrt(max(variance, 0.0) / self.count)


@dataclass(frozen=True)
class McEstimate:
    n_replicas: int
    value: float
    std_error: float
    seed: int
    stopped_by: StopReason
    epsilon: float
    overflow_count: int = 0
    unstable_count: int = 0
    bias_bound: float = 0.0   # среднее Z_live + Z_pruned, при правиле ε меньше ε

    @property
    def unstable(self) -> bool:
        return self.unstable_count > 0

    def within(self, reference: float, n_sigma: float = N_SIGMA) -> bool:
        return abs(self.value - reference) <= n_sigma * self.std_error

    def as_dict(self) -> dict:
        return {
            "n_replicas": self.n_replicas,
            "value": self.value,
            "std_error": self.std_error,
            "seed": self.seed,
            "stopped_by": self.stopped_by.name,
            "epsilon": self.epsilon,
            "overflow_count": self.overflow_count,
            "unstable_count": self.unstable_count,
            "bias_bound": self.bias_bound,
        }


@dataclass(frozen=True)
class KSample:
    """Выборка по репликам в порядке пакетов."""
    params: ModelParams
    x0: float
    seed: int
    settings: McSettings
    K: np.ndarray
    stop: np.ndarray
    stop_time: np.ndarray
    z_live: np.ndarray
    z_pruned: np.ndarray
    checkpoints: np.ndarray
    z_frozen: np.ndarray

    @property
    def n_replicas(self) -> int:
        return self.K.size

    @property
    def valid(self) -> np.ndarray:
        return self.K != OVERFLOW

    @property
    def overflow_count(self) -> int:
        return int(np.count_nonzero(~self.valid))

    @property
    def stopped_by(self) -> StopReason:
        return StopReason(int(np.bincount(self.stop, minlength=len(StopReason)).argmax()))

    @property
    def bias_bound(self) -> float:
        """Среднее Z_live + Z_pruned на момент остановки: оценка |E K(∞) − E K|."""
        residual = self.z_live[self.valid] + self.z_pruned[self.valid]
        return float(residual.mean()) if residual.size else math.nan

    def estimate(self, values: np.ndarray, unstable_count: int = 0) -> McEstimate:
        tally = Tally.of(values)
        return McEstimate(
            n_replicas=self.n_replicas,
            value=tally.mean,
            std_error=tally.std_error,
            seed=self.seed,
            stopped_by=self.stopped_by,
            epsilon=self.settings.epsilon,
            overflow_count=self.overflow_count,
            unstable_count=unstable_count,
            bias_bound=self.bias_bound,
        )


def _batch_job(job: tuple) -> BatchResult:
    params, x0, n, settings, seed, index, checkpoints = job
    return run_batch(params, x0, n, settings, replica_stream(seed, index), checkpoints)


def sample_K(
    params: ModelParams,
    x0: float,
    n_replicas: int,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
    checkpoints=(),
    progress: bool = False,
) -> KSample:
    """
    Выборка K(∞) (или K(horizon)) по n_replicas репликам.

    Пакет b берёт поток replica_stream(seed, b); результат не зависит от threads.
    """
    if settings is None:
        settings = McSettings()
    if n_replicas <= 0:
        raise InvalidParameterError(f"число реплик должно быть положительным, получено {n_replicas}")
    if threads <= 0:
        raise InvalidParameterError(f"threads должно быть положительным, получено {threads}")
    if params.regime is Regime.C_CRITICAL and not math.isfinite(settings.horizon):
        # E[Z_live(t)] ~ t^{−1/2}: правило ε достижимо лишь за время порядка ε^{−2}
        logger.warning("Критический случай без горизонта: большинство реплик остановится по переполнению")

    sizes = [settings.batch_size] * (n_replicas // settings.batch_size)
    if n_replicas % settings.batch_size:
        sizes.append(n_replicas % settings.batch_size)
    jobs = [(params, x0, n, settings, seed, index, tuple(checkpoints)) for index, n in enumerate(sizes)]
    desc = f"MC x0={x0:g}"

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            results = list(tqdm(executor.map(_batch_job, jobs), total=len(jobs), desc=desc, disable=not progress))
    else:
        results = [_batch_job(job) for job in tqdm(jobs, desc=desc, disable=not progress)]

    sample = KSample(
        params=params,
        x0=x0,
        seed=seed,
        settings=settings,
        K=np.concatenate([res.K for res in results]),
        stop=np.concatenate([res.stop for res in results]),
        stop_time=np.concatenate([res.stop_time for res in results]),
        z_live=np.concatenate([res.z_live for res in results]),
        z_pruned=np.concatenate([res.z_pruned for res in results]),
        checkpoints=results[0].checkpoints,
        z_frozen=np.concatenate([res.z_frozen for res in results], axis=1),
    )
    if sample.overflow_count:
        logger.warning(f"{sample.overflow_count} реплик из {n_replicas} переполнены (K или популяция)")
    logger.debug(f"Выборка K: {n_replicas} реплик, {len(jobs)} пакетов, seed={seed}")
    return sample


def _series_s0(params: ModelParams) -> float:
    from series import build_coefficients, find_wave_constants

    return find_wave_constants(build_coefficients(params)).s0


def estimate_omega(
    params: ModelParams,
    x0: float,
    s: float,
    n_replicas: int,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
    sample: KSample | None = None,
    s0: float | None = None,
    progress: bool = False,
) -> McEstimate:
    """Среднее s^K по репликам; при s = 0 это P̂(K = 0) = ω(x0)."""
    params.require_regime_c("estimate_omega")
    if s < 0:
        raise InvalidParameterError(f"s должно быть ≥ 0, получено {s}")
    if s > 1.0:
        if s0 is None:
            s0 = _series_s0(params)
        if s > s0:
            raise NoFiniteMomentError(s, s0)
    if sample is None:
        sample = sample_K(params, x0, n_replicas, seed, settings, threads, progress=progress)

    K = sample.K[sample.valid].astype(float)
    with np.errstate(over="ignore"):
        values = np.power(float(s), K)
    unstable = values > UNSTABLE_SUMMAND
    unstable_count = int(np.count_nonzero(unstable))
    if unstable_count:
        logger.warning(f"s={s:g}: {unstable_count} слагаемых s^K > {UNSTABLE_SUMMAND:g}, оценка неустойчива")
        values = values[~unstable]
    return sample.estimate(values, unstable_count)


def mean_K(
    params: ModelParams,
    x0: float,
    n_replicas: int,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
    sample: KSample | None = None,
) -> McEstimate:
    """Среднее K(∞); E^x[K(∞)] = e^{−rx}. bias_bound - средний остаточный вес."""
    params.require_regime_c("mean_K")
    if sample is None:
        sample = sample_K(params, x0, n_replicas, seed, settings, threads)
    return sample.estimate(sample.K[sample.valid])


@dataclass(frozen=True)
class TailRow:
    n: int
    count: int
    phat: float
    stderr: float
    prediction: float


@dataclass(frozen=True)
class TailHistogram:
    rows: list[TailRow]
    pmf: np.ndarray          # P̂(K = n) для всех наблюдённых n
    n_valid: int
    widened_uncertainty: bool

    @property
    def total_mass(self) -> float:
        return float(self.pmf.sum())

    def row(self, n: int) -> TailRow:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(n)

    def ratio(self, n: int) -> float:
        """P̂(K = n+1) / P̂(K = n)."""
        return self.row(n + 1).phat / self.row(n).phat


def estimate_tail(
    params: ModelParams,
    x0: float,
    n_replicas: int,
    n_range: range,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
    sample: KSample | None = None,
    progress: bool = False,
) -> TailHistogram:
    """Эмпирическое распределение K(∞) с асимптотикой хвоста из ряда."""
    params.require_regime_c("estimate_tail")
    from series import build_coefficients, find_wave_constants, omega_s, omega_s_prime, tail_prediction

    if sample is None:
        sample = sample_K(params, x0, n_replicas, seed, settings, threads, progress=progress)
    K = sample.K[sample.valid]
    n_valid = K.size
    counts = np.bincount(K)
    pmf = counts / n_valid

    table = build_coefficients(params)
    consts = find_wave_constants(table)
    deriv = float(omega_s_prime(table, consts, consts.s0, x0))

    rows = []
    for n in n_range:
        count = int(counts[n]) if n < counts.size else 0
        phat = count / n_valid
        if n == 0:
            prediction = float(omega_s(table, consts, 0.0, x0))
        else:
            prediction = tail_prediction(consts, deriv, n)
        rows.append(
            TailRow(
                n=n,
                count=count,
                phat=phat,
                stderr=math.sqrt(phat * (1.0 - phat) / n_valid),
                prediction=prediction,
            )
        )
    widened = bool(rows) and rows[-1].count < MIN_TAIL_HITS
    if widened:
        logger.warning(f"При n={rows[-1].n} всего {rows[-1].count} попаданий (< {MIN_TAIL_HITS}): погрешность занижена")
    return TailHistogram(rows=rows, pmf=pmf, n_valid=n_valid, widened_uncertainty=widened)


@dataclass(frozen=True)
class MartingaleRow:
    t: float
    mean: float
    std_error: float
    expected: float

    @property
    def ok(self) -> bool:
        return abs(self.mean - self.expected) <= N_SIGMA * self.std_error + 1e-12


@dataclass(frozen=True)
class MartingaleReport:
    rows: list[MartingaleRow]
    terminal_gap: float   # max (Z_live + Z_pruned) = max |Z − K| среди остановленных по правилу ε
    epsilon: float

    @property
    def passed(self) -> bool:
        return all(row.ok for row in self.rows) and self.terminal_gap < self.epsilon


def martingale_check(
    params: ModelParams,
    x0: float,
    t_checkpoints,
    n_replicas: int,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
) -> MartingaleReport:
    """Среднее Z_frozen(t) против e^{−r·x0} в контрольных точках."""
    params.require_regime_c("martingale_check")
    if settings is None:
        settings = McSettings()
    checkpoints = sorted({0.0, *map(float, t_checkpoints)})
    sample = sample_K(params, x0, n_replicas, seed, settings, threads, checkpoints=checkpoints)
    expected = math.exp(-params.r * x0)

    rows = []
    valid = sample.valid
    for t, z in zip(sample.checkpoints, sample.z_frozen):
        tally = Tally.of(z[valid])
        rows.append(MartingaleRow(t=float(t), mean=tally.mean, std_error=tally.std_error, expected=expected))
        logger.info(f"Z({t:g}): {tally.mean:.6f} ± {tally.std_error:.2e} (ожидается {expected:.6f})")

    by_epsilon = sample.stop == StopReason.EPSILON_RULE
    residual = sample.z_live[by_epsilon] + sample.z_pruned[by_epsilon]
    terminal_gap = float(residual.max()) if residual.size else 0.0
    return MartingaleReport(rows=rows, terminal_gap=terminal_gap, epsilon=settings.epsilon)


@dataclass(frozen=True)
class ShiftReport:
    h: float
    omega_h: float
    direct: McEstimate     # P̂(K = 0 из x + h)
    shifted: McEstimate    # среднее ω(h)^K из x

    @property
    def gap(self) -> float:
        return abs(self.direct.value - self.shifted.value)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.direct.std_error, self.shifted.std_error)

    @property
    def passed(self) -> bool:
        return self.gap <= N_SIGMA * self.combined_se


def shift_check(
    params: ModelParams,
    x: float,
    h: float,
    n_replicas: int,
    seed: int,
    settings: McSettings | None = None,
    threads: int = 1,
) -> ShiftReport:
    """P̂(K=0 из x+h) против среднего ω_0(h)^{K из x}."""
    params.require_regime_c("shift_check")
    if h <= 0:
        raise InvalidParameterError(f"сдвиг h должен быть положительным, получено {h}")
    from series import build_coefficients, find_wave_constants, omega_s

    table = build_coefficients(params)
    omega_h = float(omega_s(table, find_wave_constants(table), 0.0, h))
    direct = estimate_omega(params, x + h, 0.0, n_replicas, seed, settings, threads)
    shifted = estimate_omega(params, x, omega_h, n_replicas, seed + 1, settings, threads)
    report = ShiftReport(h=h, omega_h=omega_h, direct=direct, shifted=shifted)
    logger.info(
        f"Сдвиг h={h:g}: P̂(K=0 | x+h)={direct.value:.5f}, E[ω(h)^K | x]={shifted.value:.5f}, "
        f"разрыв {report.gap:.2e} при σ={report.combined_se:.2e}"
    )
    return report
