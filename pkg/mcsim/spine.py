"""
Хребет под мерой Q в обращённом времени.

Y выходит из 0 и решает dY = dB + ν·coth(νY)dt, ν = √(μ² − 2β)
(dY = dB + dt/Y в критическом случае). Точки ветвления - пуассоновский
процесс интенсивности 2β; из каждой Y(t_i) запускается независимое ВБД
под P, K_Q = 1 + Σ K̃_i. При x_stop < ∞ учитываются только запуски до
последнего момента τ_x, когда Y ≤ x_stop.
"""

import math
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from tqdm import tqdm

from model.errors import InvalidParameterError, SpineHorizonError
from model.params import ModelParams
from mcsim.engine import OVERFLOW, McSettings, StopReason, run_batch
from mcsim.estimators import McEstimate, Tally
from mcsim.rng import STREAM_SPINE, replica_stream


logger = logging.getLogger(__name__)

SPINE_HORIZON = 1e4
Y_FLOOR = 1e-12
DEFAULT_SPINE_BATCH = 2_000


def spine_residual(params: ModelParams, y: float) -> float:
    """
    Ожидаемое число поглощений от запусков после первого достижения уровня y.

    При ν > 0 учитывается и возврат хребта ниже y (вклад ~e^{−2νy});
    в критическом случае - только движение вверх.
    """
    r, beta = params.r, params.beta
    nu = params.spine_drift
    if nu > 0:
        forward = math.exp(-r * y) / (r * nu)
        back = math.exp(-2.0 * nu * y) / (nu * (r - 2.0 * nu))
        return 2.0 * beta * (forward + back)
    return 2.0 * beta * 2.0 * (y / r + 1.0 / r ** 2) * math.exp(-r * y)


def spine_stop_level(params: ModelParams, epsilon: float, x_stop: float = math.inf) -> float:
    """Первый уровень, где spine_residual < ε; для конечного x_stop не ниже уровня возврата к x."""
    params.require_regime_c("spine_stop_level")
    if not 0 < epsilon < 1:
        raise InvalidParameterError(f"epsilon должно лежать в (0, 1), получено {epsilon}")

    def excess(y: float) -> float:
        return math.log(spine_residual(params, y)) - math.log(epsilon)

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    y_stop = brentq(excess, 0.0, hi) if excess(0.0) > 0 else 0.0

    if math.isfinite(x_stop):
        nu = params.spine_drift
        if nu > 0:
            y_stop = max(y_stop, x_stop + math.log(1.0 / epsilon) / (2.0 * nu))
        else:
            # возврат бесселя-3 к x с вероятностью x/Y: приближение
            y_stop = max(y_stop, 10.0 * x_stop)
    return y_stop


@dataclass(frozen=True)
class SpineBatch:
    K_Q: np.ndarray          # OVERFLOW, если переполнился хотя бы один запуск
    n_launches: np.ndarray
    y_stop: float


def run_spines(
    params: ModelParams,
    n_spines: int,
    settings: McSettings,
    rng: np.random.Generator,
    x_stop: float = math.inf,
    horizon: float = SPINE_HORIZON,
) -> SpineBatch:
    """Пакет хребтов методом Эйлера–Маруямы с отражением в нуле."""
    params.require_regime_c("run_spines")
    nu = params.spine_drift
    beta = params.beta
    dt = settings.time_step(params)
    y_stop = spine_stop_level(params, settings.epsilon, x_stop)
    sqrt_dt = math.sqrt(dt)

    # старт из 0: бессель-3 в момент dt
    y = sqrt_dt * np.linalg.norm(rng.standard_normal((n_spines, 3)), axis=1)
    alive = y < y_stop
    last_below = np.zeros(n_spines)
    owners, positions, times = [], [], []

    n_steps = int(round(horizon / dt))
    step = 0
    while alive.any():
        if step >= n_steps:
            raise SpineHorizonError(
                f"{np.count_nonzero(alive)} хребтов не достигли уровня {y_stop:.4g} за время {horizon:g}"
            )
        idx = np.flatnonzero(alive)
        yy = y[idx]
        drift = nu / np.tanh(nu * yy) if nu > 0 else 1.0 / yy
        yy = np.maximum(np.abs(yy + drift * dt + sqrt_dt * rng.standard_normal(idx.size)), Y_FLOOR)
        step += 1
        t = step * dt
        y[idx] = yy

        branch = rng.random(idx.size) < 2.0 * beta * dt
        if branch.any():
            owners.append(idx[branch])
            positions.append(yy[branch])
            times.append(np.full(np.count_nonzero(branch), t))
        last_below[idx[yy <= x_stop]] = t
        alive[idx[yy >= y_stop]] = False

    if owners:
        owner = np.concatenate(owners)
        launch = np.concatenate(positions)
        launch_time = np.concatenate(times)
    else:
        owner = np.empty(0, dtype=np.intp)
        launch = np.empty(0)
        launch_time = np.empty(0)

    if math.isfinite(x_stop):
        keep = launch_time <= last_below[owner]
        owner, launch = owner[keep], launch[keep]

    K_Q = np.ones(n_spines, dtype=np.int64)
    n_launches = np.bincount(owner, minlength=n_spines)
    if launch.size:
        launched = run_batch(params, launch, launch.size, settings, rng)
        overflow = launched.stop == StopReason.OVERFLOW
        K_Q += np.bincount(owner[~overflow], weights=launched.K[~overflow], minlength=n_spines).astype(np.int64)
        K_Q[np.unique(owner[overflow])] = OVERFLOW
    return SpineBatch(K_Q=K_Q, n_launches=n_launches, y_stop=y_stop)


def simulate_spine_Q(
    params: ModelParams,
    x_stop: float = math.inf,
    epsilon: float = 1e-6,
    seed: int = 0,
) -> int:
    """Один хребет: K_Q ≥ 1 (или OVERFLOW)."""
    batch = run_spines(params, 1, McSettings(epsilon=epsilon), replica_stream(seed, 0, STREAM_SPINE), x_stop)
    return int(batch.K_Q[0])


def _spine_job(job: tuple) -> SpineBatch:
    params, n, settings, seed, index, x_stop = job
    return run_spines(params, n, settings, replica_stream(seed, index, STREAM_SPINE), x_stop)


def estimate_spine_constant(
    params: ModelParams,
    n_spines: int,
    seed: int,
    settings: McSettings | None = None,
    x_stop: float = math.inf,
    threads: int = 1,
    batch_size: int = DEFAULT_SPINE_BATCH,
    progress: bool = False,
) -> McEstimate:
    """Среднее 1/K_Q; при x_stop = ∞ оценивает B0, иначе (1 − ω(x))·e^{rx}."""
    params.require_regime_c("estimate_spine_constant")
    if settings is None:
        settings = McSettings()
    if n_spines <= 0:
        raise InvalidParameterError(f"число хребтов должно быть положительным, получено {n_spines}")
    if math.isfinite(x_stop):
        logger.warning(f"x_stop={x_stop:g}: τ_x берётся по дискретной траектории, оценка приближённая")

    sizes = [batch_size] * (n_spines // batch_size)
    if n_spines % batch_size:
        sizes.append(n_spines % batch_size)
    jobs = [(params, n, settings, seed, index, x_stop) for index, n in enumerate(sizes)]

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            batches = list(tqdm(executor.map(_spine_job, jobs), total=len(jobs), desc="Q-хребты", disable=not progress))
    else:
        batches = [_spine_job(job) for job in tqdm(jobs, desc="Q-хребты", disable=not progress)]

    K_Q = np.concatenate([batch.K_Q for batch in batches])
    valid = K_Q != OVERFLOW
    tally = Tally.of(1.0 / K_Q[valid])
    estimate = McEstimate(
        n_replicas=n_spines,
        value=tally.mean,
        std_error=tally.std_error,
        seed=seed,
        stopped_by=StopReason.EPSILON_RULE,
        epsilon=settings.epsilon,
        overflow_count=int(np.count_nonzero(~valid)),
    )
    logger.info(
        f"Q-хребты μ={params.mu:g}, β={params.beta:g}, x_stop={x_stop:g}: "
        f"E[1/K_Q] = {estimate.value:.5f} ± {estimate.std_error:.2e}, уровень остановки {batches[0].y_stop:.3f}"
    )
    return estimate
