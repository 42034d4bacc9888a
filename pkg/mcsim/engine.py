"""
Ветвящееся броуновское движение со сносом μ и поглощением в нуле.

Пакет реплик хранится в одном массиве частиц с индексом владельца owner.
Шаг dt: гауссово приращение, поглощение по знаку конца шага или по
вероятности пересечения мостом exp(−2ab/dt), затем деление с вероятностью β·dt.

В режиме C самые лёгкие частицы реплики снимаются, пока их суммарный вес
z_pruned не превышает PRUNE_SHARE·ε; реплика останавливается, когда
Z_live + z_pruned < ε, так что |Z − K| < ε в момент остановки.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from model.errors import InvalidParameterError
from model.params import ModelParams
from mcsim.rng import replica_stream


logger = logging.getLogger(__name__)

OVERFLOW = -1
DEFAULT_EPSILON = 1e-6
DEFAULT_POPULATION_CAP = 100_000
DEFAULT_K_CAP = 1_000_000
DEFAULT_BATCH_SIZE = 10_000
STEP_FACTOR = 0.01
# доля ε, которую реплика может снять отсечением лёгких частиц
PRUNE_SHARE = 0.5


class StopReason(IntEnum):
    EPSILON_RULE = 0
    EXTINCTION = 1
    HORIZON = 2
    OVERFLOW = 3


def default_time_step(params: ModelParams) -> float:
    """dt = min(0.01/β, 0.01/μ², 0.01/r²)."""
    candidates = [STEP_FACTOR / params.beta]
    if params.mu != 0.0:
        candidates.append(STEP_FACTOR / params.mu ** 2)
    if params.r is not None:
        candidates.append(STEP_FACTOR / params.r ** 2)
    return min(candidates)


@dataclass(frozen=True)
class McSettings:
    epsilon: float = DEFAULT_EPSILON
    dt: float | None = None
    horizon: float = math.inf
    population_cap: int = DEFAULT_POPULATION_CAP
    k_cap: int = DEFAULT_K_CAP
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if self.epsilon < 0:
            raise InvalidParameterError(f"epsilon должно быть ≥ 0, получено {self.epsilon}")
        if self.dt is not None and self.dt <= 0:
            raise InvalidParameterError(f"dt должно быть положительным, получено {self.dt}")
        if self.horizon <= 0:
            raise InvalidParameterError(f"горизонт должен быть положительным, получено {self.horizon}")
        if self.population_cap <= 0 or self.k_cap <= 0 or self.batch_size <= 0:
            raise InvalidParameterError("population_cap, k_cap и batch_size должны быть положительными")

    def time_step(self, params: ModelParams) -> float:
        return self.dt if self.dt is not None else default_time_step(params)


@dataclass
class ParticleSystem:
    """Живые частицы пакета реплик."""
    params: ModelParams
    positions: np.ndarray
    owner: np.ndarray
    K: np.ndarray
    z_pruned: np.ndarray
    t: float = 0.0

    @classmethod
    def start(cls, params: ModelParams, x0: np.ndarray) -> "ParticleSystem":
        n = x0.size
        return cls(
            params=params,
            positions=x0.astype(float),
            owner=np.arange(n),
            K=np.zeros(n, dtype=np.int64),
            z_pruned=np.zeros(n),
        )

    @property
    def n_replicas(self) -> int:
        return self.K.size

    def population(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.n_replicas)

    def weights(self) -> np.ndarray:
        return np.exp(-self.params.r * self.positions)

    def z_live(self) -> np.ndarray:
        """Σ e^{−rX} по живым частицам каждой реплики."""
        return np.bincount(self.owner, weights=self.weights(), minlength=self.n_replicas)

    def advance(self, rng: np.random.Generator, dt: float) -> None:
        pos = self.positions
        m = pos.size
        self.t += dt
        if m == 0:
            return

        new = pos + self.params.mu * dt + math.sqrt(dt) * rng.standard_normal(m)
        u = rng.random(m)
        absorbed = new <= 0.0
        inside = ~absorbed
        # мост a → b пересекает 0 с вероятностью exp(−2ab/dt)
        absorbed[inside] = u[inside] < np.exp(-2.0 * pos[inside] * new[inside] / dt)
        if absorbed.any():
            self.K += np.bincount(self.owner[absorbed], minlength=self.n_replicas)

        keep = ~absorbed
        pos = new[keep]
        owner = self.owner[keep]
        split = rng.random(pos.size) < self.params.beta * dt
        if split.any():
            copies = 1 + split.astype(np.intp)
            pos = np.repeat(pos, copies)
            owner = np.repeat(owner, copies)
        self.positions = pos
        self.owner = owner

    def prune(self, budget: float) -> np.ndarray:
        """
        Снять самые лёгкие частицы каждой реплики, пока её z_pruned ≤ budget.

        Частицы упорядочены по (реплика, вес); снимается префикс каждой группы,
        сумма которого вместе с уже снятым не превышает budget. Вернуть веса оставшихся.
        """
        w = self.weights()
        candidates = np.flatnonzero(w <= budget)
        if candidates.size == 0:
            return w
        order = candidates[np.lexsort((w[candidates], self.owner[candidates]))]
        owner, ws = self.owner[order], w[order]
        running = np.cumsum(ws)
        starts = np.r_[True, owner[1:] != owner[:-1]]
        group = np.cumsum(starts) - 1
        within = running - (running - ws)[starts][group]
        retire = order[self.z_pruned[owner] + within <= budget]
        if retire.size:
            self.z_pruned += np.bincount(self.owner[retire], weights=w[retire], minlength=self.n_replicas)
            keep = np.ones(w.size, dtype=bool)
            keep[retire] = False
            self.positions = self.positions[keep]
            self.owner = self.owner[keep]
            w = w[keep]
        return w

    def drop(self, replicas: np.ndarray) -> None:
        """Убрать частицы остановленных реплик (маска по репликам)."""
        keep = ~replicas[self.owner]
        self.positions = self.positions[keep]
        self.owner = self.owner[keep]


@dataclass(frozen=True)
class BatchResult:
    K: np.ndarray            # OVERFLOW для переполненных реплик
    stop: np.ndarray         # коды StopReason
    stop_time: np.ndarray
    z_live: np.ndarray       # Z_live в момент остановки
    z_pruned: np.ndarray
    checkpoints: np.ndarray = field(default_factory=lambda: np.empty(0))
    z_frozen: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))  # [checkpoint, replica]

    @property
    def n_replicas(self) -> int:
        return self.K.size


def run_batch(
    params: ModelParams,
    x0,
    n_replicas: int,
    settings: McSettings,
    rng: np.random.Generator,
    checkpoints=(),
) -> BatchResult:
    """
    Пакет независимых реплик из x0 (число или массив по репликам).

    В checkpoints записывается Z_frozen = K + Z_live + Z_pruned; остановленная
    реплика сохраняет значение на момент остановки.
    """
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n_replicas,)).copy()
    if n_replicas <= 0:
        raise InvalidParameterError(f"число реплик должно быть положительным, получено {n_replicas}")
    if np.any(x0 <= 0):
        raise InvalidParameterError("начальные положения должны быть > 0")

    dt = settings.time_step(params)
    use_epsilon = params.in_regime_c and settings.epsilon > 0
    if not use_epsilon and not math.isfinite(settings.horizon):
        raise InvalidParameterError("без правила ε (режимы A/B или ε = 0) нужен конечный горизонт")
    has_weights = params.r is not None

    system = ParticleSystem.start(params, x0)
    n = n_replicas
    active = np.ones(n, dtype=bool)
    stop = np.full(n, StopReason.HORIZON, dtype=np.int8)
    stop_time = np.full(n, settings.horizon)
    z_live = np.exp(-params.r * x0) if has_weights else np.full(n, np.nan)
    z_live_final = z_live.copy()
    z_total = z_live.copy()

    checkpoints = np.sort(np.asarray(checkpoints, dtype=float))
    z_frozen = np.full((checkpoints.size, n), np.nan)
    next_cp = 0
    while next_cp < checkpoints.size and checkpoints[next_cp] <= 0.5 * dt:
        z_frozen[next_cp] = z_total
        next_cp += 1

    n_steps = int(round(settings.horizon / dt)) if math.isfinite(settings.horizon) else None
    step = 0
    while active.any() and (n_steps is None or step < n_steps):
        system.advance(rng, dt)
        step += 1
        t = step * dt

        if has_weights:
            w = system.prune(PRUNE_SHARE * settings.epsilon) if use_epsilon else system.weights()
            z_live = np.bincount(system.owner, weights=w, minlength=n)
            z_total[active] = system.K[active] + z_live[active] + system.z_pruned[active]
            z_live_final[active] = z_live[active]

        population = system.population()
        overflow = active & ((population > settings.population_cap) | (system.K > settings.k_cap))
        if use_epsilon:
            done = active & ~overflow & (z_live + system.z_pruned < settings.epsilon)
            extinct = done & (population == 0) & (system.z_pruned == 0)
            by_epsilon = done & ~extinct
        else:
            extinct = active & ~overflow & (population == 0)
            by_epsilon = np.zeros(n, dtype=bool)

        finished = overflow | extinct | by_epsilon
        if finished.any():
            stop[overflow] = StopReason.OVERFLOW
            stop[extinct] = StopReason.EXTINCTION
            stop[by_epsilon] = StopReason.EPSILON_RULE
            stop_time[finished] = t
            active &= ~finished
            system.drop(finished)

        while next_cp < checkpoints.size and checkpoints[next_cp] <= t + 0.5 * dt:
            z_frozen[next_cp] = z_total
            next_cp += 1

    z_frozen[next_cp:] = z_total
    K = system.K.copy()
    K[stop == StopReason.OVERFLOW] = OVERFLOW
    return BatchResult(
        K=K,
        stop=stop,
        stop_time=stop_time,
        z_live=z_live_final,
        z_pruned=system.z_pruned.copy(),
        checkpoints=checkpoints,
        z_frozen=z_frozen,
    )


def simulate_K(
    params: ModelParams,
    x0: float,
    epsilon: float = DEFAULT_EPSILON,
    horizon: float = math.inf,
    seed: int = 0,
    dt: float | None = None,
) -> tuple[int, StopReason]:
    """Одна реплика: (K или OVERFLOW, причина остановки)."""
    settings = McSettings(epsilon=epsilon, horizon=horizon, dt=dt)
    result = run_batch(params, x0, 1, settings, replica_stream(seed, 0))
    return int(result.K[0]), StopReason(int(result.stop[0]))
