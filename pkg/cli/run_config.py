"""
Конфигурация запуска: значения по умолчанию из Settings < флаги < файл --config.
"""

import json
import math
import tomllib
import logging
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import Settings
from mcsim import McSettings
from model import ModelParams, classify
from model.errors import InvalidParameterError
from pde import Scheme


logger = logging.getLogger(__name__)

DEFAULT_RATIOS = [1.5, 2.0, 3.0, 4.0, 6.0]
DEFAULT_X_POINTS = [0.5, 1.0, 2.0]


class Subcommand(str, Enum):
    SERIES = "series"
    WAVES = "waves"
    PDE = "pde"
    MC = "mc"
    S0_CURVE = "s0-curve"
    CROSSCHECK = "crosscheck"


class RunConfig(BaseModel):
    """Полностью разрешённые параметры одного запуска."""
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="constants")

    subcommand: Subcommand
    mu: float | None = None
    beta: float = Field(1.0, gt=0)

    # series / waves
    n_max: int = Field(200, ge=20)
    tol: float = Field(1e-12, gt=0)
    rtol: float = Field(1e-10, gt=0)
    s_values: list[float] | None = None

    # pde
    s: float = Field(0.0, ge=0)
    dx: float = Field(0.02, gt=0)
    dt: float | None = Field(None, gt=0)
    horizon: float | None = Field(None, gt=0)
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    snapshot_times: list[float] = []

    # mc
    x0: float = Field(1.0, gt=0)
    replicas: int = Field(100_000, gt=0)
    epsilon: float = Field(1e-6, gt=0, lt=1)
    seed: int = Field(0, ge=0)
    threads: int = Field(1, gt=0)
    batch_size: int = Field(10_000, gt=0)
    population_cap: int = Field(100_000, gt=0)
    k_cap: int = Field(1_000_000, gt=0)
    mc_horizon: float = Field(math.inf, gt=0)
    n_tail: int = Field(0, ge=0)
    martingale_times: list[float] = []
    spines: int = Field(0, ge=0)

    # s0-curve / crosscheck
    ratios: list[float] = DEFAULT_RATIOS
    x_points: list[float] = DEFAULT_X_POINTS

    output_dir: Path
    log_level: str = "INFO"
    registry: bool = True
    progress: bool = False

    @field_validator("mu")
    @classmethod
    def mu_finite(cls, value: float | None) -> float | None:
        if value is not None and not math.isfinite(value):
            raise ValueError("μ должно быть конечным")
        return value

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in logging.getLevelNamesMapping():
            raise ValueError(f"неизвестный уровень логирования {value}")
        return value

    @model_validator(mode="after")
    def mu_required(self) -> "RunConfig":
        if self.mu is None and self.subcommand is not Subcommand.S0_CURVE:
            raise ValueError(f"подкоманде {self.subcommand.value} нужен --mu")
        return self

    def params(self) -> ModelParams:
        return classify(self.mu, self.beta)

    def mc_settings(self) -> McSettings:
        return McSettings(
            epsilon=self.epsilon,
            dt=self.dt if self.subcommand is Subcommand.MC else None,
            horizon=self.mc_horizon,
            population_cap=self.population_cap,
            k_cap=self.k_cap,
            batch_size=self.batch_size,
        )

    def resolved(self) -> dict[str, Any]:
        """Все значения в JSON-совместимом виде (для манифеста и реестра)."""
        return self.model_dump(mode="json")


def settings_defaults(settings: Settings) -> dict[str, Any]:
    return {
        "n_max": settings.n_max,
        "tol": settings.shoot_tol,
        "rtol": settings.ode_rtol,
        "dx": settings.pde_dx,
        "epsilon": settings.mc_epsilon,
        "replicas": settings.mc_replicas,
        "seed": settings.seed,
        "threads": settings.threads,
        "batch_size": settings.mc_batch_size,
        "population_cap": settings.mc_population_cap,
        "k_cap": settings.mc_k_cap,
        "mc_horizon": settings.mc_horizon,
        "output_dir": settings.output_dir,
        "log_level": settings.log_level,
        "registry": settings.registry_enabled,
    }


def load_config_file(path: Path) -> dict[str, Any]:
    """TOML или JSON; ключи как у RunConfig, дефисы допускаются."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidParameterError(f"не удалось прочитать {path}: {e}") from e
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise InvalidParameterError(f"{path}: ошибка разбора: {e}") from e
    if not isinstance(data, dict):
        raise InvalidParameterError(f"{path}: ожидалась таблица ключ-значение")
    return {key.replace("-", "_"): value for key, value in data.items()}


def build_run_config(flags: dict[str, Any], settings: Settings, config_file: Path | None = None) -> RunConfig:
    """Слить значения по приоритету и провалидировать."""
    values = settings_defaults(settings)
    values.update({key: value for key, value in flags.items() if value is not None})
    if config_file is not None:
        values.update(load_config_file(config_file))
    try:
        config = RunConfig.model_validate(values)
    except ValidationError as e:
        raise InvalidParameterError(f"некорректная конфигурация: {e}") from e
    if config.horizon is None and config.subcommand is Subcommand.PDE:
        config = config.model_copy(update={"horizon": settings.pde_horizon})
    logger.debug(f"Конфигурация: {config.resolved()}")
    return config
