from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Настройки по умолчанию из переменных окружения (префикс BBMLAB_)."""

    # Вывод
    output_dir: str = "runs"
    log_level: str = "INFO"

    # Реестр запусков (SQLite в каталоге вывода, если url пуст)
    registry_enabled: bool = True
    registry_url: str = ""

    # Ряды и ОДУ
    n_max: int = 200
    ode_rtol: float = 1e-10
    shoot_tol: float = 1e-12

    # Монте-Карло
    mc_epsilon: float = 1e-6
    mc_replicas: int = 100_000
    mc_batch_size: int = 10_000
    mc_population_cap: int = 100_000
    mc_k_cap: int = 1_000_000
    mc_horizon: float = float("inf")
    threads: int = 1
    seed: int = 20240101

    # Уравнение в частных производных
    pde_dx: float = 0.02
    pde_horizon: float = 400.0

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "BBMLAB_"
        extra = "ignore"


@lru_cache
def get_settings() -> Settings:
    """Получить закэшированный экземпляр настроек."""
    return Settings()
