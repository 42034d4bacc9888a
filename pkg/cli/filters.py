from model import Regime
from model.errors import UnsupportedRegimeError
from cli.run_config import RunConfig


REGIME_C = frozenset({Regime.C_SUPERCRITICAL, Regime.C_CRITICAL})
ANY_REGIME = frozenset(Regime)


class RegimeFilter:
    """Фильтр: пропускает только конфигурации с допустимым режимом."""

    def __init__(self, allowed: frozenset[Regime], what: str):
        self.allowed = allowed
        self.what = what

    def __call__(self, config: RunConfig) -> bool:
        if config.mu is None:
            return True
        return config.params().regime in self.allowed

    def check(self, config: RunConfig) -> None:
        if not self(config):
            regime = config.params().regime
            allowed = ", ".join(sorted(r.value for r in self.allowed))
            raise UnsupportedRegimeError(f"{self.what}: режим {regime.value} не поддерживается (нужен {allowed})")


class McRegimeFilter(RegimeFilter):
    """mc: вне режима C только с конечным горизонтом."""

    def __call__(self, config: RunConfig) -> bool:
        return super().__call__(config) or config.mc_horizon != float("inf")
