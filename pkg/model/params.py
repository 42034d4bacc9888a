import math
import logging
from dataclasses import dataclass
from enum import Enum

from model.errors import InvalidParameterError, UnsupportedRegimeError


logger = logging.getLogger(__name__)

# Относительный допуск, в пределах которого μ считается равным √(2β)
CRITICAL_RTOL = 1e-7


class Regime(str, Enum):
    """Режимы поведения ветвящегося броуновского движения с поглощением в нуле."""
    A = "A"                              # μ ≤ −√(2β): вымирание
    B = "B"                              # |μ| < √(2β): выживание, K(∞) = ∞
    C_SUPERCRITICAL = "C_supercritical"  # μ > √(2β)
    C_CRITICAL = "C_critical"            # μ = √(2β)


@dataclass(frozen=True)
class ModelParams:
    """Параметры модели и производные константы."""
    mu: float
    beta: float
    regime: Regime
    r: float | None = None        # больший корень ½x² − μx + β
    R_small: float | None = None  # меньший корень
    p: float | None = None        # 2β/r²

    @property
    def critical(self) -> bool:
        return self.regime is Regime.C_CRITICAL

    @property
    def in_regime_c(self) -> bool:
        return self.regime in (Regime.C_SUPERCRITICAL, Regime.C_CRITICAL)

    @property
    def critical_speed(self) -> float:
        """√(2β)."""
        return math.sqrt(2.0 * self.beta)

    @property
    def spine_drift(self) -> float:
        """√(μ² − 2β); ноль в критическом случае."""
        if self.critical:
            return 0.0
        return math.sqrt(self.mu * self.mu - 2.0 * self.beta)

    @property
    def extinction_rate(self) -> float:
        """μ + √(μ² + 2β): скорость убывания волны вымирания θ."""
        return self.mu + math.sqrt(self.mu * self.mu + 2.0 * self.beta)

    def require_regime_c(self, what: str) -> None:
        if not self.in_regime_c:
            raise UnsupportedRegimeError(
                f"{what}: нужен режим C (μ ≥ √(2β)), получен {self.regime.value} "
                f"при μ={self.mu:g}, β={self.beta:g}"
            )

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "beta": self.beta,
            "regime": self.regime.value,
            "r": self.r,
            "R_small": self.R_small,
            "p": self.p,
        }


def classify(mu: float, beta: float) -> ModelParams:
    """
    Классифицировать (μ, β) и вычислить r, R, p.

    Вблизи μ = √(2β) (относительно CRITICAL_RTOL) режим считается критическим
    и r = R = √(2β), p = 1 ровно.
    """
    if not (math.isfinite(mu) and math.isfinite(beta)):
        raise InvalidParameterError(f"параметры должны быть конечны: μ={mu}, β={beta}")
    if beta <= 0:
        raise InvalidParameterError(f"β должно быть положительным, получено β={beta}")

    c = math.sqrt(2.0 * beta)

    if abs(mu - c) <= CRITICAL_RTOL * c:
        return ModelParams(mu=mu, beta=beta, regime=Regime.C_CRITICAL, r=c, R_small=c, p=1.0)

    if mu > c:
        root = math.sqrt(mu * mu - 2.0 * beta)
        r = mu + root
        # R = 2β/r: без вычитания близких чисел
        R_small = 2.0 * beta / r
        return ModelParams(
            mu=mu,
            beta=beta,
            regime=Regime.C_SUPERCRITICAL,
            r=r,
            R_small=R_small,
            p=2.0 * beta / (r * r),
        )

    if mu <= -c * (1.0 - CRITICAL_RTOL):
        return ModelParams(mu=mu, beta=beta, regime=Regime.A)
    return ModelParams(mu=mu, beta=beta, regime=Regime.B)
