"""
Коэффициенты степенного ряда для стоячих волн.

    Φ(z)   = Σ a_n zⁿ,     a_1 = 1,  a_n = p·Σ_{j<n} a_j a_{n−j} / ((n−1)(n−p))
    Ψ⁽ᵖ⁾(w) = Σ b_n wⁿ,   b_n = a_n / p^{n−1},  Ψ⁽ᵖ⁾(w) = p·Φ(w/p)

Хранится и вычисляется b-ряд: при больших μ коэффициенты a_n уходят в
машинный ноль, а b_n ~ 4⁻ⁿ остаются представимыми.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from model.errors import InvalidParameterError, OutOfDiscError
from model.params import ModelParams


logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 200

# Затравочное условие индукции: 4ⁿ b_n ≤ 15 − p при n ≤ 14
SEED_ORDER = 14
BOUND_CONSTANT = 15.0
BOUND_BASE = 4.0

# Доля старших порядков для оценки радиуса
RATIO_TAIL_FRACTION = 0.2


@dataclass(frozen=True)
class SeriesTable:
    """Таблица коэффициентов ряда (неизменяемая)."""
    params: ModelParams | None   # None для предельной таблицы p = 0
    p: float
    n_max: int
    a: np.ndarray                # a[k] ↔ a_{k+1}
    b: np.ndarray                # b[k] ↔ b_{k+1}
    radius_estimate: float       # радиус сходимости Φ (для p = 0 - радиус Ψ⁽⁰⁾)
    rescaled_radius: float       # радиус сходимости Ψ⁽ᵖ⁾
    seed_max: float              # max_{n≤14} 4ⁿ b_n
    small_p_bound: bool          # выполнена ли оценка b_n ≤ 15·4⁻ⁿ

    @property
    def orders(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    @property
    def is_limit(self) -> bool:
        return self.p == 0.0

    def tail_bound(self, z: float) -> float:
        """Оценка хвоста Σ_{n>n_max} |a_n zⁿ| для Φ (для p = 0 - для Ψ⁽⁰⁾)."""
        w = abs(z) * self.p if not self.is_limit else abs(z)
        scale = 1.0 / self.p if not self.is_limit else 1.0
        if self.small_p_bound:
            q = w / BOUND_BASE
            if q >= 1.0:
                return float("inf")
            return scale * BOUND_CONSTANT * q ** (self.n_max + 1) / (1.0 - q)
        # эвристика без гарантии
        return scale * 10.0 * abs(self.b[-1]) * w ** self.n_max


def _rescaled_coefficients(p: float, n_max: int) -> np.ndarray:
    """Рекурсия b_n = Σ_{j=1}^{n−1} b_j b_{n−j} / ((n−1)(n−p)), O(n_max²)."""
    b = np.zeros(n_max)
    b[0] = 1.0
    for n in range(2, n_max + 1):
        conv = np.dot(b[: n - 1], b[n - 2 :: -1])
        b[n - 1] = conv / ((n - 1) * (n - p))
    return b


def _ratio_radius(b: np.ndarray) -> float:
    """Медиана отношений b_n / b_{n+1} по последним 20% порядков."""
    n_max = b.size
    start = max(1, int(n_max * (1.0 - RATIO_TAIL_FRACTION)))
    head, tail = b[start - 1 : -1], b[start:]
    mask = (head > 0) & (tail > 0)
    if not np.any(mask):
        return float("inf")
    return float(np.median(head[mask] / tail[mask]))


def _build(p: float, n_max: int, params: ModelParams | None) -> SeriesTable:
    if n_max < 2:
        raise InvalidParameterError(f"n_max должно быть ≥ 2, получено {n_max}")

    b = _rescaled_coefficients(p, n_max)
    orders = np.arange(1, n_max + 1)
    with np.errstate(under="ignore"):
        a = b * np.power(p, orders - 1) if p > 0 else np.zeros(n_max)
    if p > 0:
        a[0] = 1.0

    seed = orders <= SEED_ORDER
    seed_max = float(np.max(BOUND_BASE ** orders[seed] * b[seed]))
    small_p_bound = seed_max <= BOUND_CONSTANT - p

    rescaled_radius = _ratio_radius(b)
    radius = rescaled_radius / p if p > 0 else rescaled_radius

    if not small_p_bound:
        logger.warning(f"Оценка 15·4⁻ⁿ не гарантирована при p={p:.6g} (max 4ⁿb_n = {seed_max:.4f}), хвост оценивается эвристически")

    return SeriesTable(
        params=params,
        p=p,
        n_max=n_max,
        a=a,
        b=b,
        radius_estimate=radius,
        rescaled_radius=rescaled_radius,
        seed_max=seed_max,
        small_p_bound=small_p_bound,
    )


def build_coefficients(params: ModelParams, n_max: int = DEFAULT_N_MAX) -> SeriesTable:
    """Построить таблицу коэффициентов для параметров режима C."""
    params.require_regime_c("build_coefficients")
    table = _build(params.p, n_max, params)
    logger.info(
        f"Ряд построен: μ={params.mu:g}, β={params.beta:g}, p={params.p:.6g}, "
        f"n_max={n_max}, R≈{table.radius_estimate:.6g}"
    )
    return table


def build_rescaled_limit(n_max: int = DEFAULT_N_MAX) -> SeriesTable:
    """Предельная таблица p → 0: b_n = Σ b_j b_{n−j} / ((n−1)n)."""
    return _build(0.0, n_max, None)


# Вычисление рядов

def _check_disc(table: SeriesTable, z) -> None:
    z_abs = np.max(np.abs(np.asarray(z, dtype=float)), initial=0.0)
    if z_abs >= table.radius_estimate:
        raise OutOfDiscError(float(z_abs), table.radius_estimate)


def _psi_coeffs(table: SeriesTable, derivative: int = 0) -> np.ndarray:
    coeffs = np.concatenate(([0.0], table.b))
    if derivative:
        coeffs = P.polyder(coeffs, derivative)
    return coeffs


def eval_psi(table: SeriesTable, w, derivative: int = 0):
    """Ψ⁽ᵖ⁾(w) = Σ b_n wⁿ (или её производная порядка derivative)."""
    limit = table.rescaled_radius
    w_abs = np.max(np.abs(np.asarray(w, dtype=float)), initial=0.0)
    if w_abs >= limit:
        raise OutOfDiscError(float(w_abs), limit)
    return P.polyval(w, _psi_coeffs(table, derivative))


def eval_psi_prime(table: SeriesTable, w):
    return eval_psi(table, w, derivative=1)


def _require_phi(table: SeriesTable) -> None:
    if table.is_limit:
        raise InvalidParameterError("для предельной таблицы p=0 Φ не определена, используйте eval_psi")


def eval_phi(table: SeriesTable, z):
    """Φ(z) = Ψ⁽ᵖ⁾(pz)/p."""
    _require_phi(table)
    _check_disc(table, z)
    w = np.multiply(table.p, z)
    return P.polyval(w, _psi_coeffs(table)) / table.p


def eval_phi_prime(table: SeriesTable, z):
    """Φ′(z) = Ψ⁽ᵖ⁾′(pz)."""
    _require_phi(table)
    _check_disc(table, z)
    w = np.multiply(table.p, z)
    return P.polyval(w, _psi_coeffs(table, 1))


def eval_phi_second(table: SeriesTable, z):
    """Φ″(z) = p·Ψ⁽ᵖ⁾″(pz)."""
    _require_phi(table)
    _check_disc(table, z)
    w = np.multiply(table.p, z)
    return table.p * P.polyval(w, _psi_coeffs(table, 2))


def eval_phi_with_bound(table: SeriesTable, z: float) -> tuple[float, float]:
    """Значение Φ(z) вместе с оценкой хвоста."""
    return float(eval_phi(table, z)), table.tail_bound(z)
