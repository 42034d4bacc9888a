"""
Константы стоячих волн из ряда Φ.

    ω_s(x) = 1 − Φ(B_s e^{−rx}),   Φ(B0) = 1,   Φ′(B_s0) = 0,   s0 = 1 − Φ(B_s0)
"""

import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from model.errors import (
    InvalidParameterError,
    NoFiniteMomentError,
    RadiusExceededError,
    SolverFailureError,
    UnsupportedRegimeError,
)
from model.params import ModelParams, classify
from series.coefficients import (
    DEFAULT_N_MAX,
    SeriesTable,
    build_coefficients,
    build_rescaled_limit,
    eval_phi,
    eval_phi_prime,
    eval_phi_second,
    eval_psi,
)


logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-10
SCAN_START = 0.01
# Сколько дополнительных точек ставить между последней степенью двойки и краем круга
SCAN_FILL = 16
SCAN_EDGE = 0.95


@dataclass(frozen=True)
class WaveConstants:
    """Константы B0, B_s0, s0 и m⁽ᵖ⁾."""
    params: ModelParams
    B0: float
    B_s0: float
    s0: float
    m_p: float
    radius_estimate: float
    truncation_bound: float   # оценка хвоста при наибольшем использованном |z|


def _scan_points(limit: float) -> np.ndarray:
    """Геометрическая сетка 0.01·2^k, дополненная до SCAN_EDGE·limit."""
    points = []
    z = SCAN_START
    while z < SCAN_EDGE * limit:
        points.append(z)
        z *= 2.0
    last = points[-1] if points else 0.0
    fill = np.linspace(last, SCAN_EDGE * limit, SCAN_FILL + 1)[1:]
    return np.concatenate((points, fill))


def _bracket(f, sign: float, limit: float, what: str) -> tuple[float, float]:
    """Первая смена знака f на луче sign·t, t ∈ (0, limit)."""
    prev_z = 0.0
    prev_f = f(0.0)
    for t in _scan_points(limit):
        z = sign * t
        fz = f(z)
        if prev_f == 0.0:
            return prev_z, prev_z
        if np.sign(fz) != np.sign(prev_f):
            return (prev_z, z) if prev_z < z else (z, prev_z)
        prev_z, prev_f = z, fz
    raise RadiusExceededError(what, SCAN_EDGE * limit)


def _bisect(f, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    return optimize.bisect(f, lo, hi, xtol=ROOT_XTOL, maxiter=500)


def find_wave_constants(table: SeriesTable) -> WaveConstants:
    """Найти B0, B_s0, s0 бракетированием и бисекцией."""
    if table.params is None:
        raise UnsupportedRegimeError("find_wave_constants требует таблицу режима C, а не предельную p=0")
    params = table.params
    limit = table.radius_estimate

    # B0: наименьший положительный корень Φ(z) = 1
    lo, hi = _bracket(lambda z: float(eval_phi(table, z)) - 1.0, +1.0, limit, "Φ(z)=1")
    B0 = _bisect(lambda z: float(eval_phi(table, z)) - 1.0, lo, hi)

    # B_s0: ближайшая к нулю критическая точка Φ слева
    lo, hi = _bracket(lambda z: float(eval_phi_prime(table, z)), -1.0, limit, "Φ′(z)=0, z<0")
    B_s0 = _bisect(lambda z: float(eval_phi_prime(table, z)), lo, hi)

    if eval_phi_second(table, B_s0) <= 0:
        raise SolverFailureError(f"Φ″(B_s0) ≤ 0 при B_s0={B_s0:.10g}: это не минимум")

    s0 = 1.0 - float(eval_phi(table, B_s0))
    bound = table.tail_bound(max(abs(B0), abs(B_s0)))

    logger.info(f"Константы: B0={B0:.6f}, B_s0={B_s0:.6f}, s0={s0:.6f}")
    return WaveConstants(
        params=params,
        B0=B0,
        B_s0=B_s0,
        s0=s0,
        m_p=params.p * B_s0,
        radius_estimate=limit,
        truncation_bound=bound,
    )


def find_rescaled_minimum(table: SeriesTable) -> tuple[float, float]:
    """Первый локальный минимум Ψ⁽ᵖ⁾ слева от нуля: (m⁽ᵖ⁾, Ψ⁽ᵖ⁾(m⁽ᵖ⁾))."""
    limit = table.rescaled_radius

    def dpsi(w: float) -> float:
        return float(eval_psi(table, w, derivative=1))

    lo, hi = _bracket(dpsi, -1.0, limit, "Ψ′(w)=0, w<0")
    m = _bisect(dpsi, lo, hi)
    return m, float(eval_psi(table, m))


def solve_B(table: SeriesTable, consts: WaveConstants, s: float) -> float:
    """B_s: Φ(B_s) = 1 − s на [0, B0] при s ≤ 1 и на [B_s0, 0] при s > 1."""
    if not math.isfinite(s) or s < 0:
        raise InvalidParameterError(f"s должно быть в [0, s0], получено s={s}")
    if s > consts.s0 * (1.0 + 1e-12):
        raise NoFiniteMomentError(s, consts.s0)
    if s == 1.0:
        return 0.0
    if s == 0.0:
        return consts.B0
    if s >= consts.s0:
        return consts.B_s0

    def f(z: float) -> float:
        return float(eval_phi(table, z)) - (1.0 - s)

    if s < 1.0:
        return _bisect(f, 0.0, consts.B0)
    return _bisect(f, consts.B_s0, 0.0)


def _as_output(value, x):
    return float(value) if np.ndim(x) == 0 else np.asarray(value)


def omega_s(table: SeriesTable, consts: WaveConstants, s: float, x):
    """ω_s(x) = 1 − Φ(B_s e^{−rx}); x - число или массив."""
    B = solve_B(table, consts, s)
    z = B * np.exp(-table.params.r * np.asarray(x, dtype=float))
    _guard_radius(table, z)
    return _as_output(1.0 - eval_phi(table, z), x)


def omega_s_prime(table: SeriesTable, consts: WaveConstants, s: float, x):
    """ω_s′(x) = r·B_s e^{−rx}·Φ′(B_s e^{−rx})."""
    B = solve_B(table, consts, s)
    r = table.params.r
    z = B * np.exp(-r * np.asarray(x, dtype=float))
    _guard_radius(table, z)
    return _as_output(r * z * eval_phi_prime(table, z), x)


def _guard_radius(table: SeriesTable, z) -> None:
    z_abs = float(np.max(np.abs(z), initial=0.0))
    if z_abs >= table.radius_estimate:
        raise RadiusExceededError("ω_s", table.radius_estimate)


def wave_profile(table: SeriesTable, B: float, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(v, v′, v″) для v(x) = 1 − Φ(B e^{−rx})."""
    r = table.params.r
    x = np.asarray(x, dtype=float)
    z = B * np.exp(-r * x)
    _guard_radius(table, z)
    phi1 = eval_phi_prime(table, z)
    phi2 = eval_phi_second(table, z)
    v = 1.0 - eval_phi(table, z)
    dv = r * z * phi1
    d2v = -r * r * z * phi1 - r * r * z * z * phi2
    return v, dv, d2v


def tail_prediction(consts: WaveConstants, wave_deriv_at_x: float, n: int) -> float:
    """Асимптотика P^x[K(∞) = n] ~ −ω′_{s0}(x) / (2 s0ⁿ n^{3/2} √(πβ(s0−1)))."""
    if n <= 0:
        raise InvalidParameterError("tail_prediction определена только при n ≥ 1 (n=0 даёт ω(x))")
    beta = consts.params.beta
    s0 = consts.s0
    log_denominator = n * math.log(s0) + 1.5 * math.log(n)
    return -wave_deriv_at_x * math.exp(-log_denominator) / (2.0 * math.sqrt(math.pi * beta * (s0 - 1.0)))


# Кривая s0(μ/√β)

@dataclass(frozen=True)
class S0CurvePoint:
    ratio: float
    p: float
    s0: float
    p_s0: float
    c_fit: float   # s0·β/μ²


@dataclass(frozen=True)
class S0Curve:
    points: list[S0CurvePoint]
    m0: float                # первый минимум Ψ⁽⁰⁾ слева от нуля
    psi0_at_m0: float        # Ψ⁽⁰⁾(m⁽⁰⁾) < 0
    limit: float             # |Ψ⁽⁰⁾(m⁽⁰⁾)|
    sign_discrepancy: bool   # p·s0 > 0, а Ψ⁽⁰⁾(m⁽⁰⁾) < 0
    increasing: bool


def s0_limit_curve(ratios: list[float], n_max: int = DEFAULT_N_MAX) -> S0Curve:
    """s0 и p·s0 вдоль μ/√β при β = 1 (масштабная инвариантность) и предел p → 0."""
    points: list[S0CurvePoint] = []
    for ratio in ratios:
        params = classify(float(ratio), 1.0)
        if not params.in_regime_c:
            raise UnsupportedRegimeError(f"μ/√β={ratio:g} < √2: s0 не определено")
        table = build_coefficients(params, n_max)
        consts = find_wave_constants(table)
        points.append(
            S0CurvePoint(
                ratio=float(ratio),
                p=params.p,
                s0=consts.s0,
                p_s0=params.p * consts.s0,
                c_fit=consts.s0 / (ratio * ratio),
            )
        )

    ordered = sorted(points, key=lambda pt: pt.ratio)
    increasing = all(b.s0 > a.s0 for a, b in zip(ordered, ordered[1:]))
    if not increasing:
        logger.warning("s0 не возрастает вдоль μ/√β - проверьте n_max")

    limit_table = build_rescaled_limit(n_max)
    m0, psi_m0 = find_rescaled_minimum(limit_table)
    logger.info(f"Предел p→0: m⁽⁰⁾={m0:.6f}, Ψ⁽⁰⁾(m⁽⁰⁾)={psi_m0:.6f}")

    return S0Curve(
        points=points,
        m0=m0,
        psi0_at_m0=psi_m0,
        limit=abs(psi_m0),
        sign_discrepancy=psi_m0 < 0,
        increasing=increasing,
    )
