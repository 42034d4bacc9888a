import math

import pytest

from model import (
    CrosscheckFailure,
    InvalidParameterError,
    NoFiniteMomentError,
    Regime,
    StabilityError,
    UnsupportedRegimeError,
    classify,
)


@pytest.mark.parametrize(
    "mu, regime",
    [
        (-3.0, Regime.A),
        (-math.sqrt(2.0), Regime.A),
        (0.0, Regime.B),
        (1.0, Regime.B),
        (math.sqrt(2.0), Regime.C_CRITICAL),
        (1.4142135, Regime.C_CRITICAL),
        (2.0, Regime.C_SUPERCRITICAL),
    ],
)
def test_classify_regimes(mu, regime):
    assert classify(mu, 1.0).regime is regime


def test_roots_supercritical():
    params = classify(2.0, 1.0)
    assert params.r == pytest.approx(2.0 + math.sqrt(2.0), rel=1e-14)
    assert params.R_small == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-12)
    assert params.p == pytest.approx(2.0 / (2.0 + math.sqrt(2.0)) ** 2, rel=1e-14)
    # r и R - корни ½x² − μx + β
    for root in (params.r, params.R_small):
        assert 0.5 * root * root - 2.0 * root + 1.0 == pytest.approx(0.0, abs=1e-12)


def test_critical_roots_are_exact():
    params = classify(1.4142135, 1.0)
    assert params.r == params.R_small == math.sqrt(2.0)
    assert params.p == 1.0
    assert params.spine_drift == 0.0


def test_regime_b_has_no_roots():
    params = classify(0.5, 1.0)
    assert params.r is None and params.p is None
    assert not params.in_regime_c


@pytest.mark.parametrize("mu, beta", [(1.0, 0.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
def test_classify_rejects_bad_input(mu, beta):
    with pytest.raises(InvalidParameterError):
        classify(mu, beta)


def test_require_regime_c():
    with pytest.raises(UnsupportedRegimeError):
        classify(0.0, 1.0).require_regime_c("series")
    classify(3.0, 1.0).require_regime_c("series")


def test_derived_rates():
    params = classify(2.0, 1.0)
    assert params.extinction_rate == pytest.approx(2.0 + math.sqrt(6.0))
    assert params.spine_drift == pytest.approx(math.sqrt(2.0))
    assert params.critical_speed == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize("mu, beta", [(-2.0, 1.0), (0.5, 1.0), (math.sqrt(2.0), 1.0), (2.0, 1.0), (3.0, 2.0)])
@pytest.mark.parametrize("lam", [0.25, 4.0, 9.0])
def test_scaling_law(mu, beta, lam):
    base = classify(mu, beta)
    scaled = classify(math.sqrt(lam) * mu, lam * beta)
    assert scaled.regime is base.regime
    if base.r is None:
        assert scaled.r is None and scaled.p is None
        return
    assert scaled.r == pytest.approx(math.sqrt(lam) * base.r, rel=1e-12)
    assert scaled.R_small == pytest.approx(math.sqrt(lam) * base.R_small, rel=1e-12)
    assert scaled.p == pytest.approx(base.p, rel=1e-12)


def test_exit_codes():
    assert InvalidParameterError("x").exit_code == 2
    assert NoFiniteMomentError(2.0, 1.5).exit_code == 2
    assert StabilityError("x").exit_code == 3
    assert CrosscheckFailure("x").exit_code == 4


def test_as_dict_roundtrips_regime():
    data = classify(3.0, 2.0).as_dict()
    assert data["regime"] == "C_supercritical"
    assert data["beta"] == 2.0
