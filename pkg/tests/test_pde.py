import math
from dataclasses import replace

import numpy as np
import pytest

from model import InvalidParameterError, StabilityError, UnsupportedRegimeError, classify
from pde import Scheme, extend, fit_front, half_position, initial_state, relax, run_front, shape_distance, step
from series import omega_s
from waves import solve_hstar


@pytest.fixture(scope="module")
def hstar():
    return solve_hstar(1.0)


@pytest.fixture(scope="module")
def relaxation(params_mu2):
    return relax(params_mu2, 0.0, 20.0, dx=0.005, snapshot_times=(1.0, 5.0))


class TestStep:
    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_constant_is_fixed_point(self, params_mu2, scheme):
        dt = 0.25 * 0.05 ** 2 if scheme is Scheme.EXPLICIT else None
        state = initial_state(params_mu2, 1.0, 0.05, 5.0, dt=dt, scheme=scheme)
        for _ in range(10):
            state = step(state)
        assert state.u == pytest.approx(np.ones(state.n), abs=1e-12)
        assert state.steps == 10

    def test_boundary_value_kept(self, params_mu2):
        state = initial_state(params_mu2, 0.3, 0.05, 5.0)
        for _ in range(5):
            state = step(state)
        assert state.u[0] == pytest.approx(0.3, abs=1e-15)
        assert state.w[0] == 1.0 - 0.3
        assert state.u[-1] == 1.0
        assert state.t == pytest.approx(5 * state.dt)

    def test_bounds_hold(self):
        params = classify(0.0, 1.0)
        state = initial_state(params, 0.0, 0.05, 10.0)
        for _ in range(50):
            state = step(state)
            assert state.u.min() >= -1e-9
            assert state.u.max() <= 1.0 + 1e-9

    def test_explicit_cfl_violation(self, params_mu2):
        state = initial_state(params_mu2, 0.0, 0.1, 5.0, dt=0.01, scheme=Scheme.EXPLICIT)
        with pytest.raises(StabilityError):
            step(state)

    def test_reaction_limit(self, params_mu2):
        state = initial_state(params_mu2, 0.0, 0.1, 5.0, dt=1.0)
        with pytest.raises(StabilityError):
            step(state)

    def test_invalid_grid(self, params_mu2):
        with pytest.raises(InvalidParameterError):
            initial_state(params_mu2, 0.0, 0.0, 5.0)
        with pytest.raises(InvalidParameterError):
            initial_state(params_mu2, -0.5, 0.1, 5.0)

    def test_extend(self, params_mu2):
        state = initial_state(params_mu2, 0.0, 0.1, 5.0)
        longer = extend(state, 10)
        assert longer.n == state.n + 10
        assert longer.x_max == pytest.approx(state.x_max + 1.0)
        assert np.all(longer.u[state.n :] == 1.0)


class TestFarField:
    @pytest.fixture(scope="class")
    def evolved(self):
        params = classify(0.0, 1.0)
        state = initial_state(params, 0.0, 0.05, 150.0)
        positions = {}
        while state.t < 40.0 - 0.5 * state.dt:
            state = step(state)
            if state.steps % 200 == 0:
                positions[round(state.t)] = half_position(state)
        return state, positions

    def test_ahead_of_front_stays_one(self, evolved):
        state, positions = evolved
        ahead = state.x > positions[40] + 60.0
        assert np.all(state.u[ahead] == 1.0)
        assert state.w.min() >= -1e-9

    def test_speed_below_critical(self, evolved):
        _, positions = evolved
        speed = (positions[40] - positions[30]) / 10.0
        assert 1.3 < speed < 1.42


class TestRelaxation:
    def test_converges_to_series(self, relaxation):
        assert relaxation.distances[-1] < 1e-3

    def test_distance_decreases(self, relaxation):
        assert relaxation.distances[0] > 0.5
        assert np.all(np.diff(relaxation.distances) <= 1e-4)

    def test_snapshots_monotone(self, relaxation):
        early, late = relaxation.snapshots[1.0], relaxation.snapshots[5.0]
        assert np.all(late <= early + 1e-6)
        assert np.all(np.diff(late) >= -1e-6)

    def test_stays_above_standing_wave(self, relaxation, table_mu2, consts_mu2):
        state = relaxation.state
        target = omega_s(table_mu2, consts_mu2, 0.0, state.x)
        assert np.all(state.u >= target - 1e-3)

    def test_grid_convergence(self, params_mu2):
        coarse = relax(params_mu2, 0.0, 20.0, dx=0.02)
        fine = relax(params_mu2, 0.0, 20.0, dx=0.01)
        assert fine.distances[-1] < 0.5 * coarse.distances[-1]

    def test_relaxes_at_s0(self, params_mu2, table_mu2, consts_mu2):
        s0 = consts_mu2.s0
        result = relax(params_mu2, s0, 10.0, dx=0.01, snapshot_times=(2.0, 10.0))
        early, late = result.snapshots[2.0], result.snapshots[10.0]
        assert np.all(late >= early - 1e-6)
        target = omega_s(table_mu2, consts_mu2, s0, result.state.x)
        assert np.all(result.state.u <= target + 1e-3)
        assert result.distances[-1] < result.distances[0]
        assert np.all(np.diff(result.distances) <= 1e-4)

    def test_regime_b_rejected(self):
        with pytest.raises(UnsupportedRegimeError):
            relax(classify(0.0, 1.0), 0.0, 1.0)


class TestFrontHelpers:
    def test_fit_recovers_coefficients(self):
        t = np.linspace(10.0, 100.0, 181)
        positions = 1.3 * t - 0.9 * np.log(t) + 2.0
        v, k, c = fit_front(t, positions, 50.0)
        assert v == pytest.approx(1.3, abs=1e-8)
        assert k == pytest.approx(-0.9, abs=1e-6)
        assert c == pytest.approx(2.0, abs=1e-5)

    def test_fit_needs_points(self):
        with pytest.raises(InvalidParameterError):
            fit_front(np.array([1.0, 2.0]), np.array([1.0, 2.0]), 0.0)

    def test_half_position(self):
        params = classify(0.0, 1.0)
        state = initial_state(params, 0.0, 0.1, 10.0)
        u = np.clip(state.x / 4.0, 0.0, 1.0)
        state = replace(state, w=1.0 - u)
        assert half_position(state) == pytest.approx(2.0)

    def test_half_position_missing(self):
        params = classify(0.0, 1.0)
        state = initial_state(params, 0.0, 0.1, 10.0)
        state = replace(state, w=np.ones(state.n))
        assert half_position(state) is None

    def test_shape_distance_of_exact_wave(self, hstar):
        params = classify(0.0, 1.0)
        state = initial_state(params, 0.0, 0.01, 60.0)
        m = 30.0
        u = np.interp(state.x - m, hstar.grid, hstar.values, left=0.0, right=1.0)
        state = replace(state, w=1.0 - u)
        assert shape_distance(state, m, hstar) < 1e-3


class TestRunFront:
    def test_regime_c_rejected(self, params_mu2):
        with pytest.raises(UnsupportedRegimeError):
            run_front(params_mu2, 200.0)

    def test_short_horizon_rejected(self, hstar):
        with pytest.raises(InvalidParameterError):
            run_front(classify(0.0, 1.0), 50.0, hstar=hstar)

    @pytest.mark.slow
    @pytest.mark.parametrize("mu", [0.0, 1.0])
    def test_front_log_correction(self, hstar, mu):
        params = classify(mu, 1.0)
        trace = run_front(params, 400.0, dx=0.02, hstar=hstar)
        assert trace.fitted_speed == pytest.approx(math.sqrt(2.0) - mu, rel=0.01)
        assert trace.fitted_log_coeff == pytest.approx(-1.5 / math.sqrt(2.0), rel=0.25)
        assert trace.shape_distance < 0.02
        assert np.all(np.diff(trace.half_positions) > -1e-9)
