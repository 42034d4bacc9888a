import math

import numpy as np
import pytest

from model import InvalidParameterError, NoFiniteMomentError, UnsupportedRegimeError, classify
from mcsim import (
    OVERFLOW,
    McSettings,
    StopReason,
    Tally,
    default_time_step,
    estimate_omega,
    estimate_spine_constant,
    estimate_tail,
    martingale_check,
    mean_K,
    replica_stream,
    run_batch,
    run_spines,
    sample_K,
    shift_check,
    simulate_K,
    spine_residual,
    spine_stop_level,
)
from mcsim.engine import ParticleSystem
from pde import initial_state, step
from series import omega_s

SEED = 20240101


@pytest.fixture(scope="module")
def sample_mu2(params_mu2):
    return sample_K(params_mu2, 1.0, 20_000, SEED, McSettings(batch_size=10_000))


class TestEngine:
    def test_default_time_step(self, params_mu2):
        assert default_time_step(params_mu2) == pytest.approx(0.01 / params_mu2.r ** 2)
        assert default_time_step(classify(0.0, 2.0)) == pytest.approx(0.005)

    def test_settings_validation(self):
        with pytest.raises(InvalidParameterError):
            McSettings(epsilon=-1.0)
        with pytest.raises(InvalidParameterError):
            McSettings(dt=0.0)
        with pytest.raises(InvalidParameterError):
            McSettings(batch_size=0)

    def test_far_start_is_rarely_absorbed(self, params_mu2):
        x0 = 10.0 / params_mu2.r
        results = [simulate_K(params_mu2, x0, seed=seed) for seed in range(20)]
        assert sum(K for K, _ in results) == 0
        assert all(reason in (StopReason.EPSILON_RULE, StopReason.EXTINCTION) for _, reason in results)

    def test_deterministic(self, params_mu2):
        assert simulate_K(params_mu2, 0.3, seed=5) == simulate_K(params_mu2, 0.3, seed=5)

    def test_bad_start(self, params_mu2):
        with pytest.raises(InvalidParameterError):
            simulate_K(params_mu2, 0.0)

    def test_overflow_marked(self, params_mu2):
        settings = McSettings(population_cap=1)
        result = run_batch(params_mu2, 3.0, 200, settings, replica_stream(SEED, 0))
        overflow = result.stop == StopReason.OVERFLOW
        assert overflow.any()
        assert np.all(result.K[overflow] == OVERFLOW)
        assert np.all(result.K[~overflow] >= 0)

    def test_epsilon_rule_leaves_little_mass(self, params_mu2):
        result = run_batch(params_mu2, 1.0, 500, McSettings(), replica_stream(SEED, 0))
        stopped = result.stop == StopReason.EPSILON_RULE
        assert stopped.any()
        assert np.all(result.z_live[stopped] + result.z_pruned[stopped] < 1e-6)
        assert np.all(result.z_pruned <= 0.5e-6 * (1.0 + 1e-9))

    def test_prune_retires_lightest_within_budget(self, params_mu2):
        weights = np.array([1e-7, 0.5, 4e-7, 2e-7, 3e-7])
        system = ParticleSystem(
            params=params_mu2,
            positions=-np.log(weights) / params_mu2.r,
            owner=np.array([0, 0, 0, 0, 1]),
            K=np.zeros(2, dtype=np.int64),
            z_pruned=np.array([0.0, 4e-7]),
        )
        left = system.prune(5e-7)
        # реплика 0: 1e-7 + 2e-7 снимаются, 4e-7 уже не помещается; реплике 1 бюджета не хватает
        assert system.z_pruned == pytest.approx([3e-7, 4e-7], rel=1e-9)
        assert system.owner.tolist() == [0, 0, 1]
        assert sorted(left) == pytest.approx([3e-7, 4e-7, 0.5], rel=1e-9)

    def test_prune_keeps_everything_without_candidates(self, params_mu2):
        system = ParticleSystem.start(params_mu2, np.array([0.1, 0.2]))
        left = system.prune(1e-6)
        assert left.size == 2
        assert np.all(system.z_pruned == 0.0)

    def test_infinite_horizon_needs_regime_c(self):
        with pytest.raises(InvalidParameterError):
            sample_K(classify(0.0, 1.0), 1.0, 10, SEED)


class TestSampling:
    def test_threads_do_not_change_result(self, params_mu2):
        settings = McSettings(batch_size=500)
        single = sample_K(params_mu2, 0.5, 1_000, SEED, settings, threads=1)
        double = sample_K(params_mu2, 0.5, 1_000, SEED, settings, threads=2)
        assert np.array_equal(single.K, double.K)
        assert np.array_equal(single.stop, double.stop)

    def test_seed_changes_result(self, params_mu2):
        settings = McSettings(batch_size=500)
        first = sample_K(params_mu2, 0.5, 500, SEED, settings)
        second = sample_K(params_mu2, 0.5, 500, SEED + 1, settings)
        assert not np.array_equal(first.K, second.K)

    def test_mean_K(self, params_mu2, sample_mu2):
        estimate = mean_K(params_mu2, 1.0, 0, SEED, sample=sample_mu2)
        assert estimate.within(math.exp(-params_mu2.r))
        assert estimate.n_replicas == 20_000

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.2])
    def test_omega_matches_series(self, params_mu2, table_mu2, consts_mu2, sample_mu2, s):
        estimate = estimate_omega(params_mu2, 1.0, s, 0, SEED, sample=sample_mu2, s0=consts_mu2.s0)
        reference = omega_s(table_mu2, consts_mu2, s, 1.0)
        assert estimate.within(reference)
        assert estimate.stopped_by is StopReason.EPSILON_RULE

    def test_omega_at_one(self, params_mu2, sample_mu2, consts_mu2):
        estimate = estimate_omega(params_mu2, 1.0, 1.0, 0, SEED, sample=sample_mu2, s0=consts_mu2.s0)
        assert estimate.value == 1.0
        assert estimate.std_error == 0.0

    def test_omega_above_s0(self, params_mu2, consts_mu2, sample_mu2):
        with pytest.raises(NoFiniteMomentError):
            estimate_omega(params_mu2, 1.0, consts_mu2.s0 + 0.1, 0, SEED, sample=sample_mu2, s0=consts_mu2.s0)

    def test_omega_regime_b(self):
        with pytest.raises(UnsupportedRegimeError):
            estimate_omega(classify(0.0, 1.0), 1.0, 0.0, 10, SEED)

    def test_tail_histogram(self, params_mu2, table_mu2, consts_mu2, sample_mu2):
        histogram = estimate_tail(params_mu2, 1.0, 0, range(0, 4), SEED, sample=sample_mu2)
        omega = estimate_omega(params_mu2, 1.0, 0.0, 0, SEED, sample=sample_mu2)
        assert histogram.pmf[0] == pytest.approx(omega.value, rel=1e-12)
        assert histogram.total_mass == pytest.approx(1.0, abs=1e-12)
        assert histogram.row(0).prediction == pytest.approx(omega_s(table_mu2, consts_mu2, 0.0, 1.0), rel=1e-12)
        assert histogram.row(2).prediction > histogram.row(3).prediction > 0
        assert histogram.widened_uncertainty

    def test_finite_horizon_regime_b(self):
        params = classify(0.0, 1.0)
        sample = sample_K(params, 1.0, 20_000, SEED, McSettings(horizon=1.0, batch_size=10_000))
        assert set(np.unique(sample.stop)) <= {StopReason.HORIZON, StopReason.EXTINCTION}
        phat = float(np.mean(sample.K == 0))

        state = initial_state(params, 0.0, 0.01, 12.0)
        while state.t < 1.0 - 0.5 * state.dt:
            state = step(state)
        u = float(np.interp(1.0, state.x, state.u))
        stderr = math.sqrt(phat * (1.0 - phat) / sample.n_replicas)
        assert abs(phat - u) <= 3.0 * stderr + 5e-3


class TestMartingale:
    def test_conservation(self, params_mu2):
        report = martingale_check(params_mu2, 1.0, [0.5, 1.0, 5.0], 5_000, SEED)
        assert [row.t for row in report.rows] == [0.0, 0.5, 1.0, 5.0]
        first = report.rows[0]
        assert first.mean == pytest.approx(math.exp(-params_mu2.r), rel=1e-12)
        assert first.std_error == pytest.approx(0.0, abs=1e-15)
        assert report.passed

    def test_terminal_gap_counts_pruned_weight(self, params_mu2):
        sample = sample_K(params_mu2, 1.0, 2_000, SEED)
        stopped = sample.stop == StopReason.EPSILON_RULE
        residual = sample.z_live[stopped] + sample.z_pruned[stopped]
        report = martingale_check(params_mu2, 1.0, [1.0], 2_000, SEED)
        assert report.terminal_gap == pytest.approx(float(residual.max()), rel=1e-12)
        assert report.terminal_gap >= float(sample.z_pruned[stopped].max())
        assert report.terminal_gap < report.epsilon


class TestTally:
    def test_merge(self):
        merged = Tally.of([1.0, 2.0]) + Tally.of([3.0])
        assert merged == Tally.of([1.0, 2.0, 3.0])
        assert merged.mean == pytest.approx(2.0)
        assert merged.std_error == pytest.approx(np.std([1.0, 2.0, 3.0], ddof=1) / math.sqrt(3))

    def test_empty(self):
        assert math.isnan(Tally().mean)
        assert Tally.of([1.0]).std_error == 0.0


class TestStreams:
    def test_reproducible(self):
        assert replica_stream(1, 2).random() == replica_stream(1, 2).random()

    def test_independent(self):
        assert replica_stream(1, 2).random() != replica_stream(1, 3).random()
        assert replica_stream(1, 2, 0).random() != replica_stream(1, 2, 1).random()

    def test_negative_seed(self):
        with pytest.raises(InvalidParameterError):
            replica_stream(-1, 0)


class TestSpine:
    def test_residual_decreases(self, params_mu2, critical_params):
        for params in (params_mu2, critical_params):
            values = [spine_residual(params, y) for y in (1.0, 2.0, 4.0, 8.0)]
            assert all(b < a for a, b in zip(values, values[1:]))

    def test_stop_level(self, params_mu2):
        y_stop = spine_stop_level(params_mu2, 1e-6)
        assert spine_residual(params_mu2, y_stop) == pytest.approx(1e-6, rel=1e-6)
        assert spine_stop_level(params_mu2, 1e-6, x_stop=1.0) >= y_stop

    def test_stop_level_rejects(self, params_mu2):
        with pytest.raises(InvalidParameterError):
            spine_stop_level(params_mu2, 0.0)

    def test_K_Q_at_least_one(self, params_mu2):
        batch = run_spines(params_mu2, 50, McSettings(), replica_stream(SEED, 0, 1))
        valid = batch.K_Q != OVERFLOW
        assert np.all(batch.K_Q[valid] >= 1)
        assert batch.n_launches.size == 50

    @pytest.mark.slow
    def test_spine_constant(self, params_mu2, consts_mu2):
        estimate = estimate_spine_constant(params_mu2, 20_000, SEED)
        assert abs(estimate.value - consts_mu2.B0) <= 0.05 * consts_mu2.B0 + 3.0 * estimate.std_error


@pytest.mark.slow
class TestAccuracy:
    def test_dt_halving(self, params_mu2):
        coarse = estimate_omega(params_mu2, 1.0, 0.0, 20_000, SEED)
        dt = default_time_step(params_mu2) / 2.0
        fine = estimate_omega(params_mu2, 1.0, 0.0, 20_000, SEED + 7, McSettings(dt=dt))
        assert abs(coarse.value - fine.value) <= 3.0 * math.hypot(coarse.std_error, fine.std_error)

    def test_epsilon_inflation(self, params_mu2):
        tight = sample_K(params_mu2, 1.0, 20_000, SEED)
        loose = sample_K(params_mu2, 1.0, 20_000, SEED, McSettings(epsilon=1e-3))
        assert loose.bias_bound < 1e-3
        for s in (0.0, 0.5):
            a = estimate_omega(params_mu2, 1.0, s, 0, SEED, sample=tight)
            b = estimate_omega(params_mu2, 1.0, s, 0, SEED, sample=loose)
            assert abs(a.value - b.value) <= 1e-3 + 3.0 * math.hypot(a.std_error, b.std_error)
        a = mean_K(params_mu2, 1.0, 0, SEED, sample=tight)
        b = mean_K(params_mu2, 1.0, 0, SEED, sample=loose)
        assert abs(a.value - b.value) <= 3.0 * math.hypot(a.std_error, b.std_error)

    def test_shift_relation(self, params_mu2):
        report = shift_check(params_mu2, 0.5, 0.5, 20_000, SEED)
        assert report.passed

    def test_critical_mean_at_horizon(self, critical_params):
        # E K(T) = e^{−√2·x}·P(броуновское движение из x достигло 0 до T)
        horizon = 5.0
        settings = McSettings(horizon=horizon)
        estimate = mean_K(critical_params, 1.0, 20_000, SEED, settings)
        assert estimate.within(math.exp(-math.sqrt(2.0)) * math.erfc(1.0 / math.sqrt(2.0 * horizon)))
        assert estimate.bias_bound > 1e-3

