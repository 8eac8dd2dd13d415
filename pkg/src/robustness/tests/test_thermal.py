"""
Тесты теплового анализа: доплеровский сдвиг, флуктуации взаимодействия, развёртка по температурам
"""
import math

import numpy as np
import pytest

from ...physics.params import default_params
from ...physics.schedule import PulseSchedule
from ..thermal import (
    SWEEP_HEADER,
    ThermalConfig,
    ThermalEffect,
    composition_residual,
    doppler_shift,
    f_avg_at_temperature,
    fluctuated_interaction,
    gate_evaluator,
    monte_carlo_doppler,
    position_spread,
    rms_velocity,
    sweep_csv,
    thermal_sweep,
)


def squared_shift(doppler) -> float:
    if isinstance(doppler, tuple):
        return doppler[0] ** 2 + doppler[1] ** 2
    return 2.0 * doppler ** 2


class CountingEvaluator:
    """
    Модельная точность: квадратичная по сдвигу и линейная по изменению взаимодействия
    """

    def __init__(self, v0: float):
        self.v0 = v0
        self.calls = 0

    def __call__(self, doppler, v: float) -> float:
        self.calls += 1
        return 1.0 - squared_shift(doppler) - (self.v0 - v)


class TestThermalFormulas:

    def setup_method(self):
        self.params = default_params()
        self.cfg = ThermalConfig.from_params(self.params)

    def test_rms_velocity(self):
        assert rms_velocity(10.0) == pytest.approx(0.0309, rel=0.01)
        assert rms_velocity(0.0) == 0.0

    def test_doppler_at_ten_microkelvin(self):
        assert doppler_shift(10.0, self.cfg) == pytest.approx(2 * math.pi * 43e-3, rel=0.02)

    def test_doppler_square_root_law(self):
        assert doppler_shift(4.0, self.cfg) == pytest.approx(2 * doppler_shift(1.0, self.cfg), rel=1e-12)

    def test_counter_propagating_is_larger(self):
        counter = ThermalConfig.from_params(self.params, counter_propagating=True)
        assert counter.delta_k > self.cfg.delta_k > 0
        assert doppler_shift(5.0, counter) > doppler_shift(5.0, self.cfg)

    def test_position_spread(self):
        assert position_spread(10.0, self.cfg) == pytest.approx(49e-9, rel=0.02)

    def test_interaction_reduction(self):
        v_prime = fluctuated_interaction(10.0, self.cfg, self.params.v0, self.params.r0)
        assert v_prime / self.params.v0 == pytest.approx(0.9964, abs=1e-4)
        assert v_prime < self.params.v0

    def test_zero_temperature_keeps_interaction(self):
        assert fluctuated_interaction(0.0, self.cfg, self.params.v0, self.params.r0) == self.params.v0
        assert doppler_shift(0.0, self.cfg) == 0.0


class TestThermalConfigValidation:

    def test_negative_temperature(self):
        with pytest.raises(ValueError):
            ThermalConfig(temperatures_uk=(1.0, -2.0))

    def test_wavevector_order(self):
        params = default_params()
        with pytest.raises(ValueError):
            ThermalConfig(k1=params.k2, k2=params.k1)

    def test_rms_velocity_rejects_negative(self):
        with pytest.raises(ValueError):
            rms_velocity(-1.0)


class TestThermalSweep:

    def setup_method(self):
        self.params = default_params()
        self.cfg = ThermalConfig.from_params(self.params, temperatures_uk=[0.0, 1.0, 4.0, 9.0])
        self.evaluator = CountingEvaluator(self.params.v0)

    def test_rows_order_and_shape(self):
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=self.evaluator)
        assert len(rows) == 12
        assert [r.temperature_uk for r in rows[:3]] == [0.0, 0.0, 0.0]
        assert [r.effect for r in rows[:3]] == list(ThermalEffect)

    def test_zero_temperature_rows(self):
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=self.evaluator)
        for row in rows[:3]:
            assert row.delta_f == 0.0
            assert row.delta_d == 0.0
            assert row.v_prime == self.params.v0
        # базовая точность плюс по одной оценке на точку с T > 0
        assert self.evaluator.calls == 1 + 9

    def test_effects_in_isolation(self):
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=self.evaluator)
        by_key = {(r.temperature_uk, r.effect): r for r in rows}
        doppler = by_key[(4.0, ThermalEffect.DOPPLER)]
        interaction = by_key[(4.0, ThermalEffect.INTERACTION)]
        assert doppler.v_prime == self.params.v0
        assert doppler.delta_f == pytest.approx(2 * doppler.delta_d ** 2, rel=1e-12)
        assert interaction.delta_d == 0.0
        assert interaction.delta_f == pytest.approx(self.params.v0 - interaction.v_prime, rel=1e-9)

    def test_composition_residual(self):
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=self.evaluator)
        assert composition_residual(rows, 9.0) == pytest.approx(0.0, abs=1e-12)

    def test_composition_needs_all_effects(self):
        rows = thermal_sweep(None, self.params, self.cfg, effects=["doppler"], evaluator=self.evaluator)
        with pytest.raises(ValueError):
            composition_residual(rows, 1.0)

    def test_doppler_monotone(self):
        rows = thermal_sweep(None, self.params, self.cfg, effects=["doppler"], evaluator=self.evaluator)
        values = [r.delta_f for r in rows]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_workers_do_not_change_rows(self):
        serial = thermal_sweep(None, self.params, self.cfg, evaluator=CountingEvaluator(self.params.v0))
        parallel = thermal_sweep(
            None, self.params, self.cfg, evaluator=CountingEvaluator(self.params.v0), workers=3
        )
        assert sweep_csv(serial) == sweep_csv(parallel)

    def test_empty_temperatures(self):
        cfg = ThermalConfig.from_params(self.params, temperatures_uk=[])
        with pytest.raises(ValueError):
            thermal_sweep(None, self.params, cfg, evaluator=self.evaluator)

    def test_needs_schedule_or_evaluator(self):
        with pytest.raises(ValueError):
            thermal_sweep(None, self.params, self.cfg)

    def test_csv_header(self):
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=self.evaluator)
        lines = sweep_csv(rows).strip().split("\n")
        assert lines[0] == ",".join(SWEEP_HEADER)
        assert len(lines) == 13
        assert lines[1].split(",")[1] == "doppler"

    def test_f_avg_at_temperature(self):
        f_avg, delta_f = f_avg_at_temperature(self.evaluator, self.params, self.cfg)
        assert f_avg == pytest.approx(1.0 - delta_f)
        assert delta_f > 0


class TestMonteCarlo:

    def setup_method(self):
        self.params = default_params()
        self.cfg = ThermalConfig.from_params(self.params)

    def test_mean_matches_variance(self):
        """
        Тест: при δF = δ1² + δ2² среднее по выборкам близко к 2σ²
        """
        evaluator = CountingEvaluator(self.params.v0)
        result = monte_carlo_doppler(evaluator, self.params, self.cfg, 10.0, shots=400, seed=3)
        sigma = doppler_shift(10.0, self.cfg)
        assert result.shots == 400
        assert result.mean_delta_f == pytest.approx(2 * sigma ** 2, rel=0.5)
        assert 0 < result.standard_error < result.mean_delta_f

    def test_seed_reproducible(self):
        first = monte_carlo_doppler(CountingEvaluator(self.params.v0), self.params, self.cfg, 5.0, seed=7)
        second = monte_carlo_doppler(CountingEvaluator(self.params.v0), self.params, self.cfg, 5.0, seed=7)
        assert first.mean_delta_f == second.mean_delta_f

    def test_minimum_shots(self):
        with pytest.raises(ValueError):
            monte_carlo_doppler(CountingEvaluator(self.params.v0), self.params, self.cfg, 5.0, shots=50)


class TestGateEvaluator:

    def setup_method(self):
        self.params = default_params().with_overrides(t_total=0.08, n_steps=20)
        self.cfg = ThermalConfig.from_params(self.params, temperatures_uk=[0.0, 10.0])

    def test_zero_schedule_is_insensitive(self):
        schedule = PulseSchedule.for_params(self.params)
        evaluator = gate_evaluator(schedule, self.params, stop_at=self.params.t_total)
        rows = thermal_sweep(None, self.params, self.cfg, evaluator=evaluator)
        for row in rows:
            assert row.delta_f == pytest.approx(0.0, abs=1e-12)

    def test_driven_schedule_responds_to_doppler(self):
        n = self.params.n_steps
        schedule = PulseSchedule(
            np.full(n, self.params.omega_c_max), np.zeros(n), np.zeros(n), np.zeros(n), self.params.dt
        )
        evaluator = gate_evaluator(schedule, self.params, stop_at=self.params.t_total)
        rows = thermal_sweep(None, self.params, self.cfg, effects=["doppler"], evaluator=evaluator)
        assert rows[0].delta_f == 0.0
        assert abs(rows[1].delta_f) > 0
        assert 0.0 <= rows[1].f_avg <= 1.0
