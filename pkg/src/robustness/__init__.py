"""
Анализ устойчивости обученных импульсов к тепловому движению атомов
"""
from .thermal import (
    SWEEP_HEADER,
    MonteCarloResult,
    SweepRow,
    ThermalConfig,
    ThermalEffect,
    composition_residual,
    doppler_shift,
    f_avg_at_temperature,
    fluctuated_interaction,
    gate_evaluator,
    monte_carlo_doppler,
    rms_velocity,
    sweep_csv,
    target_evaluator,
    thermal_sweep,
)

__all__ = [
    'SWEEP_HEADER',
    'MonteCarloResult',
    'SweepRow',
    'ThermalConfig',
    'ThermalEffect',
    'composition_residual',
    'doppler_shift',
    'f_avg_at_temperature',
    'fluctuated_interaction',
    'gate_evaluator',
    'monte_carlo_doppler',
    'rms_velocity',
    'sweep_csv',
    'target_evaluator',
    'thermal_sweep',
]
