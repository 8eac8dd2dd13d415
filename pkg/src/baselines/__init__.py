"""
Кусочные протоколы EIT для сравнения с синхронной оптимизацией
"""
from .piecewise import (
    PIECEWISE_REPORT_HEADER,
    PiecewiseConfig,
    PiecewiseMode,
    PiecewiseReport,
    PiPulseCalibrationError,
    SquarePiPulse,
    build_piecewise_report,
    dark_state_overlap,
    epsilon_control,
    piecewise_f_avg,
    piecewise_report_csv,
    square_pi_schedule,
)
from .target_env import (
    TargetRamanEnv,
    evaluate_target_schedule,
    make_target_env,
    target_env_adiabatic,
    target_env_nonadiabatic,
)

__all__ = [
    'PIECEWISE_REPORT_HEADER',
    'PiPulseCalibrationError',
    'PiecewiseConfig',
    'PiecewiseMode',
    'PiecewiseReport',
    'SquarePiPulse',
    'TargetRamanEnv',
    'build_piecewise_report',
    'dark_state_overlap',
    'epsilon_control',
    'evaluate_target_schedule',
    'make_target_env',
    'piecewise_f_avg',
    'piecewise_report_csv',
    'square_pi_schedule',
    'target_env_adiabatic',
    'target_env_nonadiabatic',
]
