"""
Командная строка: конфигурация запусков, запись артефактов и команды
"""
from .commands import (
    cmd_eval,
    cmd_export_pulse,
    cmd_report,
    cmd_sweep_thermal,
    cmd_train,
    summarize_schedule,
)
from .run_config import ConfigError, RunConfig, RunMode, load_run_config
from .run_store import RunDirectoryError, RunStore

__all__ = [
    'ConfigError',
    'RunConfig',
    'RunDirectoryError',
    'RunMode',
    'RunStore',
    'cmd_eval',
    'cmd_export_pulse',
    'cmd_report',
    'cmd_sweep_thermal',
    'cmd_train',
    'load_run_config',
    'summarize_schedule',
]
