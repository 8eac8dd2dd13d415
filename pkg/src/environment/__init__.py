"""
Среда МППР для синтеза импульсов CNOT
"""
from .channels import CHANNEL_ORDER, IDEAL_OUTPUTS, Channel, GateChannels, compute_f_avg
from .evaluation import evaluate_schedule
from .gate_env import (
    ActionMode,
    CnotGateEnv,
    EpisodeFinishedError,
    apply_direct,
    apply_incremental,
    decay_penalty,
    terminal_reward,
)
from .metrics import GateMetrics, detect_cutoff, detect_cutoff_index
from .traces import EpisodeTrace

__all__ = [
    'CHANNEL_ORDER',
    'IDEAL_OUTPUTS',
    'ActionMode',
    'Channel',
    'CnotGateEnv',
    'EpisodeFinishedError',
    'EpisodeTrace',
    'GateChannels',
    'GateMetrics',
    'apply_direct',
    'apply_incremental',
    'compute_f_avg',
    'decay_penalty',
    'detect_cutoff',
    'detect_cutoff_index',
    'evaluate_schedule',
    'terminal_reward',
]
