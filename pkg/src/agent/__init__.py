"""
Агент TRPO: сети актёра и критика, сбор эпизодов, обновления и контрольные точки
"""
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .networks import (
    HIDDEN_SIZES,
    ActorCritic,
    GaussianPolicy,
    PolicyDistribution,
    ValueCritic,
    make_actor_critic,
    policy_forward,
)
from .rollout import Trajectory, collect_batch, deterministic_rollout, run_episode, sample_action
from .trainer import Trainer, TrainingLogRow, TrainingResult, train
from .trpo import TrpoConfig, UpdateDiagnostics, compute_gae, trpo_update

__all__ = [
    'HIDDEN_SIZES',
    'ActorCritic',
    'Checkpoint',
    'CheckpointError',
    'GaussianPolicy',
    'PolicyDistribution',
    'Trainer',
    'TrainingLogRow',
    'TrainingResult',
    'Trajectory',
    'TrpoConfig',
    'UpdateDiagnostics',
    'ValueCritic',
    'collect_batch',
    'compute_gae',
    'deterministic_rollout',
    'load_checkpoint',
    'make_actor_critic',
    'policy_forward',
    'run_episode',
    'sample_action',
    'save_checkpoint',
    'train',
    'trpo_update',
]
