"""
Сбор эпизодов: выборка действий из гауссовой политики и параллельные прогоны сред
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from ..physics.propagator import NumericalAccuracyError
from ..physics.schedule import PulseSchedule
from .networks import ActorCritic, PolicyDistribution

logger = logging.getLogger(__name__)


@dataclass
class ActionSample:
    action: np.ndarray  # обрезанное до [-1, 1]
    raw: np.ndarray  # исходная гауссова выборка
    log_prob: float


@dataclass
class Trajectory:
    """
    Один эпизод для TRPO: наблюдения, необрезанные действия, log π, награды, V(s)
    """
    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    f_avg_final: float = 0.0
    metrics: Any = None
    schedule: Optional[PulseSchedule] = None
    episode_index: int = -1
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.rewards)
        lengths = {len(self.observations), len(self.actions), len(self.log_probs), len(self.values)}
        if lengths != {n}:
            raise ValueError(f"Длины полей эпизода различаются: {sorted(lengths | {n})}")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("Награды эпизода содержат нечисловые значения")

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def total_reward(self) -> float:
        return float(np.sum(self.rewards))


def sample_action(dist: PolicyDistribution, rng: np.random.Generator) -> ActionSample:
    """
    a = clip(μ + σ⊙z, -1, 1), z ~ N(0, I); log π берётся для необрезанной выборки
    """
    raw = dist.mean + dist.std * rng.standard_normal(len(dist.mean))
    return ActionSample(action=np.clip(raw, -1.0, 1.0), raw=raw, log_prob=dist.log_prob(raw))


def run_episode(
    env,
    ac: ActorCritic,
    rng: Optional[np.random.Generator] = None,
    deterministic: bool = False,
    episode_index: int = -1,
) -> Trajectory:
    """
    Полный эпизод среды под текущей политикой

    Args:
        env: среда с интерфейсом gymnasium и методом schedule()
        deterministic: действовать средним политики (σ → 0)
    """
    if rng is None and not deterministic:
        raise ValueError("Для стохастического эпизода нужен генератор rng")

    obs, _ = env.reset()
    observations, actions, log_probs, rewards, values = [], [], [], [], []
    terminated = truncated = False
    info: dict = {}
    while not (terminated or truncated):
        dist = ac.actor.distribution(obs)
        if deterministic:
            sample = ActionSample(np.clip(dist.mean, -1.0, 1.0), dist.mean, dist.log_prob(dist.mean))
        else:
            sample = sample_action(dist, rng)
        observations.append(obs)
        actions.append(sample.raw)
        log_probs.append(sample.log_prob)
        values.append(ac.critic.value(obs))
        obs, reward, terminated, truncated, info = env.step(sample.action)
        rewards.append(reward)

    metrics = info.get('metrics')
    return Trajectory(
        observations=np.array(observations),
        actions=np.array(actions),
        log_probs=np.array(log_probs),
        rewards=np.array(rewards),
        values=np.array(values),
        f_avg_final=float(info.get('f_avg', 0.0)),
        metrics=metrics,
        schedule=env.schedule(),
        episode_index=episode_index,
    )


def deterministic_rollout(ac: ActorCritic, env) -> Trajectory:
    """Эпизод по среднему политики (для оценки и экспорта импульса)"""
    return run_episode(env, ac, deterministic=True)


def episode_rng(seed: int, episode_index: int) -> np.random.Generator:
    """
    Независимый поток случайных чисел эпизода, определяемый (seed, номер эпизода)
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(episode_index,)))


def collect_batch(
    env_factory: Callable[[], Any],
    ac: ActorCritic,
    seed: int,
    episode_indices: Sequence[int],
    workers: int = 1,
) -> List[Optional[Trajectory]]:
    """
    Прогон эпизодов с заданными номерами; порядок результатов совпадает с episode_indices

    Эпизод с ошибкой точности интегратора отбрасывается (None в результате).
    """

    def run_one(index: int) -> Optional[Trajectory]:
        env = env_factory()
        try:
            return run_episode(env, ac, episode_rng(seed, index), episode_index=index)
        except NumericalAccuracyError as e:
            logger.warning(f"Эпизод {index} отброшен: {e}")
            return None

    if workers <= 1 or len(episode_indices) <= 1:
        return [run_one(i) for i in episode_indices]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, episode_indices))
