"""
Сети актёра и критика: MLP [obs, 156, 48, 16, out] с tanh и гауссова политика
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from ..config import TRPO_INITIAL_STD

logger = logging.getLogger(__name__)

HIDDEN_SIZES: Tuple[int, ...] = (156, 48, 16)
# Масштаб выходного слоя актёра: малые начальные действия
ACTOR_OUTPUT_GAIN = 0.01
LOG_2PI = math.log(2.0 * math.pi)


def build_mlp(
    in_dim: int,
    out_dim: int,
    hidden: Sequence[int] = HIDDEN_SIZES,
    output_gain: float = 1.0,
) -> nn.Sequential:
    """
    Полносвязная сеть с tanh на скрытых слоях и линейным выходом (float64)

    Скрытые слои инициализируются ортогонально с усилением для tanh,
    смещения нулевые; выходной слой ортогональный с усилением output_gain.
    """
    sizes = [in_dim, *hidden, out_dim]
    layers = []
    tanh_gain = nn.init.calculate_gain('tanh')
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        linear = nn.Linear(n_in, n_out, dtype=torch.float64)
        is_output = i == len(sizes) - 2
        nn.init.orthogonal_(linear.weight, gain=output_gain if is_output else tanh_gain)
        nn.init.zeros_(linear.bias)
        layers.append(linear)
        if not is_output:
            layers.append(nn.Tanh())
    return nn.Sequential(*layers)


@dataclass
class PolicyDistribution:
    """
    Диагональное гауссово распределение действий N(μ, diag σ²)
    """
    mean: np.ndarray
    log_std: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)

    def log_prob(self, raw_action: np.ndarray) -> float:
        """Логарифм плотности для необрезанного действия"""
        z = (np.asarray(raw_action) - self.mean) / self.std
        return float(-0.5 * np.sum(z * z) - np.sum(self.log_std) - 0.5 * len(self.mean) * LOG_2PI)


class GaussianPolicy(nn.Module):
    """
    Актёр: среднее μ_θ(s) из MLP и обучаемый log σ, не зависящий от состояния
    """

    def __init__(
        self,
        obs_dim: int,
        act_dim: int,
        hidden: Sequence[int] = HIDDEN_SIZES,
        initial_std: float = TRPO_INITIAL_STD,
    ):
        super().__init__()
        if initial_std <= 0:
            raise ValueError(f"Начальное σ должно быть положительным, получено {initial_std}")
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.mean_net = build_mlp(obs_dim, act_dim, hidden, output_gain=ACTOR_OUTPUT_GAIN)
        self.log_std = nn.Parameter(torch.full((act_dim,), math.log(initial_std), dtype=torch.float64))

    def _check_obs(self, obs: torch.Tensor) -> None:
        if obs.shape[-1] != self.obs_dim:
            raise ValueError(
                f"Размерность наблюдения {obs.shape[-1]} не совпадает со входом сети {self.obs_dim}"
            )

    def forward(self, obs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """(μ, log σ) для пачки наблюдений"""
        self._check_obs(obs)
        mean = self.mean_net(obs)
        return mean, self.log_std.expand_as(mean)

    def log_prob(self, obs: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        mean, log_std = self(obs)
        z = (actions - mean) / torch.exp(log_std)
        return -0.5 * (z * z).sum(-1) - log_std.sum(-1) - 0.5 * self.act_dim * LOG_2PI

    def kl(self, obs: torch.Tensor, old_mean: torch.Tensor, old_log_std: torch.Tensor) -> torch.Tensor:
        """
        Среднее по пачке KL(старая ‖ новая) для диагональных гауссиан
        """
        mean, log_std = self(obs)
        old_var = torch.exp(2.0 * old_log_std)
        var = torch.exp(2.0 * log_std)
        per_dim = log_std - old_log_std + (old_var + (old_mean - mean) ** 2) / (2.0 * var) - 0.5
        return per_dim.sum(-1).mean()

    def entropy(self) -> torch.Tensor:
        return (self.log_std + 0.5 * (1.0 + LOG_2PI)).sum()

    @torch.no_grad()
    def distribution(self, obs: np.ndarray) -> PolicyDistribution:
        """Распределение для одного наблюдения (numpy)"""
        mean, log_std = self(torch.as_tensor(obs, dtype=torch.float64))
        return PolicyDistribution(mean.numpy().copy(), log_std.numpy().copy())


class ValueCritic(nn.Module):
    """
    Критик: оценка V(s) той же архитектуры с одним выходом
    """

    def __init__(self, obs_dim: int, hidden: Sequence[int] = HIDDEN_SIZES):
        super().__init__()
        self.obs_dim = obs_dim
        self.net = build_mlp(obs_dim, 1, hidden, output_gain=1.0)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.net(obs).squeeze(-1)

    @torch.no_grad()
    def value(self, obs: np.ndarray) -> float:
        return float(self(torch.as_tensor(obs, dtype=torch.float64)))


def policy_forward(actor: GaussianPolicy, obs: np.ndarray) -> PolicyDistribution:
    """
    Детерминированное отображение наблюдения в распределение действий

    Raises:
        ValueError: размерность наблюдения не совпадает со входом сети
    """
    return actor.distribution(obs)


@dataclass
class ActorCritic:
    actor: GaussianPolicy
    critic: ValueCritic
    hidden: Tuple[int, ...] = HIDDEN_SIZES
    meta: Dict[str, float] = field(default_factory=dict)

    @property
    def obs_dim(self) -> int:
        return self.actor.obs_dim

    @property
    def act_dim(self) -> int:
        return self.actor.act_dim

    def layer_shapes(self) -> Dict[str, list]:
        shapes = {f"actor.{k}": list(v.shape) for k, v in self.actor.state_dict().items()}
        shapes.update({f"critic.{k}": list(v.shape) for k, v in self.critic.state_dict().items()})
        return shapes


def make_actor_critic(
    obs_dim: int,
    act_dim: int,
    seed: int,
    hidden: Sequence[int] = HIDDEN_SIZES,
    initial_std: float = TRPO_INITIAL_STD,
) -> ActorCritic:
    """
    Инициализация актёра и критика, полностью определяемая seed

    Глобальный генератор torch не затрагивается.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        actor = GaussianPolicy(obs_dim, act_dim, hidden, initial_std)
        critic = ValueCritic(obs_dim, hidden)
    logger.debug(
        f"Созданы сети: obs_dim={obs_dim}, act_dim={act_dim}, скрытые слои {list(hidden)}"
    )
    return ActorCritic(
        actor=actor, critic=critic, hidden=tuple(hidden), meta={'initial_std': float(initial_std)}
    )
