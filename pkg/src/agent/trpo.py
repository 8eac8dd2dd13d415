"""
Оптимизация политики в доверительной области (TRPO) с оценкой преимуществ GAE
"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch.nn.utils import parameters_to_vector, vector_to_parameters

from ..config import (
    SEED,
    TRPO_CG_DAMPING,
    TRPO_CG_ITERATIONS,
    TRPO_CRITIC_EPOCHS,
    TRPO_CRITIC_STEP_SIZE,
    TRPO_DISCOUNT,
    TRPO_EPISODES_PER_UPDATE,
    TRPO_GAE_LAMBDA,
    TRPO_KL_BOUND,
    TRPO_LINE_SEARCH_SHRINK,
    TRPO_LINE_SEARCH_STEPS,
)
from .networks import ActorCritic, GaussianPolicy

logger = logging.getLogger(__name__)

CRITIC_MINIBATCH = 256


@dataclass
class TrpoConfig:
    kl_bound: float = TRPO_KL_BOUND
    discount: float = TRPO_DISCOUNT
    gae_lambda: float = TRPO_GAE_LAMBDA
    episodes_per_update: int = TRPO_EPISODES_PER_UPDATE
    cg_iterations: int = TRPO_CG_ITERATIONS
    cg_damping: float = TRPO_CG_DAMPING
    line_search_steps: int = TRPO_LINE_SEARCH_STEPS
    line_search_shrink: float = TRPO_LINE_SEARCH_SHRINK
    critic_epochs: int = TRPO_CRITIC_EPOCHS
    critic_step_size: float = TRPO_CRITIC_STEP_SIZE
    seed: int = SEED

    def __post_init__(self) -> None:
        # Что: kl_bound = 0 допустим как вырожденная граница (ни один шаг не принимается)
        if self.kl_bound < 0:
            raise ValueError(f"kl_bound не может быть отрицательным, получено {self.kl_bound}")
        if not 0 < self.discount <= 1:
            raise ValueError(f"Коэффициент дисконтирования должен лежать в (0, 1], получено {self.discount}")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError(f"gae_lambda должен лежать в [0, 1], получено {self.gae_lambda}")
        if self.episodes_per_update < 1:
            raise ValueError(f"episodes_per_update должен быть >= 1, получено {self.episodes_per_update}")
        if not 0 < self.line_search_shrink < 1:
            raise ValueError(f"line_search_shrink должен лежать в (0, 1), получено {self.line_search_shrink}")
        if self.cg_iterations < 1 or self.line_search_steps < 1 or self.critic_epochs < 0:
            raise ValueError("Число итераций CG и шагов линейного поиска должно быть >= 1")
        if self.cg_damping < 0 or self.critic_step_size <= 0:
            raise ValueError("cg_damping >= 0 и critic_step_size > 0")

    def with_overrides(self, **overrides: Any) -> "TrpoConfig":
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class UpdateDiagnostics:
    """
    Итоги одного обновления политики
    """
    kl: float = 0.0
    surrogate_before: float = 0.0
    surrogate_after: float = 0.0
    accepted: bool = False
    step_fraction: float = 0.0
    line_search_iterations: int = 0
    critic_loss_before: float = float('nan')
    critic_loss_after: float = float('nan')
    critic_losses: List[float] = dataclasses.field(default_factory=list)
    aborted: Optional[str] = None

    @property
    def surrogate_delta(self) -> float:
        return self.surrogate_after - self.surrogate_before


def compute_gae(
    trajectories: Sequence,
    discount: float,
    lam: float,
    normalize: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Обобщённая оценка преимуществ по эпизодам, завершающимся на последнем шаге

    Args:
        trajectories: эпизоды с полями rewards и values
        discount: коэффициент дисконтирования
        lam: параметр λ
        normalize: нормировать преимущества к нулевому среднему и единичной дисперсии по пачке

    Returns:
        (advantages, returns), сцепленные по эпизодам
    """
    if not trajectories:
        raise ValueError("Пустая пачка эпизодов")

    advantages, returns = [], []
    for traj in trajectories:
        rewards = np.asarray(traj.rewards, dtype=float)
        values = np.asarray(traj.values, dtype=float)
        next_values = np.append(values[1:], 0.0)
        deltas = rewards + discount * next_values - values
        adv = np.zeros_like(rewards)
        running = 0.0
        for t in range(len(rewards) - 1, -1, -1):
            running = deltas[t] + discount * lam * running
            adv[t] = running
        advantages.append(adv)
        returns.append(adv + values)

    adv_all = np.concatenate(advantages)
    ret_all = np.concatenate(returns)
    if normalize:
        std = adv_all.std()
        adv_all = adv_all - adv_all.mean()
        if std > 0:
            adv_all = adv_all / (std + 1e-8)
    return adv_all, ret_all


def conjugate_gradient(
    matvec: Callable[[torch.Tensor], torch.Tensor],
    b: torch.Tensor,
    iterations: int,
    residual_tol: float = 1e-10,
) -> torch.Tensor:
    """
    Решение A x = b методом сопряжённых градиентов для симметричной положительной A
    """
    x = torch.zeros_like(b)
    r = b.clone()
    p = b.clone()
    rr = torch.dot(r, r)
    for _ in range(iterations):
        if rr <= residual_tol:
            break
        ap = matvec(p)
        alpha = rr / torch.dot(p, ap)
        x = x + alpha * p
        r = r - alpha * ap
        rr_new = torch.dot(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


def fisher_vector_product(
    actor: GaussianPolicy,
    obs: torch.Tensor,
    vector: torch.Tensor,
    damping: float = 0.0,
) -> torch.Tensor:
    """
    Произведение информационной матрицы Фишера на вектор: ∇²KL(π_old ‖ π_θ)·v + damping·v

    Гессиан KL берётся в текущей точке θ = θ_old.
    """
    with torch.no_grad():
        old_mean, old_log_std = actor(obs)
    params = list(actor.parameters())
    kl = actor.kl(obs, old_mean, old_log_std)
    grads = torch.autograd.grad(kl, params, create_graph=True)
    flat_grad = torch.cat([g.reshape(-1) for g in grads])
    grad_v = torch.dot(flat_grad, vector)
    hvp = torch.autograd.grad(grad_v, params)
    flat_hvp = torch.cat([g.reshape(-1) for g in hvp])
    return flat_hvp + damping * vector


def surrogate_gradient(
    actor: GaussianPolicy,
    obs: torch.Tensor,
    actions: torch.Tensor,
    advantages: torch.Tensor,
    old_log_prob: torch.Tensor,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """(значение суррогатной цели, её градиент по параметрам актёра)"""
    ratio = torch.exp(actor.log_prob(obs, actions) - old_log_prob)
    surrogate = (ratio * advantages).mean()
    grads = torch.autograd.grad(surrogate, list(actor.parameters()))
    return surrogate.detach(), torch.cat([g.reshape(-1) for g in grads])


def batch_tensors(trajectories: Sequence) -> Tuple[torch.Tensor, torch.Tensor]:
    obs = torch.as_tensor(np.concatenate([t.observations for t in trajectories]), dtype=torch.float64)
    actions = torch.as_tensor(np.concatenate([t.actions for t in trajectories]), dtype=torch.float64)
    return obs, actions


def update_critic(
    ac: ActorCritic,
    obs: torch.Tensor,
    returns: torch.Tensor,
    cfg: TrpoConfig,
    rng: np.random.Generator,
    diagnostics: UpdateDiagnostics,
) -> None:
    """
    Регрессия критика на отдачи: эпохи Adam по мини-пачкам

    Эпоха, увеличившая ошибку на всей пачке, откатывается.
    """
    critic = ac.critic
    optimizer = torch.optim.Adam(critic.parameters(), lr=cfg.critic_step_size)

    def full_loss() -> float:
        with torch.no_grad():
            return float(torch.mean((critic(obs) - returns) ** 2))

    loss = full_loss()
    diagnostics.critic_loss_before = loss
    diagnostics.critic_losses = [loss]
    n = len(returns)
    for _ in range(cfg.critic_epochs):
        saved = parameters_to_vector(critic.parameters()).detach().clone()
        order = torch.as_tensor(rng.permutation(n))
        for start in range(0, n, CRITIC_MINIBATCH):
            idx = order[start:start + CRITIC_MINIBATCH]
            optimizer.zero_grad()
            batch_loss = torch.mean((critic(obs[idx]) - returns[idx]) ** 2)
            batch_loss.backward()
            optimizer.step()
        new_loss = full_loss()
        if not np.isfinite(new_loss) or new_loss > loss:
            vector_to_parameters(saved, critic.parameters())
        else:
            loss = new_loss
        diagnostics.critic_losses.append(loss)
    diagnostics.critic_loss_after = loss


def trpo_update(
    ac: ActorCritic,
    trajectories: Sequence,
    cfg: TrpoConfig,
    rng: Optional[np.random.Generator] = None,
) -> UpdateDiagnostics:
    """
    Одно обновление TRPO: натуральный градиент через CG, линейный поиск с ограничением KL, регрессия критика

    Args:
        ac: актёр и критик (изменяются на месте)
        trajectories: пачка эпизодов
        cfg: гиперпараметры
        rng: генератор для перемешивания мини-пачек критика

    Returns:
        UpdateDiagnostics с достигнутым KL, приростом суррогатной цели и итогом поиска
    """
    if not trajectories:
        raise ValueError("Пустая пачка эпизодов")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    diagnostics = UpdateDiagnostics()
    actor = ac.actor

    advantages_np, returns_np = compute_gae(trajectories, cfg.discount, cfg.gae_lambda)
    obs, actions = batch_tensors(trajectories)
    advantages = torch.as_tensor(advantages_np, dtype=torch.float64)
    returns = torch.as_tensor(returns_np, dtype=torch.float64)

    with torch.no_grad():
        old_mean, old_log_std = actor(obs)
        old_log_prob = actor.log_prob(obs, actions)

    surrogate, gradient = surrogate_gradient(actor, obs, actions, advantages, old_log_prob)
    diagnostics.surrogate_before = diagnostics.surrogate_after = float(surrogate)

    if torch.count_nonzero(gradient) == 0:
        logger.debug("Нулевой градиент суррогатной цели: политика не меняется")
    else:
        _policy_step(actor, obs, actions, advantages, old_log_prob, old_mean, old_log_std,
                     gradient, cfg, diagnostics)

    update_critic(ac, obs, returns, cfg, rng, diagnostics)
    logger.debug(
        f"TRPO: KL={diagnostics.kl:.3e}, Δсуррогат={diagnostics.surrogate_delta:.3e}, "
        f"принят={diagnostics.accepted}, критик {diagnostics.critic_loss_before:.4g} -> "
        f"{diagnostics.critic_loss_after:.4g}"
    )
    return diagnostics


def _policy_step(
    actor: GaussianPolicy,
    obs: torch.Tensor,
    actions: torch.Tensor,
    advantages: torch.Tensor,
    old_log_prob: torch.Tensor,
    old_mean: torch.Tensor,
    old_log_std: torch.Tensor,
    gradient: torch.Tensor,
    cfg: TrpoConfig,
    diagnostics: UpdateDiagnostics,
) -> None:
    def fvp(v: torch.Tensor) -> torch.Tensor:
        return fisher_vector_product(actor, obs, v, cfg.cg_damping)

    step_dir = conjugate_gradient(fvp, gradient, cfg.cg_iterations)
    quad = torch.dot(step_dir, fvp(step_dir))
    if not torch.all(torch.isfinite(step_dir)) or not torch.isfinite(quad) or quad <= 0:
        diagnostics.aborted = "нечисловой результат CG"
        logger.warning("TRPO: CG вернул нечисловой шаг, обновление политики пропущено")
        return

    full_step = torch.sqrt(2.0 * cfg.kl_bound / quad) * step_dir
    old_params = parameters_to_vector(actor.parameters()).detach().clone()

    fraction = 1.0
    for k in range(cfg.line_search_steps):
        vector_to_parameters(old_params + fraction * full_step, actor.parameters())
        with torch.no_grad():
            ratio = torch.exp(actor.log_prob(obs, actions) - old_log_prob)
            new_surrogate = float((ratio * advantages).mean())
            kl = float(actor.kl(obs, old_mean, old_log_std))
        improvement = new_surrogate - diagnostics.surrogate_before
        if np.isfinite(kl) and kl <= cfg.kl_bound and improvement > 0:
            diagnostics.accepted = True
            diagnostics.kl = kl
            diagnostics.surrogate_after = new_surrogate
            diagnostics.step_fraction = fraction
            diagnostics.line_search_iterations = k + 1
            return
        fraction *= cfg.line_search_shrink

    vector_to_parameters(old_params, actor.parameters())
    diagnostics.line_search_iterations = cfg.line_search_steps
    logger.debug("TRPO: линейный поиск не нашёл допустимого шага")
