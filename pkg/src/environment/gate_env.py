"""
Эпизодическая среда синтеза CNOT: IU/TU-действия, 24-мерное наблюдение, награда с терминальной точностью и штрафом распада
"""
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from ..config import CUTOFF_THRESHOLD, PROPAGATOR_SUBSTEPS
from ..physics.fidelity import check_density_matrix
from ..physics.hamiltonian import Doppler
from ..physics.params import PhysicalParams, default_params
from ..physics.propagator import NumericalAccuracyError
from ..physics.schedule import PulseSchedule, wrap_phase
from .channels import GateChannels, StepDecay
from .metrics import GateMetrics, detect_cutoff_index
from .traces import EpisodeTrace

logger = logging.getLogger(__name__)

OBSERVATION_DIM = 24
ACTION_DIM = 4
# Нижняя граница 1 - F, чтобы награда оставалась конечной при F = 1
INFIDELITY_FLOOR = 1e-15


class ActionMode(str, Enum):
    IU = "IU"  # приращения управлений
    TU = "TU"  # управления задаются напрямую


class EpisodeFinishedError(RuntimeError):
    """Шаг по уже завершённому эпизоду"""


def terminal_reward(f_avg: float) -> float:
    """-log10(1 - F) с ограничением снизу на 1 - F"""
    return -math.log10(max(1.0 - f_avg, INFIDELITY_FLOOR))


def decay_penalty(params: PhysicalParams, gamma_e_te: float, gamma_r_tr: float) -> float:
    """P = η_e γ_e T_e + η_r γ_r T_r"""
    return params.eta_e * gamma_e_te + params.eta_r * gamma_r_tr


def apply_incremental(
    controls: np.ndarray,
    action: np.ndarray,
    omega_max: np.ndarray,
    xi_omega: float,
    xi_phi: float,
) -> np.ndarray:
    """
    IU-обновление: Ω += a·ξ_Ω·Ω_max с ограничением [0, Ω_max], φ += a·ξ_φ·π с приведением в (-π, π]

    Args:
        controls: текущие (Ω_1..Ω_k, φ_1..φ_k)
        action: действие в [-1, 1], та же длина
        omega_max: максимумы амплитуд, длина k
    """
    action = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    k = len(omega_max)
    out = np.array(controls, dtype=float)
    out[:k] = np.clip(out[:k] + action[:k] * xi_omega * omega_max, 0.0, omega_max)
    if len(out) > k:
        out[k:] = wrap_phase(out[k:] + action[k:] * xi_phi * np.pi)
    return out


def apply_direct(action: np.ndarray, omega_max: np.ndarray) -> np.ndarray:
    """
    TU-обновление: Ω = (a+1)/2·Ω_max, φ = a·π
    """
    action = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    k = len(omega_max)
    out = np.empty_like(action)
    out[:k] = 0.5 * (action[:k] + 1.0) * omega_max
    if len(action) > k:
        out[k:] = wrap_phase(action[k:] * np.pi)
    return out


class CnotGateEnv(gym.Env):
    """
    Среда синхронной оптимизации импульсов управляющего атома и атома-мишени

    Управления хранятся в порядке (Ω_c, Ω_t, φ_c, φ_t). Действие шага i задаёт управления
    на интервале [t_i, t_{i+1}); наблюдение после шага содержит эти управления как
    «предыдущие» для следующего решения.
    """

    metadata = {"render_modes": []}
    observation_dim = OBSERVATION_DIM
    action_dim = ACTION_DIM

    def __init__(
        self,
        params: Optional[PhysicalParams] = None,
        mode: ActionMode = ActionMode.IU,
        substeps: int = PROPAGATOR_SUBSTEPS,
        v: Optional[float] = None,
        doppler: Doppler = 0.0,
        cutoff_threshold: float = CUTOFF_THRESHOLD,
        record_trace: bool = True,
        strict: bool = False,
    ):
        super().__init__()
        self.params = params or default_params()
        self.mode = ActionMode(mode)
        self.cutoff_threshold = cutoff_threshold
        self.record_trace = record_trace
        self.strict = strict
        self.channels = self._build_channels(substeps, v, doppler)
        self.omega_max = self.params.amplitude_caps

        self.observation_space = spaces.Box(
            low=-1.0, high=1.0 + 1e-6, shape=(self.observation_dim,), dtype=np.float64
        )
        self.action_space = spaces.Box(low=-1.0, high=1.0, shape=(self.action_dim,), dtype=np.float64)

        self._reset_state()

    def _build_channels(self, substeps: int, v: Optional[float], doppler: Doppler):
        return GateChannels(self.params, substeps=substeps, v=v, doppler=doppler)

    def _reset_state(self) -> None:
        self.channels.reset()
        self.controls = np.zeros(4)
        self.step_index = 0
        self.done = False
        self.applied: List[np.ndarray] = []
        self.trace = EpisodeTrace(dt=self.params.dt)
        # Что: накопленные величины на сетке t_0..t_i для метрик при любом τ
        self.f_history: List[float] = [self.channels_f_avg()]
        self.fidelity_history: List[np.ndarray] = [self.channels.fidelities()]
        self.cum_gamma_e: List[float] = [0.0]
        self.cum_gamma_r: List[float] = [0.0]
        self.cum_reward: List[float] = [0.0]

    def channels_f_avg(self) -> float:
        return float(np.mean(self.channels.fidelities()))

    @property
    def n_steps(self) -> int:
        return self.params.n_steps

    def observation(self) -> np.ndarray:
        normalized = np.concatenate([self.controls[:2] / self.omega_max, self.controls[2:] / np.pi])
        return np.concatenate([self.channels.observation_populations(), normalized])

    def reset(
        self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None
    ) -> Tuple[np.ndarray, Dict[str, Any]]:
        super().reset(seed=seed)
        self._reset_state()
        return self.observation(), {'f_avg': self.f_history[0], 'controls': self.controls.copy()}

    def next_controls(self, action: np.ndarray) -> np.ndarray:
        if self.mode is ActionMode.IU:
            return apply_incremental(
                self.controls, action, self.omega_max, self.params.xi_omega, self.params.xi_phi
            )
        return apply_direct(action, self.omega_max)

    def step(self, action: np.ndarray) -> Tuple[np.ndarray, float, bool, bool, Dict[str, Any]]:
        """
        Один шаг эпизода

        Returns:
            (наблюдение, награда, terminated, truncated, info)

        Raises:
            EpisodeFinishedError: если эпизод уже завершён
        """
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ValueError(
                f"Ожидается действие размерности {self.action_dim}, получено {action.shape}"
            )
        return self.apply_controls(self.next_controls(action))

    def apply_controls(
        self, controls: np.ndarray
    ) -> Tuple[np.ndarray, float, bool, bool, Dict[str, Any]]:
        """
        Эволюция на один шаг с заданными управлениями (Ω_c, Ω_t, φ_c, φ_t)
        """
        if self.done:
            raise EpisodeFinishedError(
                f"Эпизод завершён после {self.step_index} шагов; вызовите reset()"
            )
        self.controls = np.asarray(controls, dtype=float).copy()
        self.applied.append(self.controls.copy())

        decay: StepDecay = self.channels.advance(*self.controls)
        self.step_index += 1
        if self.strict:
            self.check_states()

        fidelities = self.channels.fidelities()
        f_avg = float(np.mean(fidelities))
        terminated = self.step_index >= self.n_steps

        penalty = decay_penalty(self.params, decay.gamma_e_te, decay.gamma_r_tr)
        reward = (terminal_reward(f_avg) if terminated else 0.0) - penalty

        self.f_history.append(f_avg)
        self.fidelity_history.append(fidelities)
        self.cum_gamma_e.append(self.cum_gamma_e[-1] + decay.gamma_e_te)
        self.cum_gamma_r.append(self.cum_gamma_r[-1] + decay.gamma_r_tr)
        self.cum_reward.append(self.cum_reward[-1] + reward)

        if self.record_trace:
            self.trace.record(self.step_index, reward, f_avg, decay.pop_e_bar, decay.pop_r_bar)

        info: Dict[str, Any] = {
            'f_avg': f_avg,
            'pop_e_bar': decay.pop_e_bar,
            'pop_r_bar': decay.pop_r_bar,
            'controls': self.controls.copy(),
        }
        if terminated:
            self.done = True
            info['metrics'] = self.episode_metrics()
            logger.debug(f"Эпизод завершён: F_avg(t_N)={f_avg:.6f}")
        return self.observation(), reward, terminated, False, info

    def check_states(self) -> None:
        """
        Проверка инвариантов всех матриц плотности после шага (режим strict)

        Raises:
            NumericalAccuracyError: если матрица канала перестала быть матрицей плотности
        """
        for name, rho in self.channels.density_matrices().items():
            try:
                check_density_matrix(rho)
            except ValueError as e:
                label = getattr(name, "value", name)
                raise NumericalAccuracyError(str(e), context=f"шаг {self.step_index}, канал {label}") from e

    def schedule(self) -> PulseSchedule:
        """Импульс, применённый в текущем эпизоде (шаги 0..i-1)"""
        if not self.applied:
            return PulseSchedule.zeros(0, self.params.dt)
        arr = np.array(self.applied)
        return PulseSchedule(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], self.params.dt)

    def metrics_at(self, k: int) -> GateMetrics:
        """
        GateMetrics в момент t_k по накопленной истории эпизода
        """
        if not 0 <= k <= self.step_index:
            raise ValueError(f"Шаг {k} вне пройденного диапазона 0..{self.step_index}")
        f_avg = self.f_history[k]
        gamma_e_te = self.cum_gamma_e[k]
        gamma_r_tr = self.cum_gamma_r[k]
        return GateMetrics(
            tau_min=k * self.params.dt,
            f_avg=f_avg,
            f_per_channel=tuple(float(x) for x in self.fidelity_history[k]),
            gamma_e_te=gamma_e_te,
            gamma_r_tr=gamma_r_tr,
            reward_total=terminal_reward(f_avg) - decay_penalty(self.params, gamma_e_te, gamma_r_tr),
            f_avg_full=self.f_history[-1],
        )

    def episode_metrics(self, threshold: Optional[float] = None) -> GateMetrics:
        """
        Метрики при автоматически найденной отсечке τ_min
        """
        threshold = self.cutoff_threshold if threshold is None else threshold
        k = detect_cutoff_index(self.schedule(), self.params, threshold)
        return self.metrics_at(k)
