"""
Среда оптимизации рамановского импульса атома-мишени в кусочном протоколе
"""
import logging
from typing import Dict, Optional

import numpy as np
from scipy.integrate import trapezoid

from ..config import CUTOFF_THRESHOLD, PROPAGATOR_SUBSTEPS
from ..environment.channels import StepDecay, excited_populations
from ..environment.gate_env import ActionMode, CnotGateEnv, apply_incremental
from ..environment.metrics import GateMetrics
from ..physics.dissipator import build_dissipator
from ..physics.fidelity import state_fidelity
from ..physics.hamiltonian import (
    G0,
    SINGLE_DIM,
    AtomRole,
    Doppler,
    blockaded_target_hamiltonian,
    build_single_atom_hamiltonian,
)
from ..physics.params import PhysicalParams, default_params
from ..physics.propagator import propagate_many
from ..physics.schedule import PulseSchedule
from .piecewise import PiecewiseConfig, PiecewiseMode

logger = logging.getLogger(__name__)

# Идеальные выходы мишени: без блокады |0> остаётся, при блокаде переходит в |1>
UNBLOCKED_IDEAL = np.array([1, 0], dtype=complex)
BLOCKADED_IDEAL = np.array([0, 1], dtype=complex)


class TargetChannels:
    """
    Два канала мишени из |0>_t: без блокады (Ĥ_t) и с контрольным атомом в |r> (Ĥ_t + V|r><r|)
    """

    def __init__(
        self,
        params: PhysicalParams,
        substeps: int = PROPAGATOR_SUBSTEPS,
        v: Optional[float] = None,
        doppler: Doppler = 0.0,
    ):
        self.params = params
        self.substeps = substeps
        self.v = params.v0 if v is None else v
        self.doppler = float(doppler[1]) if isinstance(doppler, tuple) else float(doppler)
        self.dissipator = build_dissipator(params, SINGLE_DIM)
        self.reset()

    def reset(self) -> None:
        rho = np.zeros((SINGLE_DIM, SINGLE_DIM), dtype=complex)
        rho[G0, G0] = 1.0
        self.unblocked = rho.copy()
        self.blockaded = rho.copy()
        self.step_index = 0

    def advance(self, omega_c: float, omega_t: float, phi_c: float, phi_t: float) -> StepDecay:
        """
        Шаг эволюции обоих каналов; управления контрольного атома не используются
        """
        context = f"шаг {self.step_index}"
        h_free = build_single_atom_hamiltonian(
            self.params, AtomRole.TARGET, omega_t, phi_t, self.doppler
        )
        h_blocked = blockaded_target_hamiltonian(self.params, omega_t, phi_t, self.v, self.doppler)

        free = propagate_many(self.unblocked[np.newaxis], h_free, self.dissipator, self.params.dt,
                              self.substeps, context=f"{context}, канал без блокады")
        blocked = propagate_many(self.blockaded[np.newaxis], h_blocked, self.dissipator,
                                 self.params.dt, self.substeps, context=f"{context}, канал с блокадой")
        self.unblocked = free.rhos[0]
        self.blockaded = blocked.rhos[0]
        self.step_index += 1

        pops = np.concatenate([free.populations, blocked.populations])
        pop_e, pop_r = excited_populations(pops, two_atom=False)
        n_e = pop_e.mean(axis=0)
        n_r = pop_r.mean(axis=0)
        return StepDecay(
            gamma_e_te=float(self.params.gamma_e * trapezoid(n_e, dx=free.substep)),
            gamma_r_tr=float(self.params.gamma_r * trapezoid(n_r, dx=free.substep)),
            pop_e_bar=float(n_e[-1]),
            pop_r_bar=float(n_r[-1]),
        )

    def fidelities(self) -> np.ndarray:
        """(F00, F10)"""
        return np.array([
            state_fidelity(self.unblocked, UNBLOCKED_IDEAL),
            state_fidelity(self.blockaded, BLOCKADED_IDEAL),
        ])

    def density_matrices(self) -> Dict[str, np.ndarray]:
        return {"unblocked": self.unblocked, "blockaded": self.blockaded}

    def observation_populations(self) -> np.ndarray:
        return np.concatenate([np.real(np.diag(self.unblocked)), np.real(np.diag(self.blockaded))])


class TargetRamanEnv(CnotGateEnv):
    """
    Среда мишени: наблюдение 9 (Ω_t) или 10 (Ω_t, φ_t) компонент, действие δΩ_t или (δΩ_t, δφ_t)

    Управления хранятся в том же порядке (Ω_c, Ω_t, φ_c, φ_t), Ω_c = φ_c = 0,
    поэтому импульс экспортируется в общем формате.
    """

    def __init__(
        self,
        cfg: PiecewiseConfig,
        params: Optional[PhysicalParams] = None,
        substeps: int = PROPAGATOR_SUBSTEPS,
        v: Optional[float] = None,
        doppler: Doppler = 0.0,
        cutoff_threshold: float = CUTOFF_THRESHOLD,
        record_trace: bool = True,
        strict: bool = False,
    ):
        self.cfg = cfg
        self.observation_dim = 9 if cfg.adiabatic else 10
        self.action_dim = 1 if cfg.adiabatic else 2
        super().__init__(
            params=cfg.target_params(params or default_params()),
            mode=ActionMode.IU,
            substeps=substeps,
            v=v,
            doppler=doppler,
            cutoff_threshold=cutoff_threshold,
            record_trace=record_trace,
            strict=strict,
        )

    def _build_channels(self, substeps: int, v: Optional[float], doppler: Doppler) -> TargetChannels:
        return TargetChannels(self.params, substeps=substeps, v=v, doppler=doppler)

    def observation(self) -> np.ndarray:
        controls = [self.controls[1] / self.params.omega_t_max]
        if not self.cfg.adiabatic:
            controls.append(self.controls[3] / np.pi)
        return np.concatenate([self.channels.observation_populations(), controls])

    def next_controls(self, action: np.ndarray) -> np.ndarray:
        full = np.zeros(4)
        full[1] = action[0]
        if not self.cfg.adiabatic:
            full[3] = action[1]
        return apply_incremental(
            self.controls, full, self.omega_max, self.params.xi_omega, self.params.xi_phi
        )


def make_target_env(cfg: PiecewiseConfig, params: Optional[PhysicalParams] = None, **kwargs) -> TargetRamanEnv:
    return TargetRamanEnv(cfg, params, **kwargs)


def target_env_adiabatic(cfg: PiecewiseConfig, params: Optional[PhysicalParams] = None, **kwargs) -> TargetRamanEnv:
    """Среда адиабатического протокола (только амплитуда)"""
    if not cfg.adiabatic:
        raise ValueError(f"Режим {cfg.mode.value} не является адиабатическим")
    return TargetRamanEnv(cfg, params, **kwargs)


def target_env_nonadiabatic(cfg: PiecewiseConfig, params: Optional[PhysicalParams] = None, **kwargs) -> TargetRamanEnv:
    """Среда неадиабатического протокола (амплитуда и фаза)"""
    if cfg.mode is not PiecewiseMode.NON_ADIABATIC:
        raise ValueError(f"Режим {cfg.mode.value} не является неадиабатическим")
    return TargetRamanEnv(cfg, params, **kwargs)


def evaluate_target_schedule(
    schedule: PulseSchedule,
    cfg: PiecewiseConfig,
    params: Optional[PhysicalParams] = None,
    threshold: float = CUTOFF_THRESHOLD,
    **kwargs,
) -> GateMetrics:
    """
    Повтор импульса мишени и метрики при автоматической отсечке

    Raises:
        ScheduleFormatError: сетка импульса не совпадает с сеткой протокола
    """
    env = TargetRamanEnv(cfg, params, record_trace=False, **kwargs)
    schedule.validate_against(env.params)
    env.reset()
    for i in range(schedule.n_steps):
        env.apply_controls(np.array(schedule.controls(i)))
    return env.episode_metrics(threshold)
