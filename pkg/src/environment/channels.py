"""
Четыре канала вычислительного базиса CNOT: Stay00, Stay01 (4-мерные), Transfer10, Transfer11 (16-мерные)
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from ..config import PROPAGATOR_SUBSTEPS
from ..physics.dissipator import build_dissipator
from ..physics.fidelity import state_fidelity
from ..physics.hamiltonian import (
    E,
    R,
    SINGLE_DIM,
    TWO_ATOM_DIM,
    AtomRole,
    Doppler,
    build_single_atom_hamiltonian,
    build_two_atom_hamiltonian,
    two_atom_index,
)
from ..physics.params import PhysicalParams
from ..physics.propagator import propagate_many

logger = logging.getLogger(__name__)


class Channel(str, Enum):
    STAY00 = "Stay00"
    STAY01 = "Stay01"
    TRANSFER10 = "Transfer10"
    TRANSFER11 = "Transfer11"


CHANNEL_ORDER = (Channel.STAY00, Channel.STAY01, Channel.TRANSFER10, Channel.TRANSFER11)

# Таблица истинности CNOT в вычислительном подпространстве канала
# Stay: базис {|0>_t, |1>_t}; Transfer: базис {|00>, |01>, |10>, |11>}
IDEAL_OUTPUTS: Dict[Channel, np.ndarray] = {
    Channel.STAY00: np.array([1, 0], dtype=complex),
    Channel.STAY01: np.array([0, 1], dtype=complex),
    Channel.TRANSFER10: np.array([0, 0, 0, 1], dtype=complex),
    Channel.TRANSFER11: np.array([0, 0, 1, 0], dtype=complex),
}


def basis_density_matrix(dim: int, index: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def initial_density_matrices() -> Tuple[np.ndarray, np.ndarray]:
    """
    Начальные состояния: (Stay00, Stay01) в 4-мерном пространстве мишени,
    (Transfer10, Transfer11) в 16-мерном пространстве пары
    """
    stay = np.stack([basis_density_matrix(SINGLE_DIM, 0), basis_density_matrix(SINGLE_DIM, 1)])
    transfer = np.stack([
        basis_density_matrix(TWO_ATOM_DIM, two_atom_index(1, 0)),
        basis_density_matrix(TWO_ATOM_DIM, two_atom_index(1, 1)),
    ])
    return stay, transfer


def excited_populations(diagonals: np.ndarray, two_atom: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Населённости |e> и |r> по диагоналям (..., d)

    Для 16-мерных каналов суммируются вклады обоих атомов.
    """
    if not two_atom:
        return diagonals[..., E], diagonals[..., R]
    grid = diagonals.reshape(diagonals.shape[:-1] + (SINGLE_DIM, SINGLE_DIM))
    control = grid.sum(axis=-1)
    target = grid.sum(axis=-2)
    return control[..., E] + target[..., E], control[..., R] + target[..., R]


@dataclass
class StepDecay:
    """
    Интегральные ошибки распада за шаг (усреднённые по четырём каналам)
    """
    gamma_e_te: float
    gamma_r_tr: float
    pop_e_bar: float  # мгновенные средние населённости в конце шага
    pop_r_bar: float


class GateChannels:
    """
    Совместная эволюция четырёх каналов под общими управлениями
    """

    def __init__(
        self,
        params: PhysicalParams,
        substeps: int = PROPAGATOR_SUBSTEPS,
        v: Optional[float] = None,
        doppler: Doppler = 0.0,
    ):
        """
        Args:
            params: физические параметры
            substeps: число подшагов пропагатора
            v: взаимодействие (по умолчанию params.v0)
            doppler: доплеровский сдвиг уровня |r> (общий или пара control/target)
        """
        self.params = params
        self.substeps = substeps
        self.v = params.v0 if v is None else v
        self.doppler = doppler
        self.stay_dissipator = build_dissipator(params, SINGLE_DIM)
        self.transfer_dissipator = build_dissipator(params, TWO_ATOM_DIM)
        self.stay, self.transfer = initial_density_matrices()
        self.step_index = 0

    def reset(self) -> None:
        self.stay, self.transfer = initial_density_matrices()
        self.step_index = 0

    @property
    def target_doppler(self) -> float:
        if isinstance(self.doppler, tuple):
            return float(self.doppler[1])
        return float(self.doppler)

    def density_matrices(self) -> Dict[Channel, np.ndarray]:
        return {
            Channel.STAY00: self.stay[0],
            Channel.STAY01: self.stay[1],
            Channel.TRANSFER10: self.transfer[0],
            Channel.TRANSFER11: self.transfer[1],
        }

    def advance(self, omega_c: float, omega_t: float, phi_c: float, phi_t: float) -> StepDecay:
        """
        Эволюция всех каналов на один шаг dt с постоянными управлениями

        Returns:
            StepDecay с γ_e T_e и γ_r T_r за шаг
        """
        context = f"шаг {self.step_index}"
        h_stay = build_single_atom_hamiltonian(
            self.params, AtomRole.TARGET, omega_t, phi_t, self.target_doppler
        )
        h_transfer = build_two_atom_hamiltonian(
            self.params, omega_c, omega_t, phi_c, phi_t, self.v, self.doppler
        )

        stay_result = propagate_many(
            self.stay, h_stay, self.stay_dissipator, self.params.dt, self.substeps,
            context=f"{context}, каналы Stay",
        )
        transfer_result = propagate_many(
            self.transfer, h_transfer, self.transfer_dissipator, self.params.dt, self.substeps,
            context=f"{context}, каналы Transfer",
        )
        self.stay = stay_result.rhos
        self.transfer = transfer_result.rhos
        self.step_index += 1

        # Что: суммы по каналам, затем среднее по четырём каналам
        stay_e, stay_r = excited_populations(stay_result.populations, two_atom=False)
        tr_e, tr_r = excited_populations(transfer_result.populations, two_atom=True)
        n_e = (stay_e.sum(axis=0) + tr_e.sum(axis=0)) / 4.0
        n_r = (stay_r.sum(axis=0) + tr_r.sum(axis=0)) / 4.0

        h = stay_result.substep
        return StepDecay(
            gamma_e_te=float(self.params.gamma_e * trapezoid(n_e, dx=h)),
            gamma_r_tr=float(self.params.gamma_r * trapezoid(n_r, dx=h)),
            pop_e_bar=float(n_e[-1]),
            pop_r_bar=float(n_r[-1]),
        )

    def fidelities(self) -> np.ndarray:
        """Точности четырёх каналов в порядке CHANNEL_ORDER"""
        rhos = self.density_matrices()
        return np.array([state_fidelity(rhos[ch], IDEAL_OUTPUTS[ch]) for ch in CHANNEL_ORDER])

    def observation_populations(self) -> np.ndarray:
        """Диагонали ρ^(00) (4) и ρ^(10) (16)"""
        return np.concatenate([
            np.real(np.diag(self.stay[0])),
            np.real(np.diag(self.transfer[0])),
        ])


def compute_f_avg(channels) -> float:
    """
    Средняя точность по четырём каналам таблицы истинности CNOT

    Args:
        channels: GateChannels или словарь {Channel: ρ}
    """
    if isinstance(channels, GateChannels):
        return float(np.mean(channels.fidelities()))
    return float(np.mean([state_fidelity(channels[ch], IDEAL_OUTPUTS[ch]) for ch in CHANNEL_ORDER]))
