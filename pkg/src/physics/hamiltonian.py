"""
Гамильтонианы одного и двух четырёхуровневых атомов, тёмные состояния EIT
"""
import logging
from enum import Enum
from typing import Tuple, Union

import numpy as np

from .params import PhysicalParams

logger = logging.getLogger(__name__)

# Порядок базиса одного атома: |0>, |1>, |e>, |r>
G0, G1, E, R = 0, 1, 2, 3
SINGLE_DIM = 4
TWO_ATOM_DIM = SINGLE_DIM * SINGLE_DIM
# Индекс |rr> в двухатомном базисе: 4*(индекс control) + (индекс target)
RR_INDEX = SINGLE_DIM * R + R

# Доплеровский сдвиг: одно число для обоих атомов или пара (control, target)
Doppler = Union[float, Tuple[float, float]]


class AtomRole(str, Enum):
    CONTROL = "control"
    TARGET = "target"


def two_atom_index(control: int, target: int) -> int:
    """Индекс состояния |control>|target> в 16-мерном базисе"""
    return SINGLE_DIM * control + target


def _split_doppler(doppler: Doppler) -> Tuple[float, float]:
    if isinstance(doppler, tuple):
        return float(doppler[0]), float(doppler[1])
    return float(doppler), float(doppler)


def build_single_atom_hamiltonian(
    params: PhysicalParams,
    role: Union[AtomRole, str],
    omega: float,
    phi: float,
    doppler: float = 0.0,
) -> np.ndarray:
    """
    Гамильтониан одного атома в базисе (|0>, |1>, |e>, |r>)

    Args:
        params: физические параметры
        role: control (связь только |1>-|e>) или target (связи |0>-|e> и |1>-|e>)
        omega: амплитуда локального лазера, рад/мкс
        phi: фаза локального лазера, рад
        doppler: сдвиг уровня |r>, рад/мкс

    Returns:
        Эрмитова матрица 4x4
    """
    if omega < 0:
        raise ValueError(f"Амплитуда omega не может быть отрицательной, получено {omega}")
    role = AtomRole(role)

    h = np.zeros((SINGLE_DIM, SINGLE_DIM), dtype=complex)
    coupling = 0.5 * omega * np.exp(1j * phi)

    if role is AtomRole.CONTROL:
        h[G1, E] = coupling
    else:
        h[G0, E] = coupling
        h[G1, E] = coupling

    # Глобальный лазер |e>-|r>
    h[E, R] = 0.5 * params.omega_gl

    # Что: достраиваем эрмитово сопряжённую часть
    h = h + h.conj().T

    h[E, E] = -params.delta
    h[R, R] = doppler
    return h


def build_two_atom_hamiltonian(
    params: PhysicalParams,
    omega_c: float,
    omega_t: float,
    phi_c: float,
    phi_t: float,
    v: float,
    doppler: Doppler = 0.0,
) -> np.ndarray:
    """
    Полный гамильтониан H = H_c ⊗ I + I ⊗ H_t + V|rr><rr| (16x16)

    Args:
        v: ван-дер-ваальсово взаимодействие, рад/мкс
        doppler: общий сдвиг или пара (control, target)
    """
    if v < 0:
        raise ValueError(f"Взаимодействие v не может быть отрицательным, получено {v}")
    doppler_c, doppler_t = _split_doppler(doppler)

    h_c = build_single_atom_hamiltonian(params, AtomRole.CONTROL, omega_c, phi_c, doppler_c)
    h_t = build_single_atom_hamiltonian(params, AtomRole.TARGET, omega_t, phi_t, doppler_t)
    identity = np.eye(SINGLE_DIM)

    h = np.kron(h_c, identity) + np.kron(identity, h_t)
    h[RR_INDEX, RR_INDEX] += v
    return h


def blockaded_target_hamiltonian(
    params: PhysicalParams,
    omega_t: float,
    phi_t: float,
    v: float,
    doppler: float = 0.0,
) -> np.ndarray:
    """
    Гамильтониан атома-мишени при контрольном атоме в |r>: H'_t = H_t + V|r><r|
    """
    h = build_single_atom_hamiltonian(params, AtomRole.TARGET, omega_t, phi_t, doppler)
    h[R, R] += v
    return h


def dark_states(omega_t: float, omega_gl: float, phi_t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Тёмные состояния атома-мишени в режиме EIT

    |d1> = (|1> - |0>)/√2
    |d2> = [(|1> + |0>)/√2 - x e^{-iφ}|r>] / √(1 + x²),  x = √2 Ω_t / Ω_gl

    Returns:
        Пара нормированных 4-компонентных векторов (d1, d2)
    """
    if not omega_gl > 0:
        raise ValueError(f"omega_gl должна быть положительной, получено {omega_gl}")

    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    d1 = np.zeros(SINGLE_DIM, dtype=complex)
    d1[G0] = -inv_sqrt2
    d1[G1] = inv_sqrt2

    x = np.sqrt(2.0) * omega_t / omega_gl
    norm = 1.0 / np.sqrt(1.0 + x * x)
    d2 = np.zeros(SINGLE_DIM, dtype=complex)
    d2[G0] = norm * inv_sqrt2
    d2[G1] = norm * inv_sqrt2
    d2[R] = -norm * x * np.exp(-1j * phi_t)
    return d1, d2


def adiabaticity_margin(schedule, params: PhysicalParams) -> np.ndarray:
    """
    Запас адиабатичности по шагам: |ΔΩ_t / dt| / (Ω_gl³ / (4Δ))

    Для нулевого шага предыдущего значения нет, отношение равно 0.
    Значения ≪ 1 соответствуют адиабатическому режиму.
    """
    scale = params.omega_gl ** 3 / (4.0 * params.delta)
    omega_t = np.asarray(schedule.omega_t, dtype=float)
    rate = np.abs(np.diff(omega_t, prepend=omega_t[:1])) / schedule.dt
    return rate / scale
