"""
Физические параметры модели двух ридберговских атомов
"""
import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy.constants import atomic_mass

from ..config import (
    DELTA_MHZ,
    ETA_E,
    ETA_R,
    GAMMA_E_MHZ,
    GAMMA_R_KHZ,
    LAMBDA1_NM,
    LAMBDA2_NM,
    N_STEPS,
    OMEGA_C_MAX_MHZ,
    OMEGA_GL_MHZ,
    OMEGA_T_MAX_MHZ,
    R0_UM,
    T_TOTAL_US,
    TRAP_FREQ_KHZ,
    V0_MHZ,
    XI_OMEGA,
    XI_PHI,
)
from ..utils.units import khz_to_rad_per_us, mhz_to_rad_per_us, nm_to_m

# Масса атома 87Rb в кг
RB87_MASS_KG = 86.909180527 * atomic_mass


@dataclass(frozen=True)
class PhysicalParams:
    """
    Все константы модели. Частоты и скорости распада в рад/мкс, время в мкс.
    """
    omega_gl: float = mhz_to_rad_per_us(OMEGA_GL_MHZ)
    delta: float = mhz_to_rad_per_us(DELTA_MHZ)
    v0: float = mhz_to_rad_per_us(V0_MHZ)
    gamma_e: float = mhz_to_rad_per_us(GAMMA_E_MHZ)
    gamma_r: float = khz_to_rad_per_us(GAMMA_R_KHZ)
    omega_c_max: float = mhz_to_rad_per_us(OMEGA_C_MAX_MHZ)
    omega_t_max: float = mhz_to_rad_per_us(OMEGA_T_MAX_MHZ)
    eta_e: float = ETA_E
    eta_r: float = ETA_R
    t_total: float = T_TOTAL_US
    n_steps: int = N_STEPS
    xi_omega: float = XI_OMEGA
    xi_phi: float = XI_PHI
    r0: float = R0_UM  # мкм
    trap_omega: float = khz_to_rad_per_us(TRAP_FREQ_KHZ)
    mass: float = RB87_MASS_KG
    k1: float = 2.0 * math.pi / nm_to_m(LAMBDA1_NM)  # рад/м
    k2: float = 2.0 * math.pi / nm_to_m(LAMBDA2_NM)

    def __post_init__(self) -> None:
        # Что: проверяем инварианты сразу при создании
        positive = {
            'omega_gl': self.omega_gl,
            'delta': self.delta,
            'v0': self.v0,
            'omega_c_max': self.omega_c_max,
            'omega_t_max': self.omega_t_max,
            't_total': self.t_total,
            'r0': self.r0,
            'trap_omega': self.trap_omega,
            'mass': self.mass,
            'k1': self.k1,
            'k2': self.k2,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"Параметр {name} должен быть строго положительным, получено {value}")
        # Что: нулевые скорости распада допустимы (модель без потерь)
        for name in ('gamma_e', 'gamma_r', 'eta_e', 'eta_r'):
            if getattr(self, name) < 0:
                raise ValueError(f"Параметр {name} не может быть отрицательным, получено {getattr(self, name)}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps должен быть >= 1, получено {self.n_steps}")
        for name in ('xi_omega', 'xi_phi'):
            xi = getattr(self, name)
            if not 0 < xi <= 1:
                raise ValueError(f"Коэффициент сглаживания {name} должен лежать в (0, 1], получено {xi}")

    @property
    def dt(self) -> float:
        """Длительность одного управляющего шага, мкс"""
        return self.t_total / self.n_steps

    @property
    def times(self) -> np.ndarray:
        """Сетка t_0..t_N"""
        return np.linspace(0.0, self.t_total, self.n_steps + 1)

    @property
    def amplitude_caps(self) -> np.ndarray:
        return np.array([self.omega_c_max, self.omega_t_max])

    def with_overrides(self, **overrides: Any) -> "PhysicalParams":
        """
        Копия параметров с заменой отдельных полей (с повторной валидацией)
        """
        return dataclasses.replace(self, **overrides)

    def decay_free(self) -> "PhysicalParams":
        """
        Копия без спонтанного распада
        """
        return self.with_overrides(gamma_e=0.0, gamma_r=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def default_params() -> PhysicalParams:
    """Набор параметров по умолчанию (значения из .env или стандартные)"""
    return PhysicalParams()
