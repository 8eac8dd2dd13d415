"""
Кусочные протоколы EIT: квадратные π-импульсы контрольного атома, ошибка ε_control,
скорректированная средняя точность и проверка следования тёмному состоянию
"""
import csv
import dataclasses
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar
from tqdm import tqdm

from ..config import PROPAGATOR_SUBSTEPS
from ..environment.metrics import GateMetrics, format_fidelity
from ..physics.dissipator import build_dissipator
from ..physics.hamiltonian import (
    G1,
    R,
    SINGLE_DIM,
    AtomRole,
    build_single_atom_hamiltonian,
    dark_states,
)
from ..physics.params import PhysicalParams
from ..physics.propagator import liouvillian, propagate_step
from ..physics.schedule import PulseSchedule, format_float
from ..utils.units import mhz_to_rad_per_us

logger = logging.getLogger(__name__)

# Амплитуда квадратных импульсов контрольного атома, МГц (/2π)
SQUARE_OMEGA_C_MHZ = 250.0
# Минимальный перенос |1> -> |r>, при котором π-импульс считается найденным
MIN_PI_TRANSFER = 0.99
SCAN_POINTS = 400

PIECEWISE_REPORT_HEADER = [
    "protocol", "epochs", "xi_omega", "xi_phi", "tau_min_us", "t_sq_us", "f_t", "eps_control", "f_avg",
]


class PiecewiseMode(str, Enum):
    ADIABATIC_I = "adiabatic-1"
    ADIABATIC_II = "adiabatic-2"
    NON_ADIABATIC = "nonadiabatic"


class PiPulseCalibrationError(RuntimeError):
    """Сканирование не нашло π-импульс с достаточным переносом населённости"""


@dataclass(frozen=True)
class PiecewiseConfig:
    """
    Параметры кусочного протокола

    omega_t_max: предел амплитуды рамановского импульса мишени, рад/мкс
    omega_c: амплитуда квадратных π-импульсов контрольного атома, рад/мкс
    t_total, n_steps: горизонт и число шагов оптимизации импульса мишени
    t_sq: суммарная длительность двух π-импульсов (None: определяется сканированием)
    """
    mode: PiecewiseMode
    xi_omega: float
    xi_phi: float
    omega_t_max: float
    omega_c: float
    t_total: float
    n_steps: int = 100
    t_sq: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0 < self.xi_omega <= 1 or not 0 < self.xi_phi <= 1:
            raise ValueError(f"Коэффициенты сглаживания вне (0, 1]: {self.xi_omega}, {self.xi_phi}")
        if self.omega_t_max <= 0 or self.omega_c <= 0 or self.t_total <= 0:
            raise ValueError("Амплитуды и горизонт кусочного протокола должны быть положительными")
        if self.t_sq is not None and self.t_sq <= 0:
            raise ValueError(f"t_sq должно быть положительным, получено {self.t_sq}")

    @classmethod
    def for_mode(cls, mode: PiecewiseMode, params: PhysicalParams) -> "PiecewiseConfig":
        """Стандартные настройки трёх протоколов"""
        mode = PiecewiseMode(mode)
        omega_c = mhz_to_rad_per_us(SQUARE_OMEGA_C_MHZ)
        if mode is PiecewiseMode.ADIABATIC_I:
            return cls(mode, 0.025, 0.025, params.omega_gl / 2.5, omega_c, t_total=3.0)
        if mode is PiecewiseMode.ADIABATIC_II:
            return cls(mode, 0.05, 0.05, params.omega_gl / 2.5, omega_c, t_total=2.0)
        return cls(mode, 0.1, 0.1, params.omega_gl, omega_c, t_total=0.4)

    @property
    def adiabatic(self) -> bool:
        # В адиабатических режимах фаза мишени постоянна
        return self.mode is not PiecewiseMode.NON_ADIABATIC

    def with_overrides(self, **overrides) -> "PiecewiseConfig":
        return dataclasses.replace(self, **overrides)

    def target_params(self, params: PhysicalParams) -> PhysicalParams:
        """Параметры среды мишени: предел Ω_t, ξ и сетка протокола"""
        return params.with_overrides(
            omega_t_max=self.omega_t_max,
            xi_omega=self.xi_omega,
            xi_phi=self.xi_phi,
            t_total=self.t_total,
            n_steps=self.n_steps,
        )


@dataclass(frozen=True)
class SquarePiPulse:
    t_pi: float
    t_sq: float
    peak_transfer: float
    omega_c: float


def control_liouvillian(params: PhysicalParams, omega_c: float) -> np.ndarray:
    """Лиувиллиан одиночного контрольного атома при постоянной амплитуде Ω_c"""
    h = build_single_atom_hamiltonian(params, AtomRole.CONTROL, omega_c, 0.0)
    return liouvillian(h, build_dissipator(params, SINGLE_DIM))


def _ground_vector() -> np.ndarray:
    rho = np.zeros((SINGLE_DIM, SINGLE_DIM), dtype=complex)
    rho[G1, G1] = 1.0
    return rho.reshape(-1)


def _population(vector: np.ndarray, level: int) -> float:
    return float(vector[level * (SINGLE_DIM + 1)].real)


def analytic_pi_time(params: PhysicalParams, omega_c: float) -> float:
    """Время двухфотонного π-импульса 2πΔ / (Ω_c Ω_gl)"""
    return 2.0 * math.pi * params.delta / (omega_c * params.omega_gl)


def square_pi_schedule(
    params: PhysicalParams,
    omega_c: Optional[float] = None,
    scan_points: int = SCAN_POINTS,
    show_progress: bool = False,
) -> SquarePiPulse:
    """
    Длительность квадратного π-импульса |1>_c -> |r>_c по сканированию

    Сетка [0, 2·t_аналит] просматривается с шагом по времени, максимум уточняется
    minimize_scalar в соседних узлах.

    Args:
        params: физические параметры (с распадом)
        omega_c: амплитуда импульса (по умолчанию 2π·250 МГц)
        scan_points: число узлов сетки

    Returns:
        SquarePiPulse с t_pi, t_sq = 2·t_pi и достигнутым переносом

    Raises:
        PiPulseCalibrationError: перенос в максимуме ниже 0.99
    """
    omega_c = mhz_to_rad_per_us(SQUARE_OMEGA_C_MHZ) if omega_c is None else omega_c
    if omega_c <= 0:
        raise ValueError(f"Амплитуда Ω_c должна быть положительной, получено {omega_c}")
    lv = control_liouvillian(params, omega_c)
    t_guess = analytic_pi_time(params, omega_c)
    dt = 2.0 * t_guess / scan_points
    step = expm(lv * dt)

    vector = _ground_vector()
    transfer = np.empty(scan_points + 1)
    transfer[0] = _population(vector, R)
    for k in tqdm(range(1, scan_points + 1), desc="Сканирование π-импульса", disable=not show_progress):
        vector = step @ vector
        transfer[k] = _population(vector, R)

    k_best = int(np.argmax(transfer))
    v0 = _ground_vector()
    result = minimize_scalar(
        lambda t: -_population(expm(lv * t) @ v0, R),
        bounds=(max(k_best - 1, 0) * dt, (k_best + 1) * dt),
        method='bounded',
        options={'xatol': 1e-9},
    )
    t_pi = float(result.x)
    peak = -float(result.fun)
    if peak < MIN_PI_TRANSFER:
        raise PiPulseCalibrationError(
            f"Максимальный перенос в |r> {peak:.4f} ниже {MIN_PI_TRANSFER} (t={t_pi:.4f} мкс)"
        )
    logger.debug(
        f"π-импульс: t_pi={t_pi:.5f} мкс (аналитически {t_guess:.5f}), перенос {peak:.6f}"
    )
    return SquarePiPulse(t_pi=t_pi, t_sq=2.0 * t_pi, peak_transfer=peak, omega_c=omega_c)


def epsilon_control(
    params: PhysicalParams,
    idle_time: float,
    pulse: Optional[SquarePiPulse] = None,
) -> float:
    """
    Ошибка контрольного атома за цикл |1> -> |r> -> (ожидание) -> |1>

    Во время ожидания глобальный лазер Ω_gl остаётся включённым, распад |e> и |r> учитывается.

    Args:
        params: физические параметры
        idle_time: время ожидания в |r>, мкс
        pulse: калиброванный π-импульс (по умолчанию находится сканированием)

    Returns:
        1 - ρ_11 в конце цикла
    """
    if idle_time < 0:
        raise ValueError(f"Время ожидания не может быть отрицательным, получено {idle_time}")
    pulse = pulse or square_pi_schedule(params)
    drive = expm(control_liouvillian(params, pulse.omega_c) * pulse.t_pi)
    idle = expm(control_liouvillian(params, 0.0) * idle_time)
    vector = drive @ (idle @ (drive @ _ground_vector()))
    return float(1.0 - _population(vector, G1))


def piecewise_f_avg(f00: float, f10: float, eps_control: float) -> float:
    """
    Средняя точность кусочного протокола: (2·F00 + 2·(F10 - ε_control)) / 4
    """
    for name, value in (('f00', f00), ('f10', f10), ('eps_control', eps_control)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} вне [0, 1]: {value}")
    return (2.0 * f00 + 2.0 * (f10 - eps_control)) / 4.0


def dark_state_populations(params: PhysicalParams, omega_t: float, phi_t: float) -> np.ndarray:
    """
    Населённости (|0>, |1>, |e>, |r>) при адиабатическом следовании из |0>_t

    |0> = (|d2(0)> - |d1>)/√2, поэтому состояние равно (|d2(Ω_t)> - |d1>)/√2.
    """
    d1, d2 = dark_states(omega_t, params.omega_gl, phi_t)
    return np.abs((d2 - d1) / np.sqrt(2.0)) ** 2


def dark_state_overlap(
    schedule: PulseSchedule,
    params: PhysicalParams,
    substeps: int = PROPAGATOR_SUBSTEPS,
) -> np.ndarray:
    """
    Отклонение населённостей незаблокированного канала от предсказания тёмного состояния

    Returns:
        Максимальное по уровням отклонение на сетке t_0..t_n
    """
    dissipator = build_dissipator(params, SINGLE_DIM)
    rho = np.zeros((SINGLE_DIM, SINGLE_DIM), dtype=complex)
    rho[0, 0] = 1.0
    deviations = [0.0]
    for i in range(schedule.n_steps):
        _, omega_t, _, phi_t = schedule.controls(i)
        h = build_single_atom_hamiltonian(params, AtomRole.TARGET, omega_t, phi_t)
        rho = propagate_step(rho, h, dissipator, schedule.dt, substeps, context=f"шаг {i}")
        predicted = dark_state_populations(params, omega_t, phi_t)
        deviations.append(float(np.max(np.abs(np.real(np.diag(rho)) - predicted))))
    return np.array(deviations)


@dataclass
class PiecewiseReport:
    """
    Строка сравнительной таблицы кусочных протоколов
    """
    protocol: str
    epochs: int
    xi_omega: float
    xi_phi: Optional[float]
    tau_min_us: float
    t_sq_us: float
    f00: float
    f10: float
    eps_control: float

    @property
    def f_t(self) -> float:
        return 0.5 * (self.f00 + self.f10)

    @property
    def f_avg(self) -> float:
        return piecewise_f_avg(self.f00, self.f10, self.eps_control)

    @property
    def total_gate_time(self) -> float:
        return self.tau_min_us + self.t_sq_us

    def as_csv_row(self) -> List[str]:
        return [
            self.protocol,
            str(self.epochs),
            format_float(self.xi_omega),
            "" if self.xi_phi is None else format_float(self.xi_phi),
            format_float(self.tau_min_us),
            format_float(self.t_sq_us),
            format_fidelity(self.f_t),
            format_float(self.eps_control),
            format_fidelity(self.f_avg),
        ]


def build_piecewise_report(
    cfg: PiecewiseConfig,
    metrics: GateMetrics,
    params: PhysicalParams,
    epochs: int,
    pulse: Optional[SquarePiPulse] = None,
) -> PiecewiseReport:
    """
    Строка отчёта по метрикам обученного импульса мишени

    Время ожидания контрольного атома равно τ_min импульса мишени.
    """
    if len(metrics.f_per_channel) != 2:
        raise ValueError(
            f"Ожидаются точности двух каналов мишени, получено {len(metrics.f_per_channel)}"
        )
    if pulse is None:
        pulse = square_pi_schedule(params, cfg.omega_c)
    t_sq = cfg.t_sq if cfg.t_sq is not None else pulse.t_sq
    eps = epsilon_control(params, metrics.tau_min, pulse)
    f00, f10 = metrics.f_per_channel
    report = PiecewiseReport(
        protocol=cfg.mode.value,
        epochs=epochs,
        xi_omega=cfg.xi_omega,
        xi_phi=None if cfg.adiabatic else cfg.xi_phi,
        tau_min_us=metrics.tau_min,
        t_sq_us=t_sq,
        f00=f00,
        f10=f10,
        eps_control=eps,
    )
    logger.info(
        f"Протокол {report.protocol}: τ_min={report.tau_min_us:.3f} мкс, t_sq={t_sq:.3f} мкс, "
        f"F_t={report.f_t:.5f}, ε_control={eps:.3e}, F_avg={report.f_avg:.5f}"
    )
    return report


def piecewise_report_csv(rows: Sequence[PiecewiseReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PIECEWISE_REPORT_HEADER)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buffer.getvalue()
