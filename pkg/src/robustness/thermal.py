"""
Тепловое движение атомов: доплеровский сдвиг уровня |r> и флуктуации ван-дер-ваальсова взаимодействия
"""
import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.constants import Boltzmann
from tqdm import tqdm

from ..config import (
    MONTE_CARLO_SHOTS,
    PROPAGATOR_SUBSTEPS,
    REPORT_TEMPERATURE_UK,
    THERMAL_TEMPERATURES_UK,
)
from ..baselines.piecewise import (
    PiecewiseConfig,
    SquarePiPulse,
    epsilon_control,
    piecewise_f_avg,
    square_pi_schedule,
)
from ..baselines.target_env import evaluate_target_schedule
from ..environment.evaluation import evaluate_schedule
from ..physics.hamiltonian import Doppler
from ..physics.params import RB87_MASS_KG, PhysicalParams
from ..physics.schedule import PulseSchedule, format_float
from ..utils.units import um_to_m

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["T_uK", "effect", "delta_D_rad_per_us", "V_prime_rad_per_us", "f_avg", "delta_f"]
# Переход рад/с -> рад/мкс
PER_SECOND_TO_PER_US = 1e-6

# Точность импульса при заданных (доплеровский сдвиг, взаимодействие)
Evaluator = Callable[[Doppler, float], float]


class ThermalEffect(str, Enum):
    DOPPLER = "doppler"
    INTERACTION = "interaction"
    BOTH = "both"


@dataclass(frozen=True)
class ThermalConfig:
    """
    Параметры теплового анализа

    trap_omega: частота ловушки, рад/мкс
    k1, k2: волновые векторы лучей 420 и 1013 нм, рад/м
    counter_propagating: встречные лучи (k2 берётся с обратным знаком)
    """
    temperatures_uk: Tuple[float, ...] = tuple(THERMAL_TEMPERATURES_UK)
    trap_omega: float = 2.0 * math.pi * 0.1
    k1: float = PhysicalParams.k1
    k2: float = PhysicalParams.k2
    mass: float = RB87_MASS_KG
    counter_propagating: bool = False

    def __post_init__(self) -> None:
        if any(t < 0 for t in self.temperatures_uk):
            raise ValueError(f"Температуры не могут быть отрицательными: {self.temperatures_uk}")
        if not 0 < self.k2 < self.k1:
            raise ValueError(f"Ожидается 0 < k2 < k1, получено k1={self.k1}, k2={self.k2} рад/м")
        if self.trap_omega <= 0 or self.mass <= 0:
            raise ValueError("Частота ловушки и масса атома должны быть положительными")

    @classmethod
    def from_params(
        cls,
        params: PhysicalParams,
        temperatures_uk: Optional[Sequence[float]] = None,
        counter_propagating: bool = False,
    ) -> "ThermalConfig":
        temps = THERMAL_TEMPERATURES_UK if temperatures_uk is None else temperatures_uk
        return cls(
            temperatures_uk=tuple(float(t) for t in temps),
            trap_omega=params.trap_omega,
            k1=params.k1,
            k2=params.k2,
            mass=params.mass,
            counter_propagating=counter_propagating,
        )

    @property
    def delta_k(self) -> float:
        """k1 - k2 (или k1 + k2 для встречных лучей), рад/м"""
        return self.k1 + self.k2 if self.counter_propagating else self.k1 - self.k2


def rms_velocity(temperature_uk: float, mass: float = RB87_MASS_KG) -> float:
    """√(k_B T / m), м/с"""
    if temperature_uk < 0:
        raise ValueError(f"Температура не может быть отрицательной: {temperature_uk}")
    return math.sqrt(Boltzmann * temperature_uk * 1e-6 / mass)


def doppler_shift(temperature_uk: float, cfg: ThermalConfig) -> float:
    """
    Доплеровский сдвиг δ_D = Δk · v_rms, рад/мкс
    """
    return cfg.delta_k * rms_velocity(temperature_uk, cfg.mass) * PER_SECOND_TO_PER_US


def position_spread(temperature_uk: float, cfg: ThermalConfig) -> float:
    """σ_x = √(k_B T / (m ω²)), м"""
    omega = cfg.trap_omega / PER_SECOND_TO_PER_US
    return rms_velocity(temperature_uk, cfg.mass) / omega


def fluctuated_interaction(temperature_uk: float, cfg: ThermalConfig, v0: float, r0_um: float) -> float:
    """
    Взаимодействие с учётом разброса расстояния: V' = (r0 / r_rms)^6 · V0

    r_rms = √(r0² + σ_r²), σ_r = √2·σ_x
    """
    r0 = um_to_m(r0_um)
    sigma_r2 = 2.0 * position_spread(temperature_uk, cfg) ** 2
    return v0 * (r0 * r0 / (r0 * r0 + sigma_r2)) ** 3


@dataclass
class SweepRow:
    temperature_uk: float
    effect: ThermalEffect
    delta_d: float
    v_prime: float
    f_avg: float
    delta_f: float

    def as_csv_row(self) -> List[str]:
        return [
            format_float(self.temperature_uk),
            self.effect.value,
            format_float(self.delta_d),
            format_float(self.v_prime),
            format_float(self.f_avg),
            format_float(self.delta_f),
        ]


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buffer.getvalue()


def gate_evaluator(
    schedule: PulseSchedule,
    params: PhysicalParams,
    stop_at: Optional[float] = None,
    substeps: int = PROPAGATOR_SUBSTEPS,
) -> Evaluator:
    """
    F_avg синхронного импульса в момент отсечки (или stop_at) при заданных тепловых поправках
    """

    def evaluate(doppler: Doppler, v: float) -> float:
        metrics = evaluate_schedule(
            schedule, params, stop_at=stop_at, v_override=v, doppler=doppler,
            substeps=substeps, full_horizon=False,
        )
        return metrics.f_avg

    return evaluate


def target_evaluator(
    schedule: PulseSchedule,
    cfg: PiecewiseConfig,
    params: PhysicalParams,
    pulse: Optional[SquarePiPulse] = None,
) -> Evaluator:
    """
    F_avg кусочного протокола с тепловыми поправками на стадии мишени

    ε_control контрольного атома считается один раз при T = 0.
    """
    reference = evaluate_target_schedule(schedule, cfg, params)
    if pulse is None:
        pulse = square_pi_schedule(params, cfg.omega_c)
    eps = epsilon_control(params, reference.tau_min, pulse)

    def evaluate(doppler: Doppler, v: float) -> float:
        metrics = evaluate_target_schedule(schedule, cfg, params, v=v, doppler=doppler)
        f00, f10 = metrics.f_per_channel
        return piecewise_f_avg(f00, f10, eps)

    return evaluate


def effect_modifiers(
    effect: ThermalEffect, temperature_uk: float, cfg: ThermalConfig, params: PhysicalParams
) -> Tuple[float, float]:
    """(δ_D, V') для эффекта в отдельности или обоих вместе"""
    effect = ThermalEffect(effect)
    delta_d = 0.0
    v_prime = params.v0
    if effect in (ThermalEffect.DOPPLER, ThermalEffect.BOTH):
        delta_d = doppler_shift(temperature_uk, cfg)
    if effect in (ThermalEffect.INTERACTION, ThermalEffect.BOTH):
        v_prime = fluctuated_interaction(temperature_uk, cfg, params.v0, params.r0)
    return delta_d, v_prime


def thermal_sweep(
    schedule: Optional[PulseSchedule],
    params: PhysicalParams,
    cfg: ThermalConfig,
    effects: Sequence[ThermalEffect] = tuple(ThermalEffect),
    evaluator: Optional[Evaluator] = None,
    workers: int = 1,
    show_progress: bool = False,
) -> List[SweepRow]:
    """
    Таблица δF = F_avg(T=0) - F_avg(T) по температурам и эффектам

    Args:
        schedule: синхронный импульс (не нужен, если передан evaluator)
        params: физические параметры
        cfg: температуры и параметры ловушки
        effects: доплеровский сдвиг, флуктуации взаимодействия и/или оба сразу
        evaluator: функция (δ_D, V') -> F_avg; по умолчанию gate_evaluator(schedule, params)
        workers: число потоков для независимых точек

    Returns:
        Строки в порядке (температура, эффект)
    """
    if not cfg.temperatures_uk:
        raise ValueError("Список температур пуст")
    if evaluator is None:
        if schedule is None:
            raise ValueError("Нужен импульс или функция оценки")
        evaluator = gate_evaluator(schedule, params)
    effects = [ThermalEffect(e) for e in effects]

    baseline = evaluator(0.0, params.v0)
    logger.info(f"Тепловой анализ: F_avg(T=0)={baseline:.6f}, точек {len(cfg.temperatures_uk) * len(effects)}")

    points = [(t, e) for t in cfg.temperatures_uk for e in effects]

    def run_point(point: Tuple[float, ThermalEffect]) -> SweepRow:
        temperature, effect = point
        delta_d, v_prime = effect_modifiers(effect, temperature, cfg, params)
        # Что: при T = 0 поправок нет, точность совпадает с базовой
        f_avg = baseline if temperature == 0 else evaluator(delta_d, v_prime)
        return SweepRow(temperature, effect, delta_d, v_prime, f_avg, baseline - f_avg)

    if workers <= 1:
        rows = [run_point(p) for p in tqdm(points, desc="Тепловой анализ", disable=not show_progress)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(tqdm(pool.map(run_point, points), total=len(points), desc="Тепловой анализ",
                             disable=not show_progress))

    for row in rows:
        logger.debug(
            f"T={row.temperature_uk} мкК, {row.effect.value}: δ_D={row.delta_d:.4g} рад/мкс, "
            f"V'={row.v_prime:.6g} рад/мкс, δF={row.delta_f:.3e}"
        )
    return rows


def composition_residual(rows: Sequence[SweepRow], temperature_uk: float) -> float:
    """
    |δF(both) - δF(doppler) - δF(interaction)| при заданной температуре
    """
    by_effect = {r.effect: r.delta_f for r in rows if r.temperature_uk == temperature_uk}
    missing = set(ThermalEffect) - set(by_effect)
    if missing:
        raise ValueError(f"Нет строк для эффектов {sorted(m.value for m in missing)} при T={temperature_uk}")
    return abs(
        by_effect[ThermalEffect.BOTH]
        - by_effect[ThermalEffect.DOPPLER]
        - by_effect[ThermalEffect.INTERACTION]
    )


@dataclass
class MonteCarloResult:
    temperature_uk: float
    shots: int
    mean_delta_f: float
    standard_error: float


def monte_carlo_doppler(
    evaluator: Evaluator,
    params: PhysicalParams,
    cfg: ThermalConfig,
    temperature_uk: float,
    shots: int = MONTE_CARLO_SHOTS,
    seed: int = 0,
    show_progress: bool = False,
) -> MonteCarloResult:
    """
    Доплеровская ошибка при независимых гауссовых скоростях атомов

    Скорость каждого атома вдоль лазеров ~ N(0, σ_v²), σ_v = √(k_B T / m);
    сдвиги уровней |r> контрольного атома и мишени различны.

    Returns:
        Среднее δF по выборкам и его стандартная ошибка
    """
    if shots < MONTE_CARLO_SHOTS:
        raise ValueError(f"Нужно не менее {MONTE_CARLO_SHOTS} выборок, получено {shots}")
    rng = np.random.default_rng(seed)
    sigma = doppler_shift(temperature_uk, cfg)
    baseline = evaluator(0.0, params.v0)

    deltas = np.empty(shots)
    shifts = rng.standard_normal((shots, 2)) * sigma
    for i in tqdm(range(shots), desc=f"Монте-Карло T={temperature_uk} мкК", disable=not show_progress):
        deltas[i] = baseline - evaluator((float(shifts[i, 0]), float(shifts[i, 1])), params.v0)

    result = MonteCarloResult(
        temperature_uk=temperature_uk,
        shots=shots,
        mean_delta_f=float(deltas.mean()),
        standard_error=float(deltas.std(ddof=1) / math.sqrt(shots)),
    )
    logger.info(
        f"Монте-Карло T={temperature_uk} мкК: δF={result.mean_delta_f:.3e} ± {result.standard_error:.1e}"
    )
    return result


def f_avg_at_temperature(
    evaluator: Evaluator,
    params: PhysicalParams,
    cfg: ThermalConfig,
    temperature_uk: float = REPORT_TEMPERATURE_UK,
) -> Tuple[float, float]:
    """
    (F_avg при температуре с обоими эффектами, δF) для сводной таблицы
    """
    baseline = evaluator(0.0, params.v0)
    delta_d, v_prime = effect_modifiers(ThermalEffect.BOTH, temperature_uk, cfg, params)
    f_avg = evaluator(delta_d, v_prime)
    return f_avg, baseline - f_avg
