"""
Детерминированное воспроизведение импульса без политики
"""
import logging
from typing import Optional

from ..config import CUTOFF_THRESHOLD, PROPAGATOR_SUBSTEPS
from ..physics.hamiltonian import Doppler
from ..physics.params import PhysicalParams
from ..physics.schedule import PulseSchedule
from .gate_env import CnotGateEnv
from .metrics import GateMetrics, detect_cutoff_index

logger = logging.getLogger(__name__)


def stop_index(stop_at: float, params: PhysicalParams, tol: float = 1e-9) -> int:
    """Номер шага сетки, соответствующий моменту stop_at"""
    if stop_at < 0 or stop_at > params.t_total * (1 + tol):
        raise ValueError(f"stop_at={stop_at} вне [0, {params.t_total}]")
    k = int(round(stop_at / params.dt))
    if abs(k * params.dt - stop_at) > tol * max(1.0, params.t_total):
        raise ValueError(f"stop_at={stop_at} не лежит на сетке с шагом {params.dt}")
    return k


def evaluate_schedule(
    schedule: PulseSchedule,
    params: PhysicalParams,
    stop_at: Optional[float] = None,
    v_override: Optional[float] = None,
    doppler: Doppler = 0.0,
    substeps: int = PROPAGATOR_SUBSTEPS,
    threshold: float = CUTOFF_THRESHOLD,
    full_horizon: bool = True,
) -> GateMetrics:
    """
    Воспроизведение импульса по всем четырём каналам и метрики в момент stop_at

    Args:
        schedule: импульс на сетке params
        params: физические параметры
        stop_at: момент оценки, мкс; по умолчанию τ_min, найденный по порогу
        v_override: взаимодействие вместо params.v0 (тепловые флуктуации)
        doppler: доплеровский сдвиг уровня |r>
        full_horizon: продолжить эволюцию до t_N, чтобы заполнить f_avg_full

    Raises:
        ScheduleFormatError: сетка импульса не совпадает с params
    """
    schedule.validate_against(params)
    if stop_at is None:
        k = detect_cutoff_index(schedule, params, threshold)
    else:
        k = stop_index(stop_at, params)

    env = CnotGateEnv(
        params, substeps=substeps, v=v_override, doppler=doppler,
        cutoff_threshold=threshold, record_trace=False,
    )
    env.reset()
    last = params.n_steps if full_horizon else k
    for i in range(last):
        env.apply_controls(schedule.controls(i))

    metrics = env.metrics_at(k)
    if not full_horizon:
        metrics.f_avg_full = None
    logger.debug(
        f"Оценка импульса: τ={metrics.tau_min:.4f} мкс, F_avg={metrics.f_avg:.6f}, "
        f"γ_eT_e={metrics.gamma_e_te:.3e}, γ_rT_r={metrics.gamma_r_tr:.3e}"
    )
    return metrics
