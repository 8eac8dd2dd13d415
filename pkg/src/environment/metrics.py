"""
Метрики гейта и определение момента отсечки τ_min
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..config import CUTOFF_THRESHOLD
from ..physics.params import PhysicalParams
from ..physics.schedule import PulseSchedule

logger = logging.getLogger(__name__)

FIDELITY_DIGITS = 6


def format_fidelity(value: float) -> str:
    """Десятичная строка с 6 значащими цифрами"""
    return f"{value:.{FIDELITY_DIGITS}g}"


@dataclass
class GateMetrics:
    """
    Показатели гейта в момент отсечки

    tau_min: момент оценки, мкс
    f_avg: средняя точность по четырём каналам в tau_min
    f_per_channel: точности Stay00, Stay01, Transfer10, Transfer11
    gamma_e_te, gamma_r_tr: интегральные ошибки распада до tau_min
    reward_total: -log10(1 - f_avg) - η_e γ_e T_e - η_r γ_r T_r
    f_avg_full: средняя точность в конце горизонта t_N
    """
    tau_min: float
    f_avg: float
    f_per_channel: Tuple[float, ...]
    gamma_e_te: float
    gamma_r_tr: float
    reward_total: float
    f_avg_full: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.tau_min < 0:
            raise ValueError(f"tau_min не может быть отрицательным: {self.tau_min}")
        if not 0.0 <= self.f_avg <= 1.0:
            raise ValueError(f"f_avg вне [0, 1]: {self.f_avg}")
        if self.gamma_e_te < 0 or self.gamma_r_tr < 0:
            raise ValueError("Интегральные ошибки распада не могут быть отрицательными")

    @property
    def gate_time(self) -> float:
        return self.tau_min

    def to_dict(self) -> Dict[str, Any]:
        """
        Словарь для metrics.json: точности в виде десятичных строк
        """
        data = asdict(self)
        data['f_avg'] = format_fidelity(self.f_avg)
        data['f_per_channel'] = [format_fidelity(f) for f in self.f_per_channel]
        if self.f_avg_full is not None:
            data['f_avg_full'] = format_fidelity(self.f_avg_full)
        return data

    def to_state(self) -> Dict[str, Any]:
        """Точные значения для заголовка контрольной точки"""
        return {
            'tau_min': float(self.tau_min),
            'f_avg': float(self.f_avg),
            'f_per_channel': [float(f) for f in self.f_per_channel],
            'gamma_e_te': float(self.gamma_e_te),
            'gamma_r_tr': float(self.gamma_r_tr),
            'reward_total': float(self.reward_total),
            'f_avg_full': None if self.f_avg_full is None else float(self.f_avg_full),
        }

    @classmethod
    def from_state(cls, data: Dict[str, Any]) -> "GateMetrics":
        full = data.get('f_avg_full')
        return cls(
            tau_min=float(data['tau_min']),
            f_avg=float(data['f_avg']),
            f_per_channel=tuple(float(f) for f in data['f_per_channel']),
            gamma_e_te=float(data['gamma_e_te']),
            gamma_r_tr=float(data['gamma_r_tr']),
            reward_total=float(data['reward_total']),
            f_avg_full=None if full is None else float(full),
        )


def detect_cutoff_index(
    schedule: PulseSchedule,
    params: PhysicalParams,
    threshold: float = CUTOFF_THRESHOLD,
) -> int:
    """
    Наименьший индекс k, начиная с которого обе нормированные амплитуды ниже порога

    Returns:
        k в 0..N; 0, если амплитуды ни разу не достигали порога
    """
    if not 0 < threshold <= 0.1:
        raise ValueError(f"Порог отсечки должен лежать в (0, 0.1], получено {threshold}")
    above = np.flatnonzero(schedule.normalized_amplitudes(params) >= threshold)
    if above.size == 0:
        return 0
    return int(above[-1]) + 1


def detect_cutoff(
    schedule: PulseSchedule,
    params: PhysicalParams,
    threshold: float = CUTOFF_THRESHOLD,
) -> float:
    """
    Момент отсечки τ_min, мкс
    """
    return detect_cutoff_index(schedule, params, threshold) * schedule.dt
