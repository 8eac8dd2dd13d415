"""
Последовательность управляющих импульсов и её CSV-формат
"""
import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .params import PhysicalParams

logger = logging.getLogger(__name__)

CSV_HEADER = ["step", "t_us", "omega_c", "omega_t", "phi_c", "phi_t"]
# Что: 17 значащих цифр дают точное восстановление float64
FLOAT_FORMAT = "{:.17g}"


class ScheduleFormatError(ValueError):
    """Ошибка формата CSV импульсов или несовпадение сетки"""


def wrap_phase(phi):
    """
    Приведение фазы к интервалу (-π, π]
    """
    phi = np.asarray(phi, dtype=float)
    wrapped = phi - 2.0 * np.pi * np.ceil((phi - np.pi) / (2.0 * np.pi))
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def format_float(value: float) -> str:
    return FLOAT_FORMAT.format(float(value))


@dataclass
class PulseSchedule:
    """
    Кусочно-постоянные управления на сетке из N шагов: шаг i действует на [t_i, t_{i+1})
    """
    omega_c: np.ndarray
    omega_t: np.ndarray
    phi_c: np.ndarray
    phi_t: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        self.omega_c = np.asarray(self.omega_c, dtype=float)
        self.omega_t = np.asarray(self.omega_t, dtype=float)
        self.phi_c = np.asarray(self.phi_c, dtype=float)
        self.phi_t = np.asarray(self.phi_t, dtype=float)
        lengths = {len(self.omega_c), len(self.omega_t), len(self.phi_c), len(self.phi_t)}
        if len(lengths) != 1:
            raise ValueError(f"Длины массивов управлений различаются: {sorted(lengths)}")
        if not self.dt > 0:
            raise ValueError(f"Шаг dt должен быть положительным, получено {self.dt}")
        if np.any(self.omega_c < 0) or np.any(self.omega_t < 0):
            raise ValueError("Амплитуды импульсов не могут быть отрицательными")

    @classmethod
    def zeros(cls, n_steps: int, dt: float) -> "PulseSchedule":
        z = np.zeros(n_steps)
        return cls(z.copy(), z.copy(), z.copy(), z.copy(), dt)

    @classmethod
    def for_params(cls, params: PhysicalParams) -> "PulseSchedule":
        """Нулевая последовательность на сетке параметров"""
        return cls.zeros(params.n_steps, params.dt)

    @property
    def n_steps(self) -> int:
        return len(self.omega_c)

    @property
    def t_total(self) -> float:
        return self.n_steps * self.dt

    @property
    def start_times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt

    def controls(self, step: int) -> tuple:
        """(Ω_c, Ω_t, φ_c, φ_t) на шаге step"""
        return (
            float(self.omega_c[step]),
            float(self.omega_t[step]),
            float(self.phi_c[step]),
            float(self.phi_t[step]),
        )

    def normalized_amplitudes(self, params: PhysicalParams) -> np.ndarray:
        """max(Ω_c/Ω_c^max, Ω_t/Ω_t^max) по шагам"""
        return np.maximum(self.omega_c / params.omega_c_max, self.omega_t / params.omega_t_max)

    def truncated(self, n_steps: int) -> "PulseSchedule":
        return PulseSchedule(
            self.omega_c[:n_steps], self.omega_t[:n_steps],
            self.phi_c[:n_steps], self.phi_t[:n_steps], self.dt,
        )

    def validate_against(self, params: PhysicalParams, tol: float = 1e-9) -> None:
        """
        Проверка совпадения сетки и допустимости амплитуд для заданных параметров
        """
        if self.n_steps != params.n_steps:
            raise ScheduleFormatError(
                f"Несовпадение сетки: в импульсе {self.n_steps} шагов, ожидается {params.n_steps}"
            )
        if abs(self.dt - params.dt) > tol * max(1.0, params.dt):
            raise ScheduleFormatError(f"Несовпадение шага: dt={self.dt}, ожидается {params.dt}")
        if np.any(self.omega_c > params.omega_c_max * (1 + tol)) or np.any(
            self.omega_t > params.omega_t_max * (1 + tol)
        ):
            raise ValueError("Амплитуды импульса превышают допустимые максимумы")

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i, t in enumerate(self.start_times):
            writer.writerow([
                i,
                format_float(t),
                format_float(self.omega_c[i]),
                format_float(self.omega_t[i]),
                format_float(self.phi_c[i]),
                format_float(self.phi_t[i]),
            ])
        return buffer.getvalue()

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        logger.debug(f"Импульс из {self.n_steps} шагов записан в {path}")
        return path

    @classmethod
    def from_csv_text(cls, text: str, dt: Optional[float] = None) -> "PulseSchedule":
        """
        Разбор CSV импульсов

        Args:
            text: содержимое файла
            dt: ожидаемый шаг; если не задан, выводится из колонки t_us

        Raises:
            ScheduleFormatError: с номером строки при ошибке формата
        """
        reader = csv.reader(io.StringIO(text))
        rows: List[List[str]] = list(reader)
        if not rows or [c.strip() for c in rows[0]] != CSV_HEADER:
            raise ScheduleFormatError(f"Строка 1: ожидается заголовок {','.join(CSV_HEADER)}")

        steps, times, columns = [], [], [[], [], [], []]
        for line_no, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ScheduleFormatError(
                    f"Строка {line_no}: ожидается {len(CSV_HEADER)} полей, получено {len(row)}"
                )
            try:
                step = int(row[0])
                values = [float(x) for x in row[1:]]
            except ValueError as e:
                raise ScheduleFormatError(f"Строка {line_no}: некорректное число ({e})") from e
            if step != len(steps):
                raise ScheduleFormatError(
                    f"Строка {line_no}: ожидается шаг {len(steps)}, получено {step}"
                )
            if not all(np.isfinite(values)):
                raise ScheduleFormatError(f"Строка {line_no}: нечисловое значение")
            if values[1] < 0 or values[2] < 0:
                raise ScheduleFormatError(f"Строка {line_no}: отрицательная амплитуда")
            steps.append(step)
            times.append(values[0])
            for col, value in zip(columns, values[1:]):
                col.append(value)

        if not steps:
            raise ScheduleFormatError("CSV импульсов не содержит ни одного шага")

        if dt is None:
            if len(times) < 2:
                raise ScheduleFormatError("Невозможно определить dt по одной строке; задайте dt явно")
            dt = times[1] - times[0]
        expected = np.arange(len(times)) * dt
        mismatch = np.flatnonzero(np.abs(np.asarray(times) - expected) > 1e-9 * max(1.0, dt * len(times)))
        if mismatch.size:
            row = int(mismatch[0]) + 2
            raise ScheduleFormatError(f"Строка {row}: t_us не соответствует сетке с шагом {dt}")

        return cls(*[np.asarray(c) for c in columns], dt=float(dt))

    @classmethod
    def from_csv(cls, path: Union[str, Path], dt: Optional[float] = None) -> "PulseSchedule":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"CSV файл импульса не найден: {path}")
        return cls.from_csv_text(path.read_text(encoding="utf-8"), dt=dt)
