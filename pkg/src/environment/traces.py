"""
Пошаговая трасса эпизода и её CSV-выгрузка
"""
import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

from ..physics.schedule import format_float

TRACE_HEADER = ["step", "t_us", "reward", "f_avg_running", "pop_e_bar", "pop_r_bar"]


@dataclass
class TraceRow:
    step: int
    t_us: float
    reward: float
    f_avg_running: float
    pop_e_bar: float
    pop_r_bar: float


@dataclass
class EpisodeTrace:
    dt: float
    rows: List[TraceRow] = field(default_factory=list)

    def record(self, step: int, reward: float, f_avg: float, pop_e: float, pop_r: float) -> None:
        # Что: step это номер завершённого шага, время соответствует концу интервала
        self.rows.append(TraceRow(step, step * self.dt, reward, f_avg, pop_e, pop_r))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def total_reward(self) -> float:
        return float(sum(row.reward for row in self.rows))

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for row in self.rows:
            writer.writerow([
                row.step,
                format_float(row.t_us),
                format_float(row.reward),
                format_float(row.f_avg_running),
                format_float(row.pop_e_bar),
                format_float(row.pop_r_bar),
            ])
        return buffer.getvalue()

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        return path
