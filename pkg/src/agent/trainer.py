"""
Цикл обучения агента: сбор эпизодов, обновления TRPO, отслеживание лучшего импульса, контрольные точки
"""
import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import psutil
from tqdm import tqdm

from ..config import CHECKPOINT_EVERY, MAX_WORKERS, TRPO_INITIAL_STD
from ..environment.metrics import GateMetrics
from ..physics.schedule import PulseSchedule, format_float
from .checkpoint import Checkpoint, save_checkpoint
from .networks import HIDDEN_SIZES, ActorCritic, make_actor_critic
from .rollout import Trajectory, collect_batch
from .trpo import TrpoConfig, UpdateDiagnostics, trpo_update

logger = logging.getLogger(__name__)

TRAINING_LOG_HEADER = ["epoch", "mean_reward", "best_f_avg", "tau_min", "kl", "accepted"]
# Номер потока случайных чисел для перемешивания мини-пачек критика
UPDATE_STREAM = 0xC0DE


@dataclass
class TrainingLogRow:
    epoch: int
    mean_reward: float
    best_f_avg: float
    tau_min: float
    kl: float
    accepted: bool

    def as_csv_row(self) -> List[str]:
        return [
            str(self.epoch),
            format_float(self.mean_reward),
            format_float(self.best_f_avg),
            format_float(self.tau_min),
            format_float(self.kl),
            str(int(self.accepted)),
        ]


def training_log_csv(
    rows: Sequence[TrainingLogRow], previous: Sequence[Sequence[str]] = ()
) -> str:
    """
    Текст training_log.csv

    Args:
        rows: строки текущего прогона
        previous: уже записанные строки (без заголовка), которые идут перед rows
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAINING_LOG_HEADER)
    writer.writerows(previous)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buffer.getvalue()


def schedule_to_json(schedule: PulseSchedule) -> Dict[str, Any]:
    return {
        'omega_c': schedule.omega_c.tolist(),
        'omega_t': schedule.omega_t.tolist(),
        'phi_c': schedule.phi_c.tolist(),
        'phi_t': schedule.phi_t.tolist(),
        'dt': schedule.dt,
    }


def schedule_from_json(data: Dict[str, Any]) -> PulseSchedule:
    return PulseSchedule(
        np.asarray(data['omega_c']), np.asarray(data['omega_t']),
        np.asarray(data['phi_c']), np.asarray(data['phi_t']), float(data['dt']),
    )


@dataclass
class TrainingResult:
    """
    Итог обучения: журнал по эпохам и лучший найденный импульс
    """
    log: List[TrainingLogRow] = field(default_factory=list)
    best_f_avg: float = 0.0
    best_tau_min: float = 0.0
    best_schedule: Optional[PulseSchedule] = None
    best_metrics: Any = None
    episodes: int = 0
    updates: int = 0
    discarded: int = 0
    checkpoints: List[Path] = field(default_factory=list)

    def log_csv_text(self) -> str:
        return training_log_csv(self.log)


class Trainer:
    """
    Обучение политики TRPO на эпизодах среды

    Одна эпоха равна одному эпизоду; обновление выполняется после каждых
    episodes_per_update эпизодов. Поток случайных чисел эпизода определяется
    (seed, номер эпизода), поэтому результат не зависит от числа потоков.
    """

    def __init__(
        self,
        env_factory: Callable[[], Any],
        trpo: Optional[TrpoConfig] = None,
        hidden: Sequence[int] = HIDDEN_SIZES,
        initial_std: float = TRPO_INITIAL_STD,
        workers: int = MAX_WORKERS,
        checkpoint_dir: Optional[Path] = None,
        checkpoint_every: int = CHECKPOINT_EVERY,
        config_echo: Optional[Dict[str, Any]] = None,
        show_progress: bool = True,
        checkpoint: Optional[Checkpoint] = None,
    ):
        self.env_factory = env_factory
        self.workers = workers
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.checkpoint_every = checkpoint_every
        self.config_echo = config_echo or {}
        self.show_progress = show_progress
        self.result = TrainingResult()
        self.last_diagnostics = UpdateDiagnostics()

        if checkpoint is not None:
            self.trpo = checkpoint.trpo
            self.ac: ActorCritic = checkpoint.build_actor_critic()
            self.episodes = checkpoint.rng_state.get('episodes', 0)
            self.updates = checkpoint.rng_state.get('updates', 0)
            self._restore_extra(checkpoint.extra)
            logger.info(
                f"Обучение продолжено с контрольной точки: эпизодов {self.episodes}, "
                f"обновлений {self.updates}"
            )
        else:
            self.trpo = trpo or TrpoConfig()
            probe = env_factory()
            obs_dim = probe.observation_space.shape[0]
            act_dim = probe.action_space.shape[0]
            self.ac = make_actor_critic(obs_dim, act_dim, self.trpo.seed, hidden, initial_std)
            self.episodes = 0
            self.updates = 0
        self._mark_boundary()

    def _restore_extra(self, extra: Dict[str, Any]) -> None:
        self.result.best_f_avg = float(extra.get('best_f_avg', 0.0))
        self.result.best_tau_min = float(extra.get('best_tau_min', 0.0))
        self.result.discarded = int(extra.get('discarded', 0))
        if extra.get('best_schedule'):
            self.result.best_schedule = schedule_from_json(extra['best_schedule'])
        if extra.get('best_metrics'):
            self.result.best_metrics = GateMetrics.from_state(extra['best_metrics'])
        self.last_diagnostics = UpdateDiagnostics(
            kl=float(extra.get('last_kl', 0.0)), accepted=bool(extra.get('last_accepted', False))
        )

    def rng_state(self) -> Dict[str, int]:
        return {'seed': self.trpo.seed, **self._boundary['counters']}

    def extra_state(self) -> Dict[str, Any]:
        return dict(self._boundary['extra'])

    def _mark_boundary(self) -> None:
        # Что: контрольная точка всегда фиксирует состояние на границе обновления
        self._boundary = {
            'counters': {'episodes': self.episodes, 'updates': self.updates},
            'extra': self._current_extra(),
        }

    def _current_extra(self) -> Dict[str, Any]:
        best = self.result.best_schedule
        metrics = self.result.best_metrics
        return {
            'best_f_avg': self.result.best_f_avg,
            'best_tau_min': self.result.best_tau_min,
            'best_schedule': schedule_to_json(best) if best is not None else None,
            'best_metrics': metrics.to_state() if metrics is not None else None,
            'discarded': self.result.discarded,
            'last_kl': self.last_diagnostics.kl,
            'last_accepted': self.last_diagnostics.accepted,
        }

    def save(self, path: Path) -> Path:
        path = save_checkpoint(
            path, self.ac, self.trpo, self.rng_state(), self.config_echo, self.extra_state()
        )
        self.result.checkpoints.append(path)
        return path

    def _track_best(self, traj: Trajectory) -> None:
        metrics = traj.metrics
        if metrics is None:
            return
        if metrics.f_avg > self.result.best_f_avg:
            self.result.best_f_avg = metrics.f_avg
            self.result.best_tau_min = metrics.tau_min
            self.result.best_metrics = metrics
            self.result.best_schedule = traj.schedule
            logger.debug(
                f"Эпизод {traj.episode_index + 1}: новая лучшая точность "
                f"{metrics.f_avg:.6f} при τ_min={metrics.tau_min:.4f} мкс"
            )

    def _update(self, batch: List[Trajectory]) -> None:
        rng = np.random.default_rng(
            np.random.SeedSequence(self.trpo.seed, spawn_key=(UPDATE_STREAM, self.updates))
        )
        self.last_diagnostics = trpo_update(self.ac, batch, self.trpo, rng)
        self.updates += 1
        self._mark_boundary()
        if not self.last_diagnostics.accepted:
            logger.debug(f"Обновление {self.updates}: шаг политики отклонён")

        if self.checkpoint_dir and self.checkpoint_every > 0 and self.updates % self.checkpoint_every == 0:
            self.save(self.checkpoint_dir / f"checkpoint_{self.updates:06d}.npz")
            rss_mb = psutil.Process().memory_info().rss / 1024 / 1024
            logger.info(
                f"Обновление {self.updates} (эпизод {self.episodes}): лучшая F_avg="
                f"{self.result.best_f_avg:.6f}, память {rss_mb:.0f} МБ"
            )

    def train(self, epochs: int) -> TrainingResult:
        """
        Обучение на заданном числе эпох (эпизодов) сверх уже пройденных

        Returns:
            TrainingResult с журналом, лучшим импульсом и путями контрольных точек
        """
        if epochs < 0:
            raise ValueError(f"Число эпох не может быть отрицательным, получено {epochs}")
        per_update = self.trpo.episodes_per_update
        end = self.episodes + epochs
        pending: List[Trajectory] = []

        logger.info(
            f"Старт обучения: {epochs} эпох, obs_dim={self.ac.obs_dim}, act_dim={self.ac.act_dim}, "
            f"эпизодов на обновление {per_update}, потоков {self.workers}"
        )
        progress = tqdm(total=epochs, desc="Обучение", unit="эпох", disable=not self.show_progress)
        try:
            while self.episodes < end:
                # Что: пачка доходит до ближайшей границы обновления
                to_boundary = per_update - self.episodes % per_update
                chunk = min(to_boundary, end - self.episodes)
                indices = list(range(self.episodes, self.episodes + chunk))
                trajectories = collect_batch(
                    self.env_factory, self.ac, self.trpo.seed, indices, self.workers
                )
                self.episodes += chunk
                progress.update(chunk)

                chunk_rows = []
                for index, traj in zip(indices, trajectories):
                    if traj is None:
                        self.result.discarded += 1
                        continue
                    pending.append(traj)
                    self._track_best(traj)
                    chunk_rows.append((index, traj.total_reward, self.result.best_f_avg,
                                       self.result.best_tau_min))

                previous = self.last_diagnostics
                if self.episodes % per_update == 0 and pending:
                    self._update(pending)
                    pending = []

                for i, (index, reward, best_f, best_tau) in enumerate(chunk_rows):
                    diag = self.last_diagnostics if i == len(chunk_rows) - 1 else previous
                    self.result.log.append(
                        TrainingLogRow(index + 1, reward, best_f, best_tau, diag.kl, diag.accepted)
                    )
        finally:
            progress.close()

        if pending:
            logger.info(
                f"{len(pending)} эпизодов после последнего обновления не вошли в обновление; "
                f"при продолжении обучения они будут повторены"
            )

        self.result.episodes = self.episodes
        self.result.updates = self.updates
        if self.checkpoint_dir:
            self.save(self.checkpoint_dir / "final.npz")
        logger.info(
            f"Обучение завершено: эпизодов {self.episodes}, обновлений {self.updates}, "
            f"лучшая F_avg={self.result.best_f_avg:.6f}, отброшено {self.result.discarded}"
        )
        return self.result


def train(
    env_factory: Callable[[], Any],
    trpo: TrpoConfig,
    epochs: int,
    **kwargs: Any,
) -> TrainingResult:
    """Обучение с новой инициализацией сетей"""
    return Trainer(env_factory, trpo, **kwargs).train(epochs)
