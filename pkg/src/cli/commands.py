"""
Команды CLI: обучение, оценка импульса, тепловой анализ, сводная таблица, экспорт импульса
"""
import asyncio
import csv
import io
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import aiofiles

from ..agent.checkpoint import load_checkpoint
from ..agent.rollout import deterministic_rollout
from ..agent.trainer import Trainer, training_log_csv
from ..baselines.piecewise import build_piecewise_report
from ..baselines.target_env import evaluate_target_schedule
from ..config import OUTPUT_ROOT
from ..environment.evaluation import evaluate_schedule
from ..environment.metrics import format_fidelity
from ..physics.schedule import PulseSchedule, format_float
from ..robustness.thermal import (
    Evaluator,
    ThermalEffect,
    f_avg_at_temperature,
    gate_evaluator,
    monte_carlo_doppler,
    sweep_csv,
    target_evaluator,
    thermal_sweep,
)
from .run_config import ConfigError, RunConfig, load_run_config
from .run_store import (
    BEST_PULSE_FILE,
    CONFIG_FILE,
    METRICS_FILE,
    TRAINING_LOG_FILE,
    RunDirectoryError,
    RunStore,
    dumps_json,
    read_run,
)

logger = logging.getLogger(__name__)

REPORT_HEADER = [
    "method", "case", "xi", "epochs", "tau_min_us", "gamma_e_te", "gamma_r_tr", "f_avg", "f_avg_T", "delta_f",
]
MONTE_CARLO_HEADER = ["T_uK", "shots", "mean_delta_f", "standard_error"]


def _resolve_config(config_path: Optional[Union[str, Path]]) -> RunConfig:
    return load_run_config(config_path) if config_path else RunConfig.from_defaults()


def _schedule_dt(cfg: RunConfig) -> float:
    if cfg.mode.piecewise_mode is not None:
        pcfg = cfg.piecewise_config()
        return pcfg.t_total / pcfg.n_steps
    return cfg.physical_params().dt


def load_pulse(path: Union[str, Path], cfg: RunConfig) -> PulseSchedule:
    """CSV импульса на сетке режима конфигурации"""
    return PulseSchedule.from_csv(path, dt=_schedule_dt(cfg))


def schedule_evaluator(cfg: RunConfig, schedule: PulseSchedule) -> Evaluator:
    params = cfg.physical_params()
    if cfg.mode.piecewise_mode is not None:
        return target_evaluator(schedule, cfg.piecewise_config(), params)
    return gate_evaluator(schedule, params, substeps=cfg.substeps)


def summarize_schedule(cfg: RunConfig, schedule: PulseSchedule, epochs: int) -> Dict[str, Any]:
    """
    Метрики импульса для metrics.json и строка сводной таблицы

    Для кусочных протоколов время гейта включает квадратные π-импульсы контрольного атома,
    а F_avg учитывает ε_control.
    """
    params = cfg.physical_params()
    temperature = cfg.values["thermal.report_temperature_uk"]
    data: Dict[str, Any] = {}

    if cfg.mode.piecewise_mode is not None:
        pcfg = cfg.piecewise_config()
        metrics = evaluate_target_schedule(
            schedule, pcfg, params, threshold=cfg.cutoff_threshold, substeps=cfg.substeps
        )
        report = build_piecewise_report(pcfg, metrics, params, epochs)
        data['piecewise'] = dict(zip(
            ["protocol", "epochs", "xi_omega", "xi_phi", "tau_min_us", "t_sq_us", "f_t", "eps_control", "f_avg"],
            report.as_csv_row(),
        ))
        f_avg = report.f_avg
        tau = report.total_gate_time
        xi = pcfg.xi_omega
    else:
        metrics = evaluate_schedule(
            schedule, params, substeps=cfg.substeps, threshold=cfg.cutoff_threshold
        )
        f_avg = metrics.f_avg
        tau = metrics.tau_min
        xi = params.xi_omega

    f_temperature, delta_f = f_avg_at_temperature(
        schedule_evaluator(cfg, schedule), params, cfg.thermal_config(), temperature
    )
    data['gate'] = metrics.to_dict()
    data['summary'] = {
        'method': cfg.mode.method,
        'case': cfg.name,
        'xi': format_float(xi),
        'epochs': epochs,
        'tau_min_us': format_float(tau),
        'gamma_e_te': format_float(metrics.gamma_e_te),
        'gamma_r_tr': format_float(metrics.gamma_r_tr),
        'f_avg': format_fidelity(f_avg),
        'f_avg_T': format_fidelity(f_temperature),
        'delta_f': format_float(delta_f),
        'temperature_uk': format_float(temperature),
    }
    return data


async def read_log_rows(path: Path, episodes: int) -> List[List[str]]:
    """
    Строки training_log.csv до эпизода episodes включительно

    Строки после контрольной точки будут пересчитаны при продолжении обучения.
    """
    if not path.is_file():
        logger.warning(f"Журнал {path} не найден: сохранится только продолжение обучения")
        return []
    async with aiofiles.open(path, 'r', encoding='utf-8') as f:
        text = await f.read()
    rows = list(csv.reader(io.StringIO(text)))[1:]
    kept = [row for row in rows if row and int(row[0]) <= episodes]
    if len(kept) < len(rows):
        logger.info(f"Журнал обрезан до эпохи {episodes}: отброшено {len(rows) - len(kept)} строк")
    return kept


async def cmd_train(
    config_path: Union[str, Path],
    output_root: Optional[Union[str, Path]] = None,
    workers: Optional[int] = None,
    resume: Optional[Union[str, Path]] = None,
    show_progress: bool = True,
) -> Path:
    """
    Обучение по файлу конфигурации

    Args:
        config_path: файл key=value
        output_root: корень для каталогов запусков (по умолчанию run.output_dir или OUTPUT_ROOT)
        workers: число потоков для эпизодов (переопределяет run.workers)
        resume: контрольная точка, с которой продолжить обучение

    Returns:
        Каталог запуска с журналом, контрольными точками, лучшим импульсом, метриками и манифестом
    """
    cfg = load_run_config(config_path)
    if workers is not None:
        cfg = cfg.with_values(run__workers=workers)
    root = Path(output_root or cfg.output_dir or OUTPUT_ROOT)
    store = RunStore(root / cfg.name)
    await store.prepare()

    try:
        checkpoint = load_checkpoint(resume) if resume else None
        done = checkpoint.rng_state.get('episodes', 0) if checkpoint is not None else 0
        remaining = max(cfg.epochs - done, 0)
        if checkpoint is not None and done >= cfg.epochs:
            logger.warning(
                f"Контрольная точка {resume} уже прошла {done} эпох из {cfg.epochs}: обучение не продолжается"
            )
        trainer = Trainer(
            cfg.env_factory(),
            cfg.trpo_config(),
            hidden=cfg.hidden,
            initial_std=cfg.initial_std,
            workers=cfg.workers,
            checkpoint_dir=store.checkpoint_dir,
            checkpoint_every=cfg.checkpoint_every,
            config_echo=cfg.to_flat(),
            show_progress=show_progress,
            checkpoint=checkpoint,
        )
        result = await asyncio.to_thread(trainer.train, remaining)

        previous = await read_log_rows(store.run_dir / TRAINING_LOG_FILE, done) if checkpoint else []
        await store.write_text(CONFIG_FILE, cfg.to_text())
        await store.write_text(TRAINING_LOG_FILE, training_log_csv(result.log, previous))
        metrics: Dict[str, Any] = {
            'episodes': result.episodes,
            'updates': result.updates,
            'discarded': result.discarded,
        }
        if result.best_schedule is not None:
            await store.write_text(BEST_PULSE_FILE, result.best_schedule.to_csv_text())
            metrics.update(summarize_schedule(cfg, result.best_schedule, result.episodes))
        else:
            logger.warning("Ни один эпизод не завершился: лучший импульс не записан")
        await store.write_json(METRICS_FILE, metrics)
        await store.write_manifest(cfg.to_flat())
    except OSError as e:
        logger.error(f"Ошибка записи в {store.run_dir}: {e}")
        try:
            await store.mark_partial(f"ошибка записи: {e}")
        except OSError:
            pass
        raise

    store.clear_partial()
    logger.info(f"Запуск {cfg.name} завершён: {store.run_dir}")
    return store.run_dir


async def cmd_eval(
    pulse_csv: Union[str, Path],
    config_path: Optional[Union[str, Path]] = None,
    output: Optional[Union[str, Path]] = None,
) -> Dict[str, Any]:
    """
    Метрики импульса из CSV при параметрах конфигурации (или параметрах по умолчанию)

    Raises:
        ScheduleFormatError: ошибка формата CSV (с номером строки) или несовпадение сетки
    """
    cfg = _resolve_config(config_path)
    schedule = load_pulse(pulse_csv, cfg)
    data = summarize_schedule(cfg, schedule, epochs=0)
    if output:
        await _write_bytes(output, dumps_json(data))
    gate = data['gate']
    logger.info(
        f"Импульс {pulse_csv}: τ_min={gate['tau_min']:.4f} мкс, F_avg={data['summary']['f_avg']}, "
        f"F_avg(t_N)={gate.get('f_avg_full')}"
    )
    return data


async def cmd_sweep_thermal(
    pulse_csv: Union[str, Path],
    temperatures: Optional[Sequence[float]] = None,
    effects: Sequence[str] = tuple(e.value for e in ThermalEffect),
    config_path: Optional[Union[str, Path]] = None,
    output: Optional[Union[str, Path]] = None,
    workers: int = 1,
    monte_carlo: bool = False,
    show_progress: bool = True,
) -> str:
    """
    Таблица δF(T) для импульса из CSV

    Returns:
        Текст CSV (и запись в output, если задан)
    """
    cfg = _resolve_config(config_path)
    if temperatures is not None:
        cfg = cfg.with_values(thermal__temperatures_uk=tuple(float(t) for t in temperatures))
    thermal = cfg.thermal_config()
    if not thermal.temperatures_uk:
        raise ConfigError("Список температур для теплового анализа пуст")
    try:
        effects = [ThermalEffect(e) for e in effects]
    except ValueError as e:
        raise ConfigError(f"Неизвестный эффект: {e}") from e

    schedule = load_pulse(pulse_csv, cfg)
    evaluator = schedule_evaluator(cfg, schedule)
    params = cfg.physical_params()
    rows = await asyncio.to_thread(
        thermal_sweep, None, params, thermal, effects, evaluator, workers, show_progress
    )
    text = sweep_csv(rows)
    if output:
        await _write_bytes(output, text.encode("utf-8"))

    if monte_carlo:
        shots = cfg.values["thermal.monte_carlo_shots"]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(MONTE_CARLO_HEADER)
        for i, temperature in enumerate(thermal.temperatures_uk):
            result = await asyncio.to_thread(
                monte_carlo_doppler, evaluator, params, thermal, temperature, shots, cfg.seed + i
            )
            writer.writerow([
                format_float(temperature), str(result.shots),
                format_float(result.mean_delta_f), format_float(result.standard_error),
            ])
        if output:
            mc_path = Path(output).with_name(Path(output).stem + "_mc.csv")
            await _write_bytes(mc_path, buffer.getvalue().encode("utf-8"))
    return text


async def cmd_report(run_dirs: Sequence[Union[str, Path]], markdown: bool = False) -> str:
    """
    Сводная таблица по каталогам запусков

    Raises:
        RunDirectoryError: нет манифеста, метрик или в запуске не найден импульс
    """
    if not run_dirs:
        raise RunDirectoryError("Не указан ни один каталог запуска")
    rows: List[List[str]] = []
    for run_dir in run_dirs:
        run = await read_run(run_dir)
        summary = run['metrics'].get('summary')
        if summary is None:
            raise RunDirectoryError(f"В метриках {run_dir} нет лучшего импульса")
        rows.append([str(summary[key]) for key in REPORT_HEADER])

    if markdown:
        lines = ["| " + " | ".join(REPORT_HEADER) + " |", "|" + "---|" * len(REPORT_HEADER)]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    writer.writerows(rows)
    return buffer.getvalue()


async def cmd_export_pulse(
    run_dir: Union[str, Path],
    output: Optional[Union[str, Path]] = None,
    checkpoint: Optional[Union[str, Path]] = None,
) -> Path:
    """
    Экспорт лучшего импульса запуска или импульса политики из контрольной точки

    Если задана контрольная точка, импульс получается прогоном среднего политики при
    конфигурации, сохранённой в этой контрольной точке.
    """
    run_dir = Path(run_dir)
    if checkpoint is not None:
        ckpt = load_checkpoint(checkpoint)
        cfg = RunConfig.from_mapping(ckpt.config, source=str(checkpoint))
        env = cfg.env_factory()()
        schedule = deterministic_rollout(ckpt.build_actor_critic(), env).schedule
        default_name = f"{Path(checkpoint).stem}_pulse.csv"
    else:
        source = run_dir / BEST_PULSE_FILE
        if not source.is_file():
            raise RunDirectoryError(f"В каталоге {run_dir} нет {BEST_PULSE_FILE}")
        # Что: шаг сетки берём из конфигурации запуска, если она сохранена
        config_file = run_dir / CONFIG_FILE
        if config_file.is_file():
            schedule = load_pulse(source, load_run_config(config_file))
        else:
            schedule = PulseSchedule.from_csv(source)
        default_name = "exported_pulse.csv"

    target = Path(output) if output else run_dir / default_name
    await _write_bytes(target, schedule.to_csv_text().encode("utf-8"))
    logger.info(f"Импульс из {schedule.n_steps} шагов экспортирован в {target}")
    return target


async def _write_bytes(path: Union[str, Path], data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, 'wb') as f:
        await f.write(data)
