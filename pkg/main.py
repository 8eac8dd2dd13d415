#!/usr/bin/env python3
"""
Главная точка входа: обучение и анализ импульсов гейта CNOT на ридберговских атомах
"""
import argparse
import asyncio
import sys
import time
from pathlib import Path
from typing import List, Optional

sys.path.insert(0, str(Path(__file__).parent))

from src.agent.checkpoint import CheckpointError
from src.cli.commands import cmd_eval, cmd_export_pulse, cmd_report, cmd_sweep_thermal, cmd_train
from src.cli.run_config import ConfigError
from src.cli.run_store import dumps_json
from src.physics.propagator import NumericalAccuracyError
from src.utils.logging_config import log_banner, setup_logging

logger = setup_logging()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3
EXIT_INTERRUPTED = 130


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Синтез импульсов гейта CNOT обучением с подкреплением (TRPO) и анализ их устойчивости"
    )
    parser.add_argument("--log-level", default=None, help="Уровень логирования (по умолчанию из .env)")
    parser.add_argument("--workers", type=int, default=None, help="Число потоков для эпизодов и точек анализа")
    parser.add_argument(
        "--output-root", default=None, help="Корень каталогов запусков (по умолчанию OUTPUT_ROOT из .env)"
    )
    parser.add_argument("--no-progress", action="store_true", help="Не показывать прогресс-бары")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Обучение по файлу конфигурации")
    train.add_argument("config", help="Файл конфигурации key=value")
    train.add_argument("--resume", default=None, help="Продолжить с контрольной точки")

    evaluate = sub.add_parser("eval", help="Метрики импульса из CSV")
    evaluate.add_argument("pulse", help="CSV импульса")
    evaluate.add_argument("--config", default=None, help="Файл конфигурации с параметрами модели")
    evaluate.add_argument("--output", default=None, help="Куда записать metrics JSON")

    sweep = sub.add_parser("sweep-thermal", help="Зависимость ошибки гейта от температуры")
    sweep.add_argument("pulse", help="CSV импульса")
    sweep.add_argument("--config", default=None, help="Файл конфигурации с параметрами модели")
    sweep.add_argument(
        "--temperatures", default=None, help="Температуры через запятую, мкК (по умолчанию из конфигурации)"
    )
    sweep.add_argument(
        "--effect", action="append", choices=["doppler", "interaction", "both"], default=None,
        help="Эффект (можно указать несколько раз; по умолчанию все)",
    )
    sweep.add_argument("--monte-carlo", action="store_true", help="Дополнительно усреднить по скоростям атомов")
    sweep.add_argument("--output", default=None, help="Куда записать CSV")

    report = sub.add_parser("report", help="Сводная таблица по каталогам запусков")
    report.add_argument("runs", nargs="+", help="Каталоги запусков")
    report.add_argument("--markdown", action="store_true", help="Таблица в формате markdown")
    report.add_argument("--output", default=None, help="Куда записать таблицу")

    export = sub.add_parser("export-pulse", help="Экспорт лучшего импульса запуска")
    export.add_argument("run", help="Каталог запуска")
    export.add_argument("--checkpoint", default=None, help="Прогнать среднее политики из контрольной точки")
    export.add_argument("--output", default=None, help="Куда записать CSV")
    return parser


def parse_temperatures(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise ConfigError(f"Некорректный список температур '{text}': {e}") from e


async def dispatch(args: argparse.Namespace) -> int:
    show_progress = not args.no_progress
    if args.command == "train":
        run_dir = await cmd_train(
            args.config, output_root=args.output_root, workers=args.workers,
            resume=args.resume, show_progress=show_progress,
        )
        logger.info(f"Результаты: {run_dir}")
    elif args.command == "eval":
        data = await cmd_eval(args.pulse, config_path=args.config, output=args.output)
        if not args.output:
            print(dumps_json(data).decode('utf-8'), end="")
    elif args.command == "sweep-thermal":
        text = await cmd_sweep_thermal(
            args.pulse,
            temperatures=parse_temperatures(args.temperatures),
            effects=args.effect or ("doppler", "interaction", "both"),
            config_path=args.config,
            output=args.output,
            workers=args.workers or 1,
            monte_carlo=args.monte_carlo,
            show_progress=show_progress,
        )
        if not args.output:
            print(text, end="")
    elif args.command == "report":
        text = await cmd_report(args.runs, markdown=args.markdown)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            print(text, end="")
    elif args.command == "export-pulse":
        target = await cmd_export_pulse(args.run, output=args.output, checkpoint=args.checkpoint)
        logger.info(f"Импульс записан: {target}")
    return EXIT_OK


async def main(argv: Optional[List[str]] = None) -> int:
    """
    Главная функция приложения
    """
    global logger
    args = build_parser().parse_args(argv)
    try:
        logger = setup_logging(log_level=args.log_level)
    except ValueError as e:
        print(f"✗ {e}")
        return EXIT_CONFIG_ERROR

    log_banner(logger, f"КОМАНДА: {args.command}", [
        ("Потоков", args.workers or "из конфигурации"),
        ("Каталог запусков", args.output_root or "из конфигурации"),
    ])
    start_time = time.time()

    try:
        code = await dispatch(args)
    except KeyboardInterrupt:
        logger.warning("Работа прервана пользователем")
        return EXIT_INTERRUPTED
    except NumericalAccuracyError as e:
        logger.error(f"✗ Ошибка точности интегратора: {e}", exc_info=True)
        return EXIT_NUMERICAL_ERROR
    except (ConfigError, ValueError, FileNotFoundError, CheckpointError) as e:
        # Что: ScheduleFormatError и RunDirectoryError тоже наследуют ValueError
        logger.error(f"✗ Ошибка конфигурации или входных данных: {e}")
        return EXIT_CONFIG_ERROR
    except Exception as e:
        logger.error(f"✗ КРИТИЧЕСКАЯ ОШИБКА: {e}", exc_info=True)
        return EXIT_FAILURE

    log_banner(logger, f"✓ ГОТОВО за {time.time() - start_time:.1f} сек")
    return code


def run():
    """
    Точка входа для запуска через командную строку
    """
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        print("\n⚠ Работа прервана пользователем")
        sys.exit(EXIT_INTERRUPTED)


if __name__ == "__main__":
    run()
