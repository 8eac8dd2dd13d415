"""
Конфигурация логирования: консоль совместно с прогресс-барами tqdm и файл с ротацией
"""
import logging
import logging.handlers
from pathlib import Path
from typing import Iterable, Optional, Tuple

from tqdm import tqdm

from ..config import LOG_BACKUP_COUNT, LOG_FILE, LOG_LEVEL, LOG_MAX_BYTES

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
BANNER_WIDTH = 60
# Сторонние библиотеки, чьи сообщения ниже WARNING не нужны в журнале запуска
QUIET_LOGGERS = ("asyncio", "torch", "gymnasium")


class TqdmLoggingHandler(logging.Handler):
    """
    Вывод в консоль через tqdm.write, чтобы строки журнала не разрывали прогресс-бар обучения
    """

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.write(self.format(record))
        except Exception:
            self.handleError(record)


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    max_bytes: Optional[int] = None,
    backup_count: Optional[int] = None,
) -> logging.Logger:
    """
    Настройка корневого логгера

    Args:
        log_level: Уровень логирования (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Путь к файлу логов
        max_bytes: Максимальный размер файла логов в байтах
        backup_count: Количество резервных копий логов

    Returns:
        Настроенный корневой логгер
    """
    log_level = (log_level or LOG_LEVEL).upper()
    log_file = log_file or LOG_FILE
    max_bytes = max_bytes or LOG_MAX_BYTES
    backup_count = backup_count or LOG_BACKUP_COUNT

    level = logging.getLevelName(log_level)
    if not isinstance(level, int):
        raise ValueError(f"Неизвестный уровень логирования: {log_level}")

    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    logger = logging.getLogger()
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console_handler = TqdmLoggingHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    file_handler = logging.handlers.RotatingFileHandler(
        log_file,
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8"
    )
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))

    return logger


def log_banner(logger: logging.Logger, title: str, items: Iterable[Tuple[str, object]] = ()) -> None:
    """
    Заголовок этапа в журнале: рамка из '=' и строки «ключ: значение»
    """
    logger.info("=" * BANNER_WIDTH)
    logger.info(title)
    logger.info("=" * BANNER_WIDTH)
    for key, value in items:
        logger.info(f"  - {key}: {value}")
