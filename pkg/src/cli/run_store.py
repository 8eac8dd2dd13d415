"""
Асинхронная запись артефактов запуска: журналы, импульсы, метрики, манифест
"""
import logging
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import aiofiles
import orjson
import psutil

from .. import __version__

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
METRICS_FILE = "metrics.json"
TRAINING_LOG_FILE = "training_log.csv"
BEST_PULSE_FILE = "best_pulse.csv"
CONFIG_FILE = "config.env"
PARTIAL_MARKER = "PARTIAL"
CHECKPOINT_DIR = "checkpoints"

# Пакеты, версии которых попадают в манифест
TRACKED_PACKAGES = ("numpy", "scipy", "torch", "gymnasium", "orjson", "python-dotenv")

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


class RunDirectoryError(ValueError):
    """Каталог запуска не содержит обязательного файла"""


def dumps_json(data: Any) -> bytes:
    return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"


def package_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def host_info() -> Dict[str, Any]:
    return {
        'platform': platform.platform(),
        'python': platform.python_version(),
        'cpu_count': psutil.cpu_count(logical=True),
        'memory_total_mb': psutil.virtual_memory().total // (1024 * 1024),
    }


class RunStore:
    """
    Каталог одного запуска

    Пока запуск не завершён, в каталоге лежит маркер PARTIAL; он снимается только
    после записи всех артефактов.
    """

    def __init__(self, run_dir: Union[str, Path]):
        self.run_dir = Path(run_dir)
        self.written: List[str] = []

    @property
    def checkpoint_dir(self) -> Path:
        return self.run_dir / CHECKPOINT_DIR

    @property
    def partial_marker(self) -> Path:
        return self.run_dir / PARTIAL_MARKER

    async def prepare(self) -> None:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        await self.mark_partial("запуск не завершён")
        logger.info(f"Каталог запуска: {self.run_dir}")

    async def mark_partial(self, reason: str) -> None:
        async with aiofiles.open(self.partial_marker, 'w', encoding='utf-8') as f:
            await f.write(f"{reason}\n")

    def clear_partial(self) -> None:
        self.partial_marker.unlink(missing_ok=True)

    async def write_text(self, name: str, text: str) -> Path:
        path = self.run_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, 'w', encoding='utf-8', newline='') as f:
            await f.write(text)
        self._remember(name)
        logger.debug(f"Записан {path}")
        return path

    async def write_json(self, name: str, data: Any) -> Path:
        path = self.run_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, 'wb') as f:
            await f.write(dumps_json(data))
        self._remember(name)
        return path

    def _remember(self, name: str) -> None:
        if name not in self.written:
            self.written.append(name)

    async def write_manifest(self, config: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> Path:
        """
        Манифест: разрешённая конфигурация, версия движка, версии пакетов, сведения о машине и список файлов
        """
        checkpoints = sorted(
            str(p.relative_to(self.run_dir)) for p in self.checkpoint_dir.glob("*.npz")
        ) if self.checkpoint_dir.exists() else []
        manifest = {
            'engine_version': __version__,
            'created_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
            'config': config,
            'packages': package_versions(),
            'host': host_info(),
            'files': sorted(set(self.written) | set(checkpoints) | {MANIFEST_FILE}),
        }
        if extra:
            manifest.update(extra)
        return await self.write_json(MANIFEST_FILE, manifest)


async def read_json(path: Union[str, Path]) -> Any:
    async with aiofiles.open(path, 'rb') as f:
        return orjson.loads(await f.read())


async def read_run(run_dir: Union[str, Path]) -> Dict[str, Any]:
    """
    Манифест и метрики завершённого запуска

    Raises:
        RunDirectoryError: нет manifest.json или metrics.json
    """
    run_dir = Path(run_dir)
    manifest_path = run_dir / MANIFEST_FILE
    metrics_path = run_dir / METRICS_FILE
    if not manifest_path.is_file():
        raise RunDirectoryError(f"В каталоге {run_dir} нет {MANIFEST_FILE}")
    if not metrics_path.is_file():
        raise RunDirectoryError(f"В каталоге {run_dir} нет {METRICS_FILE}")
    if (run_dir / PARTIAL_MARKER).exists():
        logger.warning(f"Запуск {run_dir} помечен как незавершённый")
    return {'manifest': await read_json(manifest_path), 'metrics': await read_json(metrics_path)}
