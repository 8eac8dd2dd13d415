"""
Сохранение и загрузка контрольных точек агента (npz + JSON-заголовок)
"""
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import orjson
import torch

from .networks import ActorCritic, make_actor_critic
from .trpo import TrpoConfig

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
HEADER_KEY = "header"
ARRAY_DTYPE = np.dtype('<f8')


class CheckpointError(RuntimeError):
    """Повреждённая контрольная точка или несовместимая версия формата"""


@dataclass
class Checkpoint:
    """
    Содержимое контрольной точки

    rng_state: (seed, число пройденных эпизодов и обновлений), однозначно задающие потоки случайных чисел
    extra: лучшая точность, лучший импульс и прочее состояние обучения
    """
    actor_state: Dict[str, np.ndarray]
    critic_state: Dict[str, np.ndarray]
    trpo: TrpoConfig
    obs_dim: int
    act_dim: int
    hidden: tuple
    initial_std: float
    rng_state: Dict[str, int] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    def build_actor_critic(self) -> ActorCritic:
        """Восстановление сетей с точными значениями параметров"""
        ac = make_actor_critic(self.obs_dim, self.act_dim, seed=0, hidden=self.hidden,
                               initial_std=self.initial_std)
        ac.actor.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in self.actor_state.items()})
        ac.critic.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in self.critic_state.items()})
        return ac


def state_arrays(module: torch.nn.Module) -> Dict[str, np.ndarray]:
    return {k: v.detach().cpu().numpy().astype(ARRAY_DTYPE) for k, v in module.state_dict().items()}


def save_checkpoint(
    path: Union[str, Path],
    ac: ActorCritic,
    trpo: TrpoConfig,
    rng_state: Dict[str, int],
    config: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Запись контрольной точки

    Args:
        path: путь к файлу .npz
        ac: актёр и критик
        trpo: гиперпараметры обучения
        rng_state: состояние потоков случайных чисел
        config: полная конфигурация запуска (копируется в заголовок)
        extra: JSON-совместимое состояние обучения

    Returns:
        Путь к записанному файлу
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    actor = state_arrays(ac.actor)
    critic = state_arrays(ac.critic)

    header = {
        'version': CHECKPOINT_VERSION,
        'obs_dim': ac.obs_dim,
        'act_dim': ac.act_dim,
        'hidden': list(ac.hidden),
        'initial_std': float(ac.meta.get('initial_std', float(np.exp(actor['log_std'][0])))),
        'layer_shapes': ac.layer_shapes(),
        'trpo': trpo.to_dict(),
        'rng_state': rng_state,
        'config': config or {},
        'extra': extra or {},
    }
    arrays = {HEADER_KEY: np.frombuffer(orjson.dumps(header, option=orjson.OPT_SORT_KEYS), dtype=np.uint8)}
    arrays.update({f"actor/{k}": v for k, v in actor.items()})
    arrays.update({f"critic/{k}": v for k, v in critic.items()})

    with open(path, 'wb') as fh:
        np.savez(fh, **arrays)
    logger.info(f"Контрольная точка записана: {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Чтение контрольной точки

    Raises:
        CheckpointError: файл повреждён, не найден или имеет другую версию формата
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Контрольная точка не найдена: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            if HEADER_KEY not in data.files:
                raise CheckpointError(f"В файле {path} нет заголовка контрольной точки")
            header = orjson.loads(data[HEADER_KEY].tobytes())
            arrays = {name: data[name] for name in data.files if name != HEADER_KEY}
    except CheckpointError:
        raise
    except (zipfile.BadZipFile, ValueError, OSError, orjson.JSONDecodeError) as e:
        raise CheckpointError(f"Повреждённая контрольная точка {path}: {e}") from e

    version = header.get('version')
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"Версия контрольной точки {version} не поддерживается (ожидается {CHECKPOINT_VERSION})"
        )

    actor_state = {k.split('/', 1)[1]: v for k, v in arrays.items() if k.startswith('actor/')}
    critic_state = {k.split('/', 1)[1]: v for k, v in arrays.items() if k.startswith('critic/')}
    expected = header.get('layer_shapes', {})
    for name, shape in expected.items():
        owner, key = name.split('.', 1)
        state = actor_state if owner == 'actor' else critic_state
        if key not in state or list(state[key].shape) != shape:
            raise CheckpointError(f"Контрольная точка {path}: нет массива {name} формы {shape}")

    return Checkpoint(
        actor_state=actor_state,
        critic_state=critic_state,
        trpo=TrpoConfig(**header['trpo']),
        obs_dim=int(header['obs_dim']),
        act_dim=int(header['act_dim']),
        hidden=tuple(header['hidden']),
        initial_std=float(header['initial_std']),
        rng_state={k: int(v) for k, v in header.get('rng_state', {}).items()},
        config=header.get('config', {}),
        extra=header.get('extra', {}),
    )
