"""
Конфигурация запуска: плоский файл key=value с пространствами имён (physics., trpo., run., ...)

Файл разбирается через python-dotenv, поэтому синтаксис совпадает с .env (комментарии, кавычки).
Физические величины задаются в МГц/кГц/мкс и переводятся в рад/мкс только через utils.units.
"""
import difflib
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from .. import config as defaults
from ..agent.networks import HIDDEN_SIZES
from ..agent.trpo import TrpoConfig
from ..baselines.piecewise import PiecewiseConfig, PiecewiseMode
from ..baselines.target_env import TargetRamanEnv
from ..environment.gate_env import ActionMode, CnotGateEnv
from ..physics.params import PhysicalParams
from ..robustness.thermal import ThermalConfig
from ..utils.units import khz_to_rad_per_us, mhz_to_rad_per_us, nm_to_m

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Ошибка конфигурации запуска (неизвестный ключ, некорректное значение)"""


class RunMode(str, Enum):
    SYNCHRONOUS_IU = "synchronous-iu"
    SYNCHRONOUS_TU = "synchronous-tu"
    PIECEWISE_ADIABATIC_I = "piecewise-adiabatic-1"
    PIECEWISE_ADIABATIC_II = "piecewise-adiabatic-2"
    PIECEWISE_NON_ADIABATIC = "piecewise-nonadiabatic"

    @property
    def piecewise_mode(self) -> Optional[PiecewiseMode]:
        if not self.value.startswith("piecewise-"):
            return None
        return PiecewiseMode(self.value[len("piecewise-"):])

    @property
    def method(self) -> str:
        """Название метода для сводных таблиц"""
        if self is RunMode.SYNCHRONOUS_IU:
            return "IU-DRL"
        if self is RunMode.SYNCHRONOUS_TU:
            return "TU-DRL"
        return f"piecewise {self.piecewise_mode.value}"


# Число эпох по умолчанию: синхронная оптимизация и импульс мишени кусочного протокола
DEFAULT_EPOCHS = {
    RunMode.SYNCHRONOUS_IU: 25000,
    RunMode.SYNCHRONOUS_TU: 25000,
    RunMode.PIECEWISE_ADIABATIC_I: 15000,
    RunMode.PIECEWISE_ADIABATIC_II: 15000,
    RunMode.PIECEWISE_NON_ADIABATIC: 15000,
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"ожидается true/false, получено '{text}'")


def parse_float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_int_tuple(text: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def parse_optional_float(text: str) -> Optional[float]:
    return float(text) if text.strip() else None


def format_value(value: Any) -> str:
    """Обратное преобразование значения в текст файла конфигурации"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, Enum):
        return value.value
    return str(value)


@dataclass(frozen=True)
class ConfigKey:
    name: str
    parse: Callable[[str], Any]
    default: Any

    @property
    def short(self) -> str:
        return self.name.split(".", 1)[1]


_TRPO_DEFAULTS = TrpoConfig()

CONFIG_KEYS: Dict[str, ConfigKey] = {
    key.name: key
    for key in [
        ConfigKey("run.name", str, "experiment"),
        ConfigKey("run.mode", RunMode, RunMode.SYNCHRONOUS_IU),
        ConfigKey("run.epochs", int, None),
        ConfigKey("run.seed", int, defaults.SEED),
        ConfigKey("run.workers", int, defaults.MAX_WORKERS),
        ConfigKey("run.checkpoint_every", int, defaults.CHECKPOINT_EVERY),
        ConfigKey("run.output_dir", str, ""),
        ConfigKey("physics.omega_gl_mhz", float, defaults.OMEGA_GL_MHZ),
        ConfigKey("physics.delta_mhz", float, defaults.DELTA_MHZ),
        ConfigKey("physics.v0_mhz", float, defaults.V0_MHZ),
        ConfigKey("physics.gamma_e_mhz", float, defaults.GAMMA_E_MHZ),
        ConfigKey("physics.gamma_r_khz", float, defaults.GAMMA_R_KHZ),
        ConfigKey("physics.omega_c_max_mhz", float, defaults.OMEGA_C_MAX_MHZ),
        ConfigKey("physics.omega_t_max_mhz", float, defaults.OMEGA_T_MAX_MHZ),
        ConfigKey("physics.eta_e", float, defaults.ETA_E),
        ConfigKey("physics.eta_r", float, defaults.ETA_R),
        ConfigKey("physics.t_total_us", float, defaults.T_TOTAL_US),
        ConfigKey("physics.n_steps", int, defaults.N_STEPS),
        ConfigKey("physics.xi_omega", float, defaults.XI_OMEGA),
        ConfigKey("physics.xi_phi", float, defaults.XI_PHI),
        ConfigKey("physics.r0_um", float, defaults.R0_UM),
        ConfigKey("physics.trap_freq_khz", float, defaults.TRAP_FREQ_KHZ),
        ConfigKey("physics.lambda1_nm", float, defaults.LAMBDA1_NM),
        ConfigKey("physics.lambda2_nm", float, defaults.LAMBDA2_NM),
        ConfigKey("physics.substeps", int, defaults.PROPAGATOR_SUBSTEPS),
        ConfigKey("physics.cutoff_threshold", float, defaults.CUTOFF_THRESHOLD),
        ConfigKey("trpo.kl_bound", float, _TRPO_DEFAULTS.kl_bound),
        ConfigKey("trpo.discount", float, _TRPO_DEFAULTS.discount),
        ConfigKey("trpo.gae_lambda", float, _TRPO_DEFAULTS.gae_lambda),
        ConfigKey("trpo.episodes_per_update", int, _TRPO_DEFAULTS.episodes_per_update),
        ConfigKey("trpo.cg_iterations", int, _TRPO_DEFAULTS.cg_iterations),
        ConfigKey("trpo.cg_damping", float, _TRPO_DEFAULTS.cg_damping),
        ConfigKey("trpo.line_search_steps", int, _TRPO_DEFAULTS.line_search_steps),
        ConfigKey("trpo.line_search_shrink", float, _TRPO_DEFAULTS.line_search_shrink),
        ConfigKey("trpo.critic_epochs", int, _TRPO_DEFAULTS.critic_epochs),
        ConfigKey("trpo.critic_step_size", float, _TRPO_DEFAULTS.critic_step_size),
        ConfigKey("agent.hidden", parse_int_tuple, tuple(HIDDEN_SIZES)),
        ConfigKey("agent.initial_std", float, defaults.TRPO_INITIAL_STD),
        ConfigKey("piecewise.xi_omega", parse_optional_float, None),
        ConfigKey("piecewise.xi_phi", parse_optional_float, None),
        ConfigKey("piecewise.omega_t_max_mhz", parse_optional_float, None),
        ConfigKey("piecewise.t_total_us", parse_optional_float, None),
        ConfigKey("piecewise.n_steps", int, 100),
        ConfigKey("piecewise.t_sq_us", parse_optional_float, None),
        ConfigKey("thermal.temperatures_uk", parse_float_list, tuple(defaults.THERMAL_TEMPERATURES_UK)),
        ConfigKey("thermal.counter_propagating", parse_bool, False),
        ConfigKey("thermal.report_temperature_uk", float, defaults.REPORT_TEMPERATURE_UK),
        ConfigKey("thermal.monte_carlo_shots", int, defaults.MONTE_CARLO_SHOTS),
    ]
}


def _bare_aliases() -> Dict[str, str]:
    # Что: короткое имя ключа без пространства имён указывает на первый ключ с таким окончанием
    aliases: Dict[str, str] = {}
    for key in CONFIG_KEYS.values():
        aliases.setdefault(key.short, key.name)
    return aliases


BARE_ALIASES = _bare_aliases()


def resolve_key(key: str) -> Optional[str]:
    if key in CONFIG_KEYS:
        return key
    return BARE_ALIASES.get(key)


def nearest_key(key: str) -> Optional[str]:
    """Ближайший допустимый ключ для сообщения об ошибке"""
    candidates = list(CONFIG_KEYS) + list(BARE_ALIASES)
    matches = difflib.get_close_matches(key, candidates, n=1, cutoff=0.6)
    if not matches and "." in key:
        matches = difflib.get_close_matches(key.split(".", 1)[1], list(BARE_ALIASES), n=1, cutoff=0.6)
    if not matches:
        return None
    return resolve_key(matches[0])


def key_line_numbers(text: str, source: str = "<text>") -> Dict[str, int]:
    """
    Номер строки каждого ключа файла

    Raises:
        ConfigError: ключ встречается в файле повторно (с номером второй строки)
    """
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key = line.split("=", 1)[0].strip()
        if key.startswith("export "):
            key = key[len("export "):].strip()
        if key in lines:
            raise ConfigError(
                f"{_where(source, number)}: ключ '{key}' задан повторно (впервые в строке {lines[key]})"
            )
        lines[key] = number
    return lines


def _where(source: str, line: Optional[int]) -> str:
    return f"{source}, строка {line}" if line else source


@dataclass(frozen=True)
class RunConfig:
    """
    Разрешённая конфигурация запуска

    values: значения всех ключей CONFIG_KEYS в единицах файла (МГц, кГц, мкс)
    """
    values: Dict[str, Any]
    source: str = "<defaults>"
    explicit: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ConfigError(f"run.epochs не может быть отрицательным: {self.epochs}")
        if self.workers < 1:
            raise ConfigError(f"run.workers должен быть >= 1: {self.workers}")
        if not self.name or "/" in self.name:
            raise ConfigError(f"Некорректное имя эксперимента: '{self.name}'")

    @classmethod
    def from_mapping(
        cls,
        mapping: Mapping[str, Optional[str]],
        source: str = "<mapping>",
        lines: Optional[Dict[str, int]] = None,
    ) -> "RunConfig":
        """
        Разбор словаря key -> текст значения

        Raises:
            ConfigError: неизвестный ключ, повтор ключа или значение неверного типа
        """
        lines = lines or {}
        values = {name: key.default for name, key in CONFIG_KEYS.items()}
        explicit: List[str] = []
        for raw_key, raw_value in mapping.items():
            line = lines.get(raw_key)
            name = resolve_key(raw_key)
            if name is None:
                hint = nearest_key(raw_key)
                suggestion = f"; возможно, имелся в виду '{hint}'" if hint else ""
                raise ConfigError(f"{_where(source, line)}: неизвестный ключ '{raw_key}'{suggestion}")
            if name in explicit:
                raise ConfigError(f"{_where(source, line)}: ключ '{name}' задан повторно")
            text = "" if raw_value is None else str(raw_value)
            try:
                values[name] = CONFIG_KEYS[name].parse(text.strip())
            except ValueError as e:
                raise ConfigError(
                    f"{_where(source, line)}: некорректное значение '{text}' для ключа '{name}' ({e})"
                ) from e
            explicit.append(name)

        if values["run.epochs"] is None:
            values["run.epochs"] = DEFAULT_EPOCHS[values["run.mode"]]
        cfg = cls(values=values, source=source, explicit=tuple(explicit))
        # Что: проверяем, что все параметры собираются в валидные объекты
        try:
            cfg.physical_params()
            cfg.trpo_config()
            cfg.thermal_config()
            if cfg.mode.piecewise_mode is not None:
                cfg.piecewise_config()
        except ValueError as e:
            raise ConfigError(f"{source}: {e}") from e
        return cfg

    @classmethod
    def from_defaults(cls, **overrides: Any) -> "RunConfig":
        return cls.from_mapping({k: format_value(v) for k, v in overrides.items()}, source="<defaults>")

    @property
    def name(self) -> str:
        return self.values["run.name"]

    @property
    def mode(self) -> RunMode:
        return self.values["run.mode"]

    @property
    def epochs(self) -> int:
        return self.values["run.epochs"]

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    @property
    def workers(self) -> int:
        return self.values["run.workers"]

    @property
    def checkpoint_every(self) -> int:
        return self.values["run.checkpoint_every"]

    @property
    def output_dir(self) -> Optional[str]:
        return self.values["run.output_dir"] or None

    @property
    def substeps(self) -> int:
        return self.values["physics.substeps"]

    @property
    def cutoff_threshold(self) -> float:
        return self.values["physics.cutoff_threshold"]

    @property
    def hidden(self) -> Tuple[int, ...]:
        return self.values["agent.hidden"]

    @property
    def initial_std(self) -> float:
        return self.values["agent.initial_std"]

    def with_values(self, **overrides: Any) -> "RunConfig":
        """Копия с заменой значений по полным именам ключей (run__epochs -> run.epochs)"""
        mapping = {k: format_value(v) for k, v in self.values.items()}
        for key, value in overrides.items():
            mapping[key.replace("__", ".")] = format_value(value)
        return RunConfig.from_mapping(mapping, source=self.source)

    def physical_params(self) -> PhysicalParams:
        v = self.values
        return PhysicalParams(
            omega_gl=mhz_to_rad_per_us(v["physics.omega_gl_mhz"]),
            delta=mhz_to_rad_per_us(v["physics.delta_mhz"]),
            v0=mhz_to_rad_per_us(v["physics.v0_mhz"]),
            gamma_e=mhz_to_rad_per_us(v["physics.gamma_e_mhz"]),
            gamma_r=khz_to_rad_per_us(v["physics.gamma_r_khz"]),
            omega_c_max=mhz_to_rad_per_us(v["physics.omega_c_max_mhz"]),
            omega_t_max=mhz_to_rad_per_us(v["physics.omega_t_max_mhz"]),
            eta_e=v["physics.eta_e"],
            eta_r=v["physics.eta_r"],
            t_total=v["physics.t_total_us"],
            n_steps=v["physics.n_steps"],
            xi_omega=v["physics.xi_omega"],
            xi_phi=v["physics.xi_phi"],
            r0=v["physics.r0_um"],
            trap_omega=khz_to_rad_per_us(v["physics.trap_freq_khz"]),
            k1=2.0 * math.pi / nm_to_m(v["physics.lambda1_nm"]),
            k2=2.0 * math.pi / nm_to_m(v["physics.lambda2_nm"]),
        )

    def trpo_config(self) -> TrpoConfig:
        overrides = {
            key.short: self.values[name] for name, key in CONFIG_KEYS.items() if name.startswith("trpo.")
        }
        return TrpoConfig(seed=self.seed, **overrides)

    def piecewise_config(self) -> PiecewiseConfig:
        mode = self.mode.piecewise_mode
        if mode is None:
            raise ConfigError(f"Режим {self.mode.value} не относится к кусочным протоколам")
        v = self.values
        cfg = PiecewiseConfig.for_mode(mode, self.physical_params())
        overrides: Dict[str, Any] = {"n_steps": v["piecewise.n_steps"]}
        if v["piecewise.xi_omega"] is not None:
            overrides["xi_omega"] = v["piecewise.xi_omega"]
        if v["piecewise.xi_phi"] is not None:
            overrides["xi_phi"] = v["piecewise.xi_phi"]
        if v["piecewise.omega_t_max_mhz"] is not None:
            overrides["omega_t_max"] = mhz_to_rad_per_us(v["piecewise.omega_t_max_mhz"])
        if v["piecewise.t_total_us"] is not None:
            overrides["t_total"] = v["piecewise.t_total_us"]
        if v["piecewise.t_sq_us"] is not None:
            overrides["t_sq"] = v["piecewise.t_sq_us"]
        return cfg.with_overrides(**overrides)

    def thermal_config(self) -> ThermalConfig:
        v = self.values
        return ThermalConfig.from_params(
            self.physical_params(),
            temperatures_uk=v["thermal.temperatures_uk"],
            counter_propagating=v["thermal.counter_propagating"],
        )

    def env_factory(self) -> Callable[[], Any]:
        """Фабрика сред для обучения (без записи трасс)"""
        params = self.physical_params()
        substeps = self.substeps
        threshold = self.cutoff_threshold
        if self.mode.piecewise_mode is not None:
            pcfg = self.piecewise_config()
            return lambda: TargetRamanEnv(
                pcfg, params, substeps=substeps, cutoff_threshold=threshold, record_trace=False
            )
        action_mode = ActionMode.IU if self.mode is RunMode.SYNCHRONOUS_IU else ActionMode.TU
        return lambda: CnotGateEnv(
            params, mode=action_mode, substeps=substeps, cutoff_threshold=threshold, record_trace=False
        )

    def to_flat(self) -> Dict[str, str]:
        """Все разрешённые значения в текстовом виде (для манифеста и контрольных точек)"""
        return {name: format_value(self.values[name]) for name in CONFIG_KEYS}

    def to_text(self) -> str:
        return "".join(f"{name}={value}\n" for name, value in self.to_flat().items())


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    Чтение файла конфигурации запуска

    Raises:
        ConfigError: файл не найден или содержит ошибку (с номером строки)
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Файл конфигурации не найден: {path}")
    text = path.read_text(encoding="utf-8")
    lines = key_line_numbers(text, source=str(path))
    cfg = RunConfig.from_mapping(dotenv_values(stream=io.StringIO(text)), source=str(path), lines=lines)
    logger.info(f"Конфигурация {path}: режим {cfg.mode.value}, эпох {cfg.epochs}, seed {cfg.seed}")
    return cfg

