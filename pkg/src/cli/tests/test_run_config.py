"""
Тесты разбора конфигурации запуска
"""
import math

import pytest

from ...agent.trpo import TrpoConfig
from ...baselines.piecewise import PiecewiseMode
from ...baselines.target_env import TargetRamanEnv
from ...environment.gate_env import ActionMode, CnotGateEnv
from ...physics.params import default_params
from ..run_config import (
    CONFIG_KEYS,
    DEFAULT_EPOCHS,
    ConfigError,
    RunConfig,
    RunMode,
    key_line_numbers,
    load_run_config,
    nearest_key,
)


def write_config(tmp_path, text: str):
    path = tmp_path / "run.env"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadRunConfig:

    def test_minimal_bare_keys(self, tmp_path):
        path = write_config(tmp_path, "mode=synchronous-iu\nepochs=10\nseed=1\n")
        cfg = load_run_config(path)
        assert cfg.mode is RunMode.SYNCHRONOUS_IU
        assert cfg.epochs == 10
        assert cfg.seed == 1

    def test_dotted_keys_and_comments(self, tmp_path):
        text = (
            "# синхронный режим с другой отстройкой\n"
            "run.name=case-v\n"
            "run.mode=synchronous-tu\n"
            "physics.delta_mhz=7000\n"
            "trpo.kl_bound=0.02  # шире доверительная область\n"
            'agent.hidden="32,16"\n'
        )
        cfg = load_run_config(write_config(tmp_path, text))
        assert cfg.name == "case-v"
        assert cfg.physical_params().delta == pytest.approx(2 * math.pi * 7000)
        assert cfg.trpo_config().kl_bound == 0.02
        assert cfg.hidden == (32, 16)

    def test_defaults_inherited(self, tmp_path):
        cfg = load_run_config(write_config(tmp_path, "run.mode=synchronous-iu\n"))
        assert cfg.physical_params() == default_params()
        assert cfg.epochs == DEFAULT_EPOCHS[RunMode.SYNCHRONOUS_IU]
        assert cfg.trpo_config() == TrpoConfig(seed=cfg.seed)

    def test_unknown_key_names_nearest(self, tmp_path):
        path = write_config(tmp_path, "run.mode=synchronous-iu\nxi_omga=0.05\n")
        with pytest.raises(ConfigError) as exc:
            load_run_config(path)
        message = str(exc.value)
        assert "xi_omga" in message
        assert "physics.xi_omega" in message
        assert "строка 2" in message

    def test_bad_value_has_line(self, tmp_path):
        path = write_config(tmp_path, "run.epochs=десять\n")
        with pytest.raises(ConfigError, match="строка 1"):
            load_run_config(path)

    def test_invalid_mode(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_config(tmp_path, "run.mode=grape\n"))

    def test_invalid_physics(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(write_config(tmp_path, "physics.xi_omega=1.5\n"))

    def test_duplicate_through_alias(self, tmp_path):
        with pytest.raises(ConfigError, match="повторно"):
            load_run_config(write_config(tmp_path, "run.seed=1\nseed=2\n"))

    def test_repeated_full_key(self, tmp_path):
        """
        Тест: повтор полного ключа не перезаписывает значение молча, а указывает вторую строку
        """
        path = write_config(tmp_path, "run.seed=1\nrun.epochs=3\n\nrun.seed=2\n")
        with pytest.raises(ConfigError, match="повторно") as excinfo:
            load_run_config(path)
        message = str(excinfo.value)
        assert "строка 4" in message
        assert "run.seed" in message

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "nope.env")


class TestRunConfigRoundTrip:

    def test_text_round_trip(self, tmp_path):
        cfg = RunConfig.from_defaults(**{"run.mode": "piecewise-nonadiabatic", "run.epochs": 7})
        first = cfg.to_text()
        again = load_run_config(write_config(tmp_path, first))
        assert again.to_text() == first
        assert again.values == cfg.values

    def test_flat_covers_every_key(self):
        flat = RunConfig.from_defaults().to_flat()
        assert list(flat) == list(CONFIG_KEYS)
        assert all(isinstance(v, str) for v in flat.values())

    def test_with_values(self):
        cfg = RunConfig.from_defaults().with_values(run__workers=3)
        assert cfg.workers == 3


class TestRunConfigObjects:

    def test_synchronous_env_factory(self):
        cfg = RunConfig.from_defaults(**{"run.mode": "synchronous-tu"})
        env = cfg.env_factory()()
        assert isinstance(env, CnotGateEnv)
        assert env.mode is ActionMode.TU
        assert not env.record_trace

    def test_piecewise_env_factory(self):
        cfg = RunConfig.from_defaults(**{"run.mode": "piecewise-adiabatic-2", "piecewise.n_steps": 10})
        assert cfg.mode.piecewise_mode is PiecewiseMode.ADIABATIC_II
        env = cfg.env_factory()()
        assert isinstance(env, TargetRamanEnv)
        assert env.params.n_steps == 10
        assert env.params.t_total == 2.0

    def test_piecewise_overrides(self):
        cfg = RunConfig.from_defaults(**{
            "run.mode": "piecewise-nonadiabatic",
            "piecewise.xi_omega": 0.05,
            "piecewise.t_sq_us": 0.25,
        })
        pcfg = cfg.piecewise_config()
        assert pcfg.xi_omega == 0.05
        assert pcfg.xi_phi == 0.1
        assert pcfg.t_sq == 0.25

    def test_piecewise_config_requires_piecewise_mode(self):
        with pytest.raises(ConfigError):
            RunConfig.from_defaults().piecewise_config()

    def test_thermal_config(self):
        cfg = RunConfig.from_defaults(**{
            "thermal.temperatures_uk": "1,5",
            "thermal.counter_propagating": "yes",
        })
        thermal = cfg.thermal_config()
        assert thermal.temperatures_uk == (1.0, 5.0)
        assert thermal.counter_propagating

    def test_thermal_wavevectors_follow_physics(self):
        """
        Тест: волновые векторы теплового анализа берутся из физических параметров
        """
        cfg = RunConfig.from_defaults(**{"physics.lambda1_nm": "480", "physics.trap_freq_khz": "50"})
        params = cfg.physical_params()
        thermal = cfg.thermal_config()
        assert thermal.k1 == params.k1
        assert thermal.k2 == params.k2
        assert thermal.trap_omega == params.trap_omega
        assert thermal.delta_k == pytest.approx(2 * math.pi / 480e-9 - 2 * math.pi / 1013e-9)

    def test_wavelengths_out_of_order(self):
        with pytest.raises(ConfigError):
            RunConfig.from_defaults(**{"physics.lambda1_nm": "1100"})

    def test_method_names(self):
        assert RunMode.SYNCHRONOUS_IU.method == "IU-DRL"
        assert RunMode.SYNCHRONOUS_TU.method == "TU-DRL"
        assert RunMode.PIECEWISE_ADIABATIC_I.method == "piecewise adiabatic-1"


class TestHelpers:

    def test_line_numbers(self):
        text = "# комментарий\n\nrun.seed=3\nexport run.name=x\n"
        assert key_line_numbers(text) == {"run.seed": 3, "run.name": 4}

    def test_line_numbers_reject_repeats(self):
        with pytest.raises(ConfigError, match="строка 3"):
            key_line_numbers("run.seed=1\n# снова\nrun.seed=1\n", source="run.env")

    def test_nearest_dotted(self):
        assert nearest_key("trpo.kl_bond") == "trpo.kl_bound"

    def test_nothing_close(self):
        assert nearest_key("zzzzzz") is None
