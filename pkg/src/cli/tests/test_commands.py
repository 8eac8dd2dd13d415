"""
Тесты команд CLI на коротких запусках
"""
import csv
import importlib.util
import io
from pathlib import Path

import orjson
import pytest

from ...physics.schedule import PulseSchedule, ScheduleFormatError
from ..commands import (
    REPORT_HEADER,
    cmd_eval,
    cmd_export_pulse,
    cmd_report,
    cmd_sweep_thermal,
    cmd_train,
)
from ..run_config import ConfigError, load_run_config
from ..run_store import (
    BEST_PULSE_FILE,
    CONFIG_FILE,
    MANIFEST_FILE,
    METRICS_FILE,
    PARTIAL_MARKER,
    TRAINING_LOG_FILE,
    RunDirectoryError,
)

TINY_CONFIG = """\
# короткий синхронный запуск
run.name=tiny
run.mode=synchronous-iu
run.epochs=4
run.seed=3
run.checkpoint_every=1
physics.t_total_us=0.02
physics.n_steps=5
trpo.episodes_per_update=2
trpo.critic_epochs=1
agent.hidden=8,8
thermal.temperatures_uk=1,10
"""

TINY_PIECEWISE = """\
run.name=tiny-piecewise
run.mode=piecewise-nonadiabatic
run.epochs=2
run.seed=5
piecewise.t_total_us=0.02
piecewise.n_steps=4
trpo.episodes_per_update=2
trpo.critic_epochs=1
agent.hidden=8
"""

ROOT = Path(__file__).resolve().parents[3]
REFERENCE_PULSE = ROOT / "configs" / "reference_pulse.csv"
REFERENCE_CONFIG = ROOT / "configs" / "reference.env"


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def read_csv(text: str):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def tiny_config(tmp_path):
    return write(tmp_path / "tiny.env", TINY_CONFIG)


@pytest.fixture
def zero_pulse(tmp_path, tiny_config):
    params = load_run_config(tiny_config).physical_params()
    return PulseSchedule.for_params(params).to_csv(tmp_path / "zero.csv")


class TestTrain:

    @pytest.mark.asyncio
    async def test_run_directory_contents(self, tmp_path, tiny_config):
        """
        Тест: после обучения в каталоге есть журнал, импульс, метрики, манифест и контрольные точки
        """
        run_dir = await cmd_train(tiny_config, output_root=tmp_path / "runs", show_progress=False)
        assert run_dir == tmp_path / "runs" / "tiny"
        log = read_csv((run_dir / TRAINING_LOG_FILE).read_text(encoding="utf-8"))
        assert len(log) == 5
        assert [row[0] for row in log[1:]] == ["1", "2", "3", "4"]
        for name in (BEST_PULSE_FILE, METRICS_FILE, MANIFEST_FILE, CONFIG_FILE):
            assert (run_dir / name).is_file()
        assert (run_dir / "checkpoints" / "checkpoint_000002.npz").is_file()
        assert (run_dir / "checkpoints" / "final.npz").is_file()
        assert not (run_dir / PARTIAL_MARKER).exists()

        metrics = orjson.loads((run_dir / METRICS_FILE).read_bytes())
        assert metrics['episodes'] == 4
        assert metrics['updates'] == 2
        assert metrics['summary']['method'] == "IU-DRL"
        assert 0.0 <= float(metrics['summary']['f_avg']) <= 1.0

        manifest = orjson.loads((run_dir / MANIFEST_FILE).read_bytes())
        assert manifest['config']['run.seed'] == "3"
        assert manifest['config']['physics.n_steps'] == "5"
        assert TRAINING_LOG_FILE in manifest['files']
        assert "checkpoints/final.npz" in manifest['files']

    @pytest.mark.asyncio
    async def test_reproducible(self, tmp_path, tiny_config):
        """
        Тест: одинаковая конфигурация даёт побайтно одинаковые журнал и импульс
        """
        first = await cmd_train(tiny_config, output_root=tmp_path / "a", show_progress=False)
        second = await cmd_train(tiny_config, output_root=tmp_path / "b", show_progress=False)
        for name in (TRAINING_LOG_FILE, BEST_PULSE_FILE, CONFIG_FILE):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    @pytest.mark.asyncio
    async def test_resume_matches_uninterrupted_run(self, tmp_path):
        """
        Тест: прерванное и продолженное с контрольной точки обучение даёт тот же журнал и импульс
        """
        long_config = write(tmp_path / "long.env", TINY_CONFIG.replace("run.epochs=4", "run.epochs=8"))
        short_config = write(tmp_path / "short.env", TINY_CONFIG.replace("run.epochs=4", "run.epochs=6"))
        full = await cmd_train(long_config, output_root=tmp_path / "full", show_progress=False)

        # Что: журнал прерванного запуска ушёл на две эпохи дальше контрольной точки
        interrupted = await cmd_train(short_config, output_root=tmp_path / "resumed", show_progress=False)
        assert len(read_csv((interrupted / TRAINING_LOG_FILE).read_text(encoding="utf-8"))) == 7
        checkpoint = interrupted / "checkpoints" / "checkpoint_000002.npz"

        resumed = await cmd_train(
            long_config, output_root=tmp_path / "resumed", resume=checkpoint, show_progress=False
        )
        assert resumed == interrupted
        log = read_csv((resumed / TRAINING_LOG_FILE).read_text(encoding="utf-8"))
        assert [row[0] for row in log[1:]] == [str(i) for i in range(1, 9)]
        for name in (TRAINING_LOG_FILE, BEST_PULSE_FILE):
            assert (resumed / name).read_bytes() == (full / name).read_bytes()

        metrics = orjson.loads((resumed / METRICS_FILE).read_bytes())
        assert metrics['episodes'] == 8
        assert metrics['updates'] == 4

    @pytest.mark.asyncio
    async def test_resume_past_configured_epochs(self, tmp_path, tiny_config):
        """
        Тест: контрольная точка после всех эпох конфигурации не запускает новых эпизодов
        """
        run_dir = await cmd_train(tiny_config, output_root=tmp_path / "runs", show_progress=False)
        before = (run_dir / TRAINING_LOG_FILE).read_bytes()
        await cmd_train(tiny_config, output_root=tmp_path / "runs",
                        resume=run_dir / "checkpoints" / "final.npz", show_progress=False)
        assert (run_dir / TRAINING_LOG_FILE).read_bytes() == before
        metrics = orjson.loads((run_dir / METRICS_FILE).read_bytes())
        assert metrics['episodes'] == 4

    @pytest.mark.asyncio
    async def test_unknown_key(self, tmp_path):
        config = write(tmp_path / "bad.env", "run.mode=synchronous-iu\nxi_omga=0.1\n")
        with pytest.raises(ConfigError, match="physics.xi_omega"):
            await cmd_train(config, output_root=tmp_path / "runs", show_progress=False)
        assert not (tmp_path / "runs").exists()

    @pytest.mark.asyncio
    async def test_piecewise_run(self, tmp_path):
        """
        Тест: для кусочного протокола время гейта включает квадратные π-импульсы
        """
        config = write(tmp_path / "pw.env", TINY_PIECEWISE)
        run_dir = await cmd_train(config, output_root=tmp_path / "runs", show_progress=False)
        metrics = orjson.loads((run_dir / METRICS_FILE).read_bytes())
        piecewise = metrics['piecewise']
        assert piecewise['protocol'] == "nonadiabatic"
        total = float(piecewise['tau_min_us']) + float(piecewise['t_sq_us'])
        assert float(metrics['summary']['tau_min_us']) == pytest.approx(total)
        assert float(piecewise['t_sq_us']) == pytest.approx(0.234, rel=0.03)


class TestReportAndExport:

    @pytest.mark.asyncio
    async def test_report_single_run(self, tmp_path, tiny_config):
        run_dir = await cmd_train(tiny_config, output_root=tmp_path, show_progress=False)
        rows = read_csv(await cmd_report([run_dir]))
        assert rows[0] == REPORT_HEADER
        assert len(rows) == 2
        assert rows[1][0] == "IU-DRL"
        assert rows[1][1] == "tiny"

        markdown = await cmd_report([run_dir], markdown=True)
        assert markdown.startswith("| method |")
        assert len(markdown.strip().split("\n")) == 3

    @pytest.mark.asyncio
    async def test_report_without_manifest(self, tmp_path):
        with pytest.raises(RunDirectoryError):
            await cmd_report([tmp_path])

    @pytest.mark.asyncio
    async def test_export_best_pulse(self, tmp_path, tiny_config):
        """
        Тест: экспорт лучшего импульса побайтно совпадает с записанным при обучении
        """
        run_dir = await cmd_train(tiny_config, output_root=tmp_path, show_progress=False)
        target = await cmd_export_pulse(run_dir, output=tmp_path / "out.csv")
        assert target.read_bytes() == (run_dir / BEST_PULSE_FILE).read_bytes()

    @pytest.mark.asyncio
    async def test_export_from_checkpoint(self, tmp_path, tiny_config):
        run_dir = await cmd_train(tiny_config, output_root=tmp_path, show_progress=False)
        target = await cmd_export_pulse(run_dir, checkpoint=run_dir / "checkpoints" / "final.npz")
        assert target == run_dir / "final_pulse.csv"
        schedule = PulseSchedule.from_csv(target)
        assert schedule.n_steps == 5

    @pytest.mark.asyncio
    async def test_export_missing_pulse(self, tmp_path):
        with pytest.raises(RunDirectoryError):
            await cmd_export_pulse(tmp_path)


class TestEval:

    @pytest.mark.asyncio
    async def test_zero_pulse(self, tmp_path, tiny_config, zero_pulse):
        """
        Тест: нулевой импульс не выполняет гейт, F_avg = 0.5, τ_min = 0
        """
        data = await cmd_eval(zero_pulse, config_path=tiny_config, output=tmp_path / "m.json")
        assert data['gate']['tau_min'] == 0.0
        assert float(data['summary']['f_avg']) == pytest.approx(0.5)
        written = orjson.loads((tmp_path / "m.json").read_bytes())
        assert written['summary'] == data['summary']

    @pytest.mark.asyncio
    async def test_reference_pulse(self):
        """
        Тест: опорный последовательный импульс выполняет CNOT с F_avg >= 0.99 и отсечкой после обратного π-импульса
        """
        data = await cmd_eval(REFERENCE_PULSE, REFERENCE_CONFIG)
        gate = data['gate']
        assert gate['tau_min'] == pytest.approx(0.47)
        assert float(data['summary']['f_avg']) >= 0.99
        assert all(float(f) >= 0.98 for f in gate['f_per_channel'])

    def test_reference_pulse_written_by_schedule(self):
        """
        Тест: файл опорного импульса совпадает с выводом PulseSchedule (17 значащих цифр)
        """
        text = REFERENCE_PULSE.read_text(encoding="utf-8")
        params = load_run_config(REFERENCE_CONFIG).physical_params()
        schedule = PulseSchedule.from_csv_text(text, dt=params.dt)
        assert schedule.n_steps == 240
        assert schedule.to_csv_text() == text
        schedule.validate_against(params)

    @pytest.mark.asyncio
    async def test_grid_mismatch(self, tmp_path, tiny_config):
        params = load_run_config(tiny_config).physical_params()
        short = PulseSchedule.zeros(4, params.dt).to_csv(tmp_path / "short.csv")
        with pytest.raises(ScheduleFormatError):
            await cmd_eval(short, config_path=tiny_config)

    @pytest.mark.asyncio
    async def test_malformed_row(self, tmp_path, tiny_config, zero_pulse):
        lines = zero_pulse.read_text(encoding="utf-8").splitlines()
        lines[2] = "1,0.004,abc,0,0,0"
        broken = write(tmp_path / "broken.csv", "\n".join(lines) + "\n")
        with pytest.raises(ScheduleFormatError, match="Строка 3"):
            await cmd_eval(broken, config_path=tiny_config)


class TestSweepThermal:

    @pytest.mark.asyncio
    async def test_zero_temperature(self, tmp_path, tiny_config, zero_pulse):
        text = await cmd_sweep_thermal(
            zero_pulse, temperatures=[0.0], config_path=tiny_config,
            output=tmp_path / "sweep.csv", show_progress=False,
        )
        rows = read_csv(text)
        assert len(rows) == 4
        assert all(float(row[5]) == 0.0 for row in rows[1:])
        assert (tmp_path / "sweep.csv").read_text(encoding="utf-8") == text

    @pytest.mark.asyncio
    async def test_reference_pulse_interaction(self):
        text = await cmd_sweep_thermal(
            REFERENCE_PULSE, effects=["interaction"], config_path=REFERENCE_CONFIG, show_progress=False
        )
        rows = read_csv(text)
        assert [row[0] for row in rows[1:]] == ["1", "10"]
        assert all(abs(float(row[5])) < 1e-5 for row in rows[1:])

    @pytest.mark.asyncio
    async def test_empty_temperatures(self, tiny_config, zero_pulse):
        with pytest.raises(ConfigError):
            await cmd_sweep_thermal(zero_pulse, temperatures=[], config_path=tiny_config)

    @pytest.mark.asyncio
    async def test_unknown_effect(self, tiny_config, zero_pulse):
        with pytest.raises(ConfigError):
            await cmd_sweep_thermal(zero_pulse, effects=["laser-noise"], config_path=tiny_config)


class TestMainExitCodes:

    def load_main(self, monkeypatch, tmp_path):
        monkeypatch.chdir(tmp_path)
        spec = importlib.util.spec_from_file_location("rydberg_main", ROOT / "main.py")
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        return module

    @pytest.mark.asyncio
    async def test_config_error_exit_code(self, tmp_path, monkeypatch):
        main = self.load_main(monkeypatch, tmp_path)
        config = write(tmp_path / "bad.env", "xi_omga=0.1\n")
        assert await main.main(["--no-progress", "train", str(config)]) == main.EXIT_CONFIG_ERROR

    @pytest.mark.asyncio
    async def test_missing_pulse_exit_code(self, tmp_path, monkeypatch):
        main = self.load_main(monkeypatch, tmp_path)
        assert await main.main(["eval", str(tmp_path / "missing.csv")]) == main.EXIT_CONFIG_ERROR

    @pytest.mark.asyncio
    async def test_eval_success(self, tmp_path, monkeypatch, tiny_config, zero_pulse):
        main = self.load_main(monkeypatch, tmp_path)
        code = await main.main([
            "eval", str(zero_pulse), "--config", str(tiny_config), "--output", str(tmp_path / "m.json"),
        ])
        assert code == main.EXIT_OK
        assert (tmp_path / "m.json").is_file()
