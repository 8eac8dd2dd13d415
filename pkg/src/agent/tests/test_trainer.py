"""
Тесты цикла обучения: журнал, воспроизводимость, продолжение с контрольной точки
"""
import numpy as np
import pytest

from ...environment.metrics import GateMetrics
from ..checkpoint import load_checkpoint
from ..rollout import collect_batch, deterministic_rollout
from ..trainer import TRAINING_LOG_HEADER, Trainer, train
from ..trpo import TrpoConfig
from .toy_env import CountdownEnv, QuadraticBanditEnv


def small_trainer(**kwargs) -> Trainer:
    trpo = TrpoConfig(kl_bound=0.02, episodes_per_update=5, critic_epochs=2, seed=21)
    return Trainer(lambda: CountdownEnv(n_steps=4), trpo, hidden=(8, 8), show_progress=False, **kwargs)


class TestTrainingLoop:

    def test_zero_epochs(self):
        result = small_trainer().train(0)
        assert result.log == []
        assert result.updates == 0
        assert result.log_csv_text() == ",".join(TRAINING_LOG_HEADER) + "\n"

    def test_negative_epochs(self):
        with pytest.raises(ValueError):
            small_trainer().train(-1)

    def test_log_rows_and_updates(self):
        result = small_trainer().train(12)
        assert [row.epoch for row in result.log] == list(range(1, 13))
        assert result.updates == 2
        assert result.episodes == 12
        lines = result.log_csv_text().strip().split("\n")
        assert lines[0] == ",".join(TRAINING_LOG_HEADER)
        assert len(lines) == 13

    def test_two_runs_identical(self):
        a = small_trainer().train(10)
        b = small_trainer().train(10)
        assert a.log == b.log

    def test_workers_do_not_change_result(self):
        a = small_trainer(workers=1).train(10)
        b = small_trainer(workers=3).train(10)
        assert a.log == b.log

    def test_resume_reproduces_log(self, tmp_path):
        """
        Тест: продолжение с контрольной точки даёт тот же журнал, что и непрерывный прогон
        """
        full = small_trainer(checkpoint_dir=tmp_path, checkpoint_every=2).train(20)
        checkpoint = load_checkpoint(tmp_path / "checkpoint_000002.npz")
        assert checkpoint.rng_state == {'seed': 21, 'episodes': 10, 'updates': 2}

        resumed = Trainer(lambda: CountdownEnv(n_steps=4), hidden=(8, 8), show_progress=False,
                          checkpoint=checkpoint)
        tail = resumed.train(10)
        assert tail.log == full.log[10:]

    def test_best_metrics_survive_checkpoint(self, tmp_path):
        """
        Тест: метрики лучшего импульса восстанавливаются из заголовка контрольной точки
        """
        trainer = small_trainer()
        best = GateMetrics(
            tau_min=0.336, f_avg=0.9991034, f_per_channel=(1.0, 0.99999, 0.9982, 0.99821),
            gamma_e_te=2.72e-4, gamma_r_tr=3.31e-4, reward_total=2.9, f_avg_full=0.998,
        )
        trainer.result.best_metrics = best
        trainer.result.best_f_avg = best.f_avg
        trainer._mark_boundary()
        trainer.save(tmp_path / "best.npz")

        checkpoint = load_checkpoint(tmp_path / "best.npz")
        assert checkpoint.extra['best_metrics']['f_avg'] == best.f_avg
        resumed = Trainer(lambda: CountdownEnv(n_steps=4), hidden=(8, 8), show_progress=False,
                          checkpoint=checkpoint)
        assert resumed.result.best_metrics == best
        assert resumed.result.best_f_avg == best.f_avg

    def test_checkpoint_without_best_metrics(self, tmp_path):
        small_trainer(checkpoint_dir=tmp_path, checkpoint_every=1).train(5)
        checkpoint = load_checkpoint(tmp_path / "final.npz")
        assert checkpoint.extra['best_metrics'] is None
        resumed = Trainer(lambda: CountdownEnv(n_steps=4), hidden=(8, 8), show_progress=False,
                          checkpoint=checkpoint)
        assert resumed.result.best_metrics is None

    def test_final_checkpoint_at_update_boundary(self, tmp_path):
        small_trainer(checkpoint_dir=tmp_path, checkpoint_every=100).train(8)
        checkpoint = load_checkpoint(tmp_path / "final.npz")
        assert checkpoint.rng_state['episodes'] == 5
        assert checkpoint.rng_state['updates'] == 1

    def test_failed_episodes_are_discarded(self):
        trpo = TrpoConfig(episodes_per_update=2, seed=1)
        trainer = Trainer(lambda: QuadraticBanditEnv(fail=True), trpo, hidden=(4,), show_progress=False)
        result = trainer.train(4)
        assert result.discarded == 4
        assert result.updates == 0
        assert result.log == []

    def test_collect_batch_keeps_order(self):
        trainer = small_trainer()
        batch = collect_batch(lambda: CountdownEnv(n_steps=4), trainer.ac, seed=21,
                              episode_indices=[3, 1, 2], workers=2)
        assert [t.episode_index for t in batch] == [3, 1, 2]


class TestConvergence:

    def test_bandit_mean_approaches_target(self):
        """
        Тест: на одношаговой квадратичной задаче среднее политики сходится к оптимуму
        """
        trpo = TrpoConfig(kl_bound=0.05, episodes_per_update=20, critic_epochs=5, seed=4)
        trainer = Trainer(lambda: QuadraticBanditEnv(target=0.5), trpo, hidden=(8,),
                          show_progress=False)
        trainer.train(1000)
        mean = trainer.ac.actor.distribution(np.ones(1)).mean[0]
        assert abs(mean - 0.5) < 0.2
        rollout = deterministic_rollout(trainer.ac, QuadraticBanditEnv(target=0.5))
        assert rollout.total_reward > -0.04

    def test_module_level_train(self):
        result = train(lambda: QuadraticBanditEnv(), TrpoConfig(episodes_per_update=2, seed=2), 4,
                       hidden=(4,), show_progress=False)
        assert result.updates == 2
