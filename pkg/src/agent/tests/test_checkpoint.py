"""
Тесты контрольных точек
"""
import numpy as np
import orjson
import pytest
import torch

from ..checkpoint import HEADER_KEY, CheckpointError, load_checkpoint, save_checkpoint
from ..networks import make_actor_critic
from ..trpo import TrpoConfig


class TestCheckpoint:

    def setup_method(self):
        self.ac = make_actor_critic(24, 4, seed=17)
        self.trpo = TrpoConfig(kl_bound=0.02, seed=17)
        self.rng_state = {'seed': 17, 'episodes': 40, 'updates': 2}

    def test_round_trip_is_bitwise(self, tmp_path):
        path = save_checkpoint(tmp_path / "c.npz", self.ac, self.trpo, self.rng_state,
                               config={'seed': 17}, extra={'best_f_avg': 0.5})
        loaded = load_checkpoint(path)
        restored = loaded.build_actor_critic()
        for module, other in ((self.ac.actor, restored.actor), (self.ac.critic, restored.critic)):
            for (name, a), (_, b) in zip(module.state_dict().items(), other.state_dict().items()):
                assert torch.equal(a, b), name
        assert loaded.trpo == self.trpo
        assert loaded.rng_state == self.rng_state
        assert loaded.config == {'seed': 17}
        assert loaded.extra['best_f_avg'] == 0.5
        assert loaded.hidden == (156, 48, 16)

    def test_same_outputs_after_restore(self, tmp_path):
        path = save_checkpoint(tmp_path / "c.npz", self.ac, self.trpo, self.rng_state)
        restored = load_checkpoint(path).build_actor_critic()
        obs = np.linspace(0, 1, 24)
        np.testing.assert_array_equal(
            self.ac.actor.distribution(obs).mean, restored.actor.distribution(obs).mean
        )
        assert self.ac.critic.value(obs) == restored.critic.value(obs)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "нет.npz")

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.npz"
        path.write_bytes(b"definitely not an archive")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "old.npz"
        header = orjson.dumps({'version': 99})
        with open(path, 'wb') as fh:
            np.savez(fh, **{HEADER_KEY: np.frombuffer(header, dtype=np.uint8)})
        with pytest.raises(CheckpointError, match="99"):
            load_checkpoint(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "noheader.npz"
        with open(path, 'wb') as fh:
            np.savez(fh, weights=np.zeros(3))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
