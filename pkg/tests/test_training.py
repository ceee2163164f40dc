import csv

import numpy as np
import pytest

from pesg import tensor as T
from pesg.config import TrainConfig
from pesg.model import forward, init_params, total_loss
from pesg.optim import AdagradState, adagrad_step
from pesg.params import read_checkpoint
from pesg.training import METRIC_FIELDS, TrainingDiverged, batch_indices, load_trained, train

from gradcheck import numeric_grad


class TestTotalLoss:
    def test_unit_weights_sum(self):
        assert total_loss(T.Tensor(1.0), T.Tensor(2.0), T.Tensor(3.0)).item() == 6.0

    def test_zero_weights_leave_sequence_loss(self):
        assert total_loss(T.Tensor(1.25), T.Tensor(2.0), T.Tensor(3.0), 0.0, 0.0).item() == 1.25

    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.epsilon, cfg.eta) == (1.0, 1.0)

    def test_nan_component_aborts(self):
        with pytest.raises(FloatingPointError, match="L_l"):
            total_loss(T.Tensor(1.0), T.Tensor(np.nan), T.Tensor(3.0))


class TestForward:
    def test_zero_weights_equal_sequence_loss_exactly(self, tiny):
        _, vocab, cfg, examples = tiny
        params = init_params(cfg, len(vocab))
        res = forward(params, examples[0], cfg.replace(epsilon=0.0, eta=0.0))
        assert res.loss.item() == res.L_s.item()

    def test_checker_loss_reaches_decoder(self, tiny):
        _, vocab, cfg, examples = tiny
        params = init_params(cfg, len(vocab))
        w = params["dec.U"]

        def L_l():
            with T.no_grad():
                return forward(params, examples[0], cfg).scores.L_l.item()

        sens = numeric_grad(L_l, w.data)
        assert np.abs(sens).max() > 1e-8

    def test_dropout_only_in_training(self, tiny):
        _, vocab, cfg, examples = tiny
        params = init_params(cfg, len(vocab))
        a = forward(params, examples[1], cfg).loss.item()
        b = forward(params, examples[1], cfg, np.random.default_rng(0)).loss.item()
        c = forward(params, examples[1], cfg, np.random.default_rng(0), training=True).loss.item()
        assert a == b != c


class TestTrain:
    def test_zero_steps_writes_initial_checkpoint_only(self, tiny, tmp_path):
        _, vocab, cfg, examples = tiny
        res = train(cfg.replace(steps=0), examples, len(vocab), tmp_path)
        assert [p.name for p in res.checkpoints] == ["step_000000.ckpt"]
        assert read_checkpoint(res.checkpoints[0])[2] == 0

    def test_same_seed_bit_identical_logs(self, tiny):
        _, vocab, cfg, examples = tiny
        a = train(cfg, examples, len(vocab)).logs
        b = train(cfg, examples, len(vocab)).logs
        assert a == b

    def test_metrics_and_checkpoints(self, tiny, tmp_path):
        _, vocab, cfg, examples = tiny
        res = train(cfg, examples, len(vocab), tmp_path)
        with open(tmp_path / "metrics.csv") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == METRIC_FIELDS and len(rows) == cfg.steps + 1
        assert [float(v) for v in rows[1][1:]] == [res.logs[0][k] for k in METRIC_FIELDS[1:]]
        assert [p.name for p in res.checkpoints] == [f"step_{s:06d}.ckpt" for s in (0, 2, 4)]

    def test_resume_continues_identically(self, tiny, tmp_path):
        _, vocab, cfg, examples = tiny
        full = train(cfg, examples, len(vocab), tmp_path / "full")
        half = train(cfg.replace(steps=2), examples, len(vocab), tmp_path / "half")
        rest = train(cfg.replace(steps=2), examples, len(vocab), tmp_path / "half", resume_from=half.checkpoints[-1])
        assert rest.step == 4
        assert rest.logs == full.logs[2:]
        for k in full.params:
            assert rest.params[k].data.tobytes() == full.params[k].data.tobytes()

    def test_load_trained(self, tiny, tmp_path):
        _, vocab, cfg, examples = tiny
        res = train(cfg.replace(steps=1), examples, len(vocab), tmp_path)
        params, cfg2, step = load_trained(res.checkpoints[-1])
        assert step == 1 and cfg2 == cfg.replace(steps=1)
        assert all(params[k].data.tobytes() == res.params[k].data.tobytes() for k in params)

    def test_small_step_does_not_increase_loss(self, tiny):
        _, vocab, cfg, examples = tiny
        cfg = cfg.replace(keep_prob=1.0)
        params = init_params(cfg, len(vocab))
        batch = examples[:2]

        def batch_loss():
            return T.stack([forward(params, ex, cfg).loss for ex in batch]).mean()

        loss = batch_loss()
        before = loss.item()
        T.backward(loss)
        adagrad_step(params, AdagradState.for_params(params, lr=1e-3), cfg.clip)
        with T.no_grad():
            assert batch_loss().item() - before <= 0

    @pytest.mark.filterwarnings("ignore:overflow encountered")
    def test_divergence_is_reported(self, tiny, tmp_path):
        _, vocab, cfg, examples = tiny
        bad = cfg.replace(lr=1e200, steps=3)
        with pytest.raises(TrainingDiverged):
            train(bad, examples, len(vocab), tmp_path)
        assert (tmp_path / "checkpoints" / "step_000000.ckpt").exists()

    def test_empty_corpus(self, tiny):
        with pytest.raises(ValueError):
            train(tiny[2], [], 10)


class TestBatches:
    def test_each_epoch_is_a_permutation(self):
        seen = [i for s in range(5) for i in batch_indices(s, 10, 2, 0)]
        assert sorted(seen) == list(range(10))

    def test_depends_only_on_step(self):
        assert batch_indices(7, 13, 4, 3) == batch_indices(7, 13, 4, 3)
        assert batch_indices(0, 13, 4, 3) != batch_indices(0, 13, 4, 4)


class TestConfig:
    def test_hops_range(self):
        with pytest.raises(ValueError):
            TrainConfig(hops=9)

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="bogus"):
            TrainConfig.from_dict({"bogus": 1})

    def test_round_trip(self):
        cfg = TrainConfig.toy(hops=2)
        assert TrainConfig.from_dict(cfg.to_dict()) == cfg

    def test_full_scale_defaults(self):
        cfg = TrainConfig()
        assert (cfg.embedding_dim, cfg.hidden, cfg.batch_size, cfg.keep_prob, cfg.clip, cfg.beam) == \
            (256, 256, 64, 0.7, (-5.0, 5.0), 5)
        assert (cfg.max_src, cfg.max_tgt, cfg.hops, cfg.lr) == (250, 100, 3, 0.15)
