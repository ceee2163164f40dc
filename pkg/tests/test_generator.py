import math
import warnings

import numpy as np
import pytest

from pesg import tensor as T
from pesg.config import TrainConfig
from pesg.generator import (DecoderRecurrence, decode_step, doc_attention, dynamic_attention, editing_gate,
                            final_distribution, init_decoder, mix_contexts, project_keys, sequence_loss,
                            target_probability)
from pesg.model import init_params


def attn_params(ctx, Hd, v=None, rng=None):
    rng = rng or np.random.default_rng(0)
    return {"attn.W_a": T.Tensor(rng.normal(size=(ctx, Hd))), "attn.U_a": T.Tensor(rng.normal(size=(Hd, Hd))),
            "attn.b_a": T.Tensor(rng.normal(size=Hd)),
            "attn.v": T.Tensor(rng.normal(size=Hd) if v is None else v)}


class TestInitDecoder:
    def test_zero_weights_give_bias(self):
        d0 = init_decoder(T.Tensor([1.0, 2.0]), T.Tensor(np.ones((3, 2))), T.Tensor(np.zeros((4, 3))),
                          T.Tensor([0.1, 0.2, 0.3]))
        np.testing.assert_array_equal(d0.data, [0.1, 0.2, 0.3])

    def test_zero_pattern(self):
        rng = np.random.default_rng(1)
        h, W, b = rng.normal(size=2), rng.normal(size=(4, 3)), rng.normal(size=3)
        d0 = init_decoder(T.Tensor(h), T.Tensor(np.zeros((5, 2))), T.Tensor(W), T.Tensor(b))
        np.testing.assert_allclose(d0.data, h @ W[:2] + b, atol=1e-15)

    def test_scalar_hand(self):
        d0 = init_decoder(T.Tensor([2.0]), T.Tensor([[1.0], [3.0]]), T.Tensor([[0.5], [2.0]]), T.Tensor([1.0]))
        assert d0.data.tolist() == [10.0]


class TestDocAttention:
    def test_equal_scores_average_states(self):
        h_x = T.Tensor(np.random.default_rng(2).normal(size=(4, 2)))
        p = attn_params(2, 3, v=np.zeros(3))
        g, a = doc_attention(T.Tensor(np.ones(3)), h_x, project_keys(h_x, p), p)
        np.testing.assert_allclose(a.data, 0.25)
        np.testing.assert_allclose(g.data, h_x.data.mean(axis=0), atol=1e-15)

    def test_dominant_score_selects_state(self):
        h_x = T.Tensor([[1.0], [5.0]])
        p = {"attn.W_a": T.Tensor([[1.0]]), "attn.U_a": T.Tensor([[0.0]]), "attn.b_a": T.Tensor([-3.0]),
             "attn.v": T.Tensor([100.0])}
        g, a = doc_attention(T.Tensor([0.0]), h_x, project_keys(h_x, p), p)
        assert a.data[1] > 1 - 1e-12 and g.data[0] == pytest.approx(5.0)

    def test_two_position_hand(self):
        h_x = np.array([[0.5], [-1.0]])
        p = {"attn.W_a": T.Tensor([[2.0]]), "attn.U_a": T.Tensor([[1.0]]), "attn.b_a": T.Tensor([0.0]),
             "attn.v": T.Tensor([1.5])}
        d = 0.3
        e = [1.5 * math.tanh(2.0 * x + d) for x in h_x[:, 0]]
        w = [math.exp(v) / sum(math.exp(u) for u in e) for v in e]
        g, a = doc_attention(T.Tensor([d]), T.Tensor(h_x), project_keys(T.Tensor(h_x), p), p)
        np.testing.assert_allclose(a.data, w, atol=1e-15)
        assert g.data[0] == pytest.approx(w[0] * 0.5 - w[1], abs=1e-15)


class TestDynamicAttention:
    def test_single_vector(self):
        v = T.Tensor([[1.0, -2.0]])
        g, delta = dynamic_attention(T.Tensor([0.3, 0.1, 0.0]), v, T.Tensor(np.ones((2, 3))))
        assert delta.data.tolist() == [1.0]
        np.testing.assert_array_equal(g.data, v.data[0])

    def test_zero_bilinear_is_uniform(self):
        _, delta = dynamic_attention(T.Tensor([1.0, 2.0]), T.Tensor(np.arange(6.0).reshape(3, 2)),
                                     T.Tensor(np.zeros((2, 2))))
        np.testing.assert_allclose(delta.data, 1 / 3)

    def test_two_vector_hand(self):
        V = np.array([[1.0, 0.0], [0.0, 2.0]])
        W = np.array([[1.0], [0.5]])
        d = 0.8
        s = [V[0] @ W[:, 0] * d, V[1] @ W[:, 0] * d]
        w = np.exp(s) / np.exp(s).sum()
        g, delta = dynamic_attention(T.Tensor([d]), T.Tensor(V), T.Tensor(W))
        np.testing.assert_allclose(delta.data, w, atol=1e-15)
        np.testing.assert_allclose(g.data, w @ V, atol=1e-15)

    def test_row_batch_matches_single(self):
        rng = np.random.default_rng(3)
        D, V, W = rng.normal(size=(3, 2)), rng.normal(size=(4, 5)), rng.normal(size=(5, 2))
        g, _ = dynamic_attention(T.Tensor(D), T.Tensor(V), T.Tensor(W))
        for i in range(3):
            np.testing.assert_allclose(g.data[i], dynamic_attention(T.Tensor(D[i]), T.Tensor(V), T.Tensor(W))[0].data,
                                       atol=1e-14)


class TestGate:
    def test_zero_is_half(self):
        assert editing_gate(T.Tensor([1.0, 2.0]), T.Tensor([0.0, 0.0]), T.Tensor(0.0)).item() == 0.5

    def test_large_bias_saturates(self):
        assert editing_gate(T.Tensor([1.0]), T.Tensor([0.0]), T.Tensor(40.0)).item() == pytest.approx(1.0)

    def test_hand(self):
        out = editing_gate(T.Tensor([1.0, -2.0]), T.Tensor([0.5, 0.25]), T.Tensor(0.3)).item()
        assert out == pytest.approx(1 / (1 + math.exp(-0.3)), abs=1e-15)

    def test_swap_contexts(self):
        rng = np.random.default_rng(4)
        gam, gm, gs = rng.uniform(size=2), rng.normal(size=(2, 3)), rng.normal(size=(2, 3))
        a = mix_contexts(T.Tensor(gam), T.Tensor(gm), T.Tensor(gs)).data
        b = mix_contexts(T.Tensor(1 - gam), T.Tensor(gs), T.Tensor(gm)).data
        np.testing.assert_allclose(a[:, :3], b[:, 3:], atol=1e-15)
        np.testing.assert_allclose(a[:, 3:], b[:, :3], atol=1e-15)


class TestPointer:
    P_v = T.Tensor([[0.1, 0.2, 0.3, 0.4]])

    def test_full_generation(self):
        out = final_distribution(self.P_v, T.Tensor([1.0]), T.Tensor([[0.5, 0.5]]), [1, 5], 6)
        np.testing.assert_array_equal(out.data, [[0.1, 0.2, 0.3, 0.4, 0.0, 0.0]])

    def test_full_copy_of_repeated_token(self):
        out = final_distribution(self.P_v, T.Tensor([0.0]), T.Tensor([[0.2, 0.3, 0.5]]), [4, 4, 4], 5)
        np.testing.assert_array_equal(out.data, [[0, 0, 0, 0, 1.0]])

    def test_half_blend(self):
        out = final_distribution(self.P_v, T.Tensor([0.5]), T.Tensor([[0.25, 0.75]]), [2, 4], 5)
        np.testing.assert_allclose(out.data, [[0.05, 0.1, 0.15 + 0.125, 0.2, 0.375]], atol=1e-15)

    def test_corrupt_extended_id(self):
        with pytest.raises(IndexError):
            final_distribution(self.P_v, T.Tensor([0.5]), T.Tensor([[1.0]]), [7], 5)

    def test_target_probability_matches_gather(self):
        rng = np.random.default_rng(5)
        P = T.softmax(T.Tensor(rng.normal(size=(3, 4))), axis=1)
        p_gen = T.Tensor(rng.uniform(size=3))
        attn = T.softmax(T.Tensor(rng.normal(size=(3, 3))), axis=1)
        src, targets = [2, 5, 5], [5, 2, 0]
        full = final_distribution(P, p_gen, attn, src, 6).data
        got = target_probability(P, p_gen, attn, src, targets).data
        np.testing.assert_allclose(got, full[np.arange(3), targets], atol=1e-15)


class TestSequenceLoss:
    def test_perfect(self):
        total, per = sequence_loss(T.Tensor([1.0, 1.0]))
        assert total.item() == 0.0 and per.item() == 0.0

    def test_uniform_four(self):
        total, _ = sequence_loss(T.Tensor([0.25]))
        assert total.item() == pytest.approx(math.log(4), abs=1e-15)

    def test_fully_masked(self):
        total, per = sequence_loss(T.Tensor([0.1, 0.2]), [0, 0])
        assert total.item() == 0.0 and per.item() == 0.0

    def test_masked_positions_ignored(self):
        total, per = sequence_loss(T.Tensor([0.5, 1e-30]), [1, 0])
        assert total.item() == pytest.approx(math.log(2)) and per.item() == pytest.approx(math.log(2))

    def test_zero_probability_clamped_with_warning(self):
        with pytest.warns(RuntimeWarning, match="clamped"):
            total, _ = sequence_loss(T.Tensor([0.0]))
        assert total.item() == pytest.approx(-math.log(1e-12))

    def test_floored_target_keeps_its_gradient(self):
        p = T.parameter([1e-20, 0.5])
        with pytest.warns(RuntimeWarning):
            total, _ = sequence_loss(p)
        T.backward(total)
        assert p.grad.tolist() == [-1e12, -2.0]


def test_decode_step_invariants():
    cfg = TrainConfig.toy(embedding_dim=4, hidden=3, vocab_size=15)
    params = init_params(cfg, 15, seed=2)
    rng = np.random.default_rng(6)
    h_x = T.Tensor(rng.normal(size=(5, 6)))
    rec = DecoderRecurrence(params, h_x)
    hc, g = rec.initial(T.Tensor(rng.normal(size=6)))
    M, l = T.Tensor(rng.normal(size=(2, 6))), T.Tensor(rng.normal(size=(3, 6)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for y in (2, 7, 9):
            step, hc = decode_step(rec, hc, g, T.embedding(params["emb"], [y])[0], M, l, [4, 15, 16, 4, 8], 17)
            g = step.g_i
            assert abs(step.dist.data.sum() - 1) < 1e-12 and (step.dist.data >= 0).all()
            assert 0 < step.gamma.item() < 1 and 0 < step.p_gen.item() < 1
            assert abs(step.attn.data.sum() - 1) < 1e-12
