import math

import numpy as np
import pytest

from pesg import tensor as T
from pesg.config import TrainConfig
from pesg.model import init_params
from pesg.reader import (alpha, alpha_matrix, bilstm, cross_dependency, fact_conv, prototype_facts, read_prototype,
                         summary_pattern)

from gradcheck import check_grads, projected


def sig(z):
    return 1.0 / (1.0 + math.exp(-z))


def hand_lstm(xs, W, U, b):
    """Scalar-loop LSTM, gate order i, f, o, g."""
    H = len(U)
    h, c = [0.0] * H, [0.0] * H
    out = []
    for x in xs:
        z = [b[k] + sum(x[m] * W[m][k] for m in range(len(x))) + sum(h[m] * U[m][k] for m in range(H))
             for k in range(4 * H)]
        i = [sig(z[k]) for k in range(H)]
        f = [sig(z[H + k]) for k in range(H)]
        o = [sig(z[2 * H + k]) for k in range(H)]
        g = [math.tanh(z[3 * H + k]) for k in range(H)]
        c = [f[k] * c[k] + i[k] * g[k] for k in range(H)]
        h = [o[k] * math.tanh(c[k]) for k in range(H)]
        out.append(h)
    return out


def enc_params(rng, E, H, same=False):
    p = {}
    for d in ("fw", "bw"):
        p[f"enc.{d}.W"] = T.parameter(rng.normal(size=(E, 4 * H)))
        p[f"enc.{d}.U"] = T.parameter(rng.normal(size=(H, 4 * H)))
        p[f"enc.{d}.b"] = T.parameter(rng.normal(size=(4 * H,)))
    if same:
        for k in ("W", "U", "b"):
            p[f"enc.bw.{k}"] = p[f"enc.fw.{k}"]
    return p


class TestEncoder:
    def test_length_one_shape(self):
        p = enc_params(np.random.default_rng(0), 3, 2)
        assert bilstm(p, "enc", T.Tensor(np.ones((1, 3)))).shape == (1, 4)

    def test_matches_scalar_lstm(self):
        rng = np.random.default_rng(1)
        p = enc_params(rng, 2, 2)
        xs = rng.normal(size=(3, 2))
        out = bilstm(p, "enc", T.Tensor(xs)).data
        fw = hand_lstm(xs.tolist(), p["enc.fw.W"].data.tolist(), p["enc.fw.U"].data.tolist(),
                       p["enc.fw.b"].data.tolist())
        bw = hand_lstm(xs[::-1].tolist(), p["enc.bw.W"].data.tolist(), p["enc.bw.U"].data.tolist(),
                       p["enc.bw.b"].data.tolist())[::-1]
        np.testing.assert_allclose(out[:, :2], fw, rtol=0, atol=1e-12)
        np.testing.assert_allclose(out[:, 2:], bw, rtol=0, atol=1e-12)

    def test_reversal_swaps_directions(self):
        rng = np.random.default_rng(2)
        p = enc_params(rng, 3, 2, same=True)
        xs = rng.normal(size=(4, 3))
        a = bilstm(p, "enc", T.Tensor(xs)).data
        b = bilstm(p, "enc", T.Tensor(xs[::-1].copy())).data
        np.testing.assert_allclose(b[::-1, :2], a[:, 2:], atol=1e-14)
        np.testing.assert_allclose(b[::-1, 2:], a[:, :2], atol=1e-14)


class TestAlpha:
    def test_zero_weights(self):
        assert alpha(T.Tensor([1.0, 2.0]), T.Tensor([3.0, 4.0]), T.Tensor(np.zeros(6))).item() == 0.0

    def test_zero_x_uses_y_block(self):
        y, w = np.array([3.0, -1.0]), np.arange(6.0)
        assert alpha(T.Tensor(np.zeros(2)), T.Tensor(y), T.Tensor(w)).item() == y @ w[2:4]

    def test_scalar_case(self):
        assert alpha(T.Tensor([2.0]), T.Tensor([3.0]), T.Tensor([1.0, 1.0, 1.0])).item() == 11.0

    def test_matrix_matches_pairwise(self):
        rng = np.random.default_rng(3)
        X, Y, w = rng.normal(size=(3, 4)), rng.normal(size=(2, 4)), rng.normal(size=12)
        M = alpha_matrix(T.Tensor(X), T.Tensor(Y), T.Tensor(w)).data
        for i in range(3):
            for j in range(2):
                assert M[i, j] == pytest.approx(alpha(T.Tensor(X[i]), T.Tensor(Y[j]), T.Tensor(w)).item(), abs=1e-12)


class TestCrossDependency:
    def test_hand_means(self):
        # with w = [1, 1, 0] S[i, j] = x_i + y_j
        S, a_s, a_d = cross_dependency(T.Tensor([[0.0], [4.0]]), T.Tensor([[1.0], [3.0]]), T.Tensor([1.0, 1.0, 0.0]))
        np.testing.assert_array_equal(S.data, [[1, 3], [5, 7]])
        np.testing.assert_array_equal(a_s.data, [3, 5])
        np.testing.assert_array_equal(a_d.data, [2, 6])

    def test_all_ones(self):
        # w = [0, 0, 1] gives S = x * y
        _, a_s, a_d = cross_dependency(T.Tensor(np.ones((3, 1))), T.Tensor(np.ones((2, 1))), T.Tensor([0.0, 0.0, 1.0]))
        np.testing.assert_array_equal(a_s.data, [1, 1])
        np.testing.assert_array_equal(a_d.data, [1, 1, 1])

    def test_single_summary_token(self):
        rng = np.random.default_rng(4)
        S, _, a_d = cross_dependency(T.Tensor(rng.normal(size=(3, 2))), T.Tensor(rng.normal(size=(1, 2))),
                                     T.Tensor(rng.normal(size=6)))
        np.testing.assert_array_equal(a_d.data, S.data[:, 0])

    def test_scaling_is_linear(self):
        rng = np.random.default_rng(5)
        hx, hy, w = rng.normal(size=(3, 2)), rng.normal(size=(4, 2)), rng.normal(size=6)
        _, a_s, a_d = cross_dependency(T.Tensor(hx), T.Tensor(hy), T.Tensor(w))
        _, b_s, b_d = cross_dependency(T.Tensor(hx), T.Tensor(hy), T.Tensor(2.5 * w))
        np.testing.assert_allclose(b_s.data, 2.5 * a_s.data, rtol=1e-12)
        np.testing.assert_allclose(b_d.data, 2.5 * a_d.data, rtol=1e-12)

    def test_swap_roles_transposes(self):
        rng = np.random.default_rng(6)
        hx, hy, w = rng.normal(size=(3, 2)), rng.normal(size=(4, 2)), rng.normal(size=6)
        S, _, _ = cross_dependency(T.Tensor(hx), T.Tensor(hy), T.Tensor(w))
        w_swapped = np.concatenate([w[2:4], w[0:2], w[4:]])
        S2, _, _ = cross_dependency(T.Tensor(hy), T.Tensor(hx), T.Tensor(w_swapped))
        np.testing.assert_allclose(S.data, S2.data.T, atol=1e-12)

    def test_normalized_variant_sums_to_one(self):
        rng = np.random.default_rng(7)
        _, a_s, a_d = cross_dependency(T.Tensor(rng.normal(size=(3, 2))), T.Tensor(rng.normal(size=(4, 2))),
                                       T.Tensor(rng.normal(size=6)), normalize=True)
        assert a_s.data.sum() == pytest.approx(1.0) and a_d.data.sum() == pytest.approx(1.0)


class TestPatternAndFacts:
    def test_pattern_zero_and_identity(self):
        hy = T.Tensor(np.random.default_rng(8).normal(size=(3, 4)))
        np.testing.assert_array_equal(summary_pattern(hy, T.Tensor(np.zeros(3))).data, np.zeros((3, 4)))
        np.testing.assert_array_equal(summary_pattern(hy, T.Tensor(np.ones(3))).data, hy.data)

    def test_pattern_hand(self):
        np.testing.assert_array_equal(summary_pattern(T.Tensor([[1.0, -1.0]]), T.Tensor([2.0])).data, [[2, -2]])

    def test_zero_weights_give_relu_bias(self):
        bias = np.array([0.5, -0.3])
        r_hat, q = prototype_facts(T.Tensor(np.ones((4, 2))), T.Tensor(np.zeros(4)),
                                   T.Tensor(np.ones((3, 2, 2))), T.Tensor(bias))
        np.testing.assert_array_equal(r_hat.data, np.tile([0.5, 0.0], (4, 1)))
        np.testing.assert_array_equal(q.data, [2.0, 0.0])

    def test_single_position_sees_padding(self):
        k = np.zeros((3, 1, 1))
        k[1, 0, 0] = 2.0
        k[0, 0, 0] = k[2, 0, 0] = 100.0
        r_hat, _ = prototype_facts(T.Tensor([[1.5]]), T.Tensor([1.0]), T.Tensor(k), T.Tensor([0.0]))
        assert r_hat.data[0, 0] == 3.0

    def test_conv_oracle(self):
        states = np.array([[1.0], [-2.0], [3.0], [0.5]])
        weights = np.array([2.0, 1.0, 0.5, -1.0])
        scaled = (weights[:, None] * states)[:, 0]
        padded = np.concatenate([[0.0], scaled, [0.0]])
        expected = [max(padded[t] + padded[t + 1] + padded[t + 2], 0.0) for t in range(4)]
        out = fact_conv(T.Tensor(states), T.Tensor(weights), T.Tensor(np.ones((3, 1, 1))), T.Tensor([0.0]))
        np.testing.assert_allclose(out.data[:, 0], expected, atol=1e-15)


def test_reader_outputs_pass_gradient_check():
    cfg = TrainConfig.toy(embedding_dim=3, hidden=2, vocab_size=12)
    params = init_params(cfg, 12, seed=1)
    for t in params.tensors():
        t.data = t.data * 5.0

    def build():
        enc = read_prototype(params, [4, 5, 6], [5, 7], [8, 9, 4])
        return projected(enc.l) + projected(enc.r_hat, 1) + projected(enc.q, 2)

    names = ["enc_x.fw.W", "enc_x.bw.U", "enc_y.fw.b", "reader.alpha_w", "reader.conv_k", "emb"]
    assert check_grads(build, [params[n] for n in names]) < 1e-6
