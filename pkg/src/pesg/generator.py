"""Editing generator: LSTM decoder with document attention, bilinear
attention over fact memory and summary pattern, an editing gate mixing the
two, and a pointer that copies from the input document."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import Tensor


PROB_FLOOR = 1e-12


@dataclass
class DecoderStep:
    d: Tensor
    g_i: Tensor
    g_m: Tensor
    g_s: Tensor
    gamma: Tensor
    p_gen: Tensor
    attn: Tensor
    dist: Tensor


def init_decoder(h_x_final: Tensor, l: Tensor, W_e: Tensor, b_e: Tensor) -> Tensor:
    """d_0 from the final document state and the summed summary pattern."""
    return T.concat([h_x_final, l.sum(axis=0)]) @ W_e + b_e


def project_keys(h_x: Tensor, params) -> Tensor:
    return h_x @ params["attn.W_a"] + params["attn.b_a"]


def doc_attention(d: Tensor, h_x: Tensor, keys: Tensor, params):
    """Additive attention over document states; returns (context, weights)."""
    e = T.tanh(keys + d @ params["attn.U_a"]) @ params["attn.v"]
    attn = T.softmax(e)
    return attn @ h_x, attn


def dynamic_attention(D: Tensor, V: Tensor, W_f: Tensor):
    """Bilinear attention: delta = softmax_i(v_i W_f d), context = sum_i delta_i v_i.

    ``D`` is one state (H,) or a row batch (n, H).
    """
    scores = D @ (V @ W_f).T
    delta = T.softmax(scores, axis=-1)
    return delta @ V, delta


def editing_gate(D: Tensor, W_g: Tensor, b_g: Tensor) -> Tensor:
    return T.sigmoid(D @ W_g + b_g)


def mix_contexts(gamma: Tensor, g_m: Tensor, g_s: Tensor) -> Tensor:
    """[gamma * g_m, (1 - gamma) * g_s] per row (concatenation, not a sum)."""
    n = g_m.shape[0]
    gam = gamma.reshape(n, 1)
    return T.concat([gam * g_m, (1.0 - gam) * g_s], axis=1)


def output_layer(params, D: Tensor, G_i: Tensor, Ey: Tensor, M: Tensor, l: Tensor, mask=None):
    """Row-batched readout for n decoder states.

    Returns (P_v (n, V), p_gen (n,), gamma (n,), g_m, g_s).
    """
    n = D.shape[0]
    g_m, _ = dynamic_attention(D, M, params["dyn.W_fm"])
    g_s, _ = dynamic_attention(D, l, params["dyn.W_fs"])
    gamma = editing_gate(D, params["gate.W_g"], params["gate.b_g"])
    g_h = mix_contexts(gamma, g_m, g_s)
    d_o = T.concat([D, g_h], axis=1) @ params["out.W_o"] + params["out.b_o"]
    d_o = T.dropout(d_o, mask)
    P_v = T.softmax(d_o @ params["out.W_v"] + params["out.b_v"], axis=1)
    p_gen = T.sigmoid(G_i @ params["ptr.w_c"] + D @ params["ptr.w_d"] + Ey @ params["ptr.w_y"] + params["ptr.b"])
    return P_v, p_gen.reshape(n), gamma.reshape(n), g_m, g_s


def final_distribution(P_v: Tensor, p_gen: Tensor, attn: Tensor, src_ids, ext_size: int) -> Tensor:
    """Blend vocabulary and copy distributions over the extended vocabulary."""
    n, V = P_v.shape
    src_ids = np.asarray(src_ids)
    if ext_size < V or (src_ids.size and src_ids.max() >= ext_size):
        raise IndexError(f"extended vocabulary of size {ext_size} cannot hold source id {src_ids.max()}")
    pg = p_gen.reshape(n, 1)
    vocab_part = P_v if ext_size == V else T.concat([P_v, T.zeros(n, ext_size - V)], axis=1)
    copy_part = T.scatter_add(attn, src_ids, ext_size)
    return pg * vocab_part + (1.0 - pg) * copy_part


def target_probability(P_v: Tensor, p_gen: Tensor, attn: Tensor, src_ids, targets) -> Tensor:
    """Final-distribution mass on each target without building the full distribution."""
    V = P_v.shape[1]
    targets = np.asarray(targets)
    in_vocab = (targets < V).astype(float)
    gen = T.pick(P_v, np.where(targets < V, targets, 0)) * in_vocab
    match = (np.asarray(src_ids)[None, :] == targets[:, None]).astype(float)
    copy = (attn * match).sum(axis=1)
    return p_gen * gen + (1.0 - p_gen) * copy


def sequence_loss(probs: Tensor, mask=None):
    """Masked negative log-likelihood; returns (sum, per-token mean)."""
    n = probs.shape[0]
    mask = np.ones(n) if mask is None else np.asarray(mask, dtype=float)
    tokens = float(mask.sum())
    if tokens == 0:
        zero = T.Tensor(0.0)
        return zero, zero
    if (probs.data[mask > 0] < PROB_FLOOR).any():
        warnings.warn(f"target probability below {PROB_FLOOR:g} clamped inside the log", RuntimeWarning,
                      stacklevel=2)
    total = -(T.log_floor(probs, PROB_FLOOR) * mask).sum()
    return total, total * (1.0 / tokens)


class DecoderRecurrence:
    """The recurrent half of the decoder: LSTM state plus document attention.

    Everything downstream of d_t is handled by ``output_layer`` so training can
    evaluate it for all steps at once.
    """

    def __init__(self, params, h_x: Tensor):
        self.params = params
        self.h_x = h_x
        self.keys = project_keys(h_x, params)
        Hd = params["dec.U"].shape[0]
        self.Hd = Hd
        self.ctx_dim = h_x.shape[1]

    def initial(self, d0: Tensor):
        hc = T.concat([d0, T.zeros(self.Hd)])
        return hc, T.zeros(self.ctx_dim)

    def step(self, hc: Tensor, g_prev: Tensor, x_proj: Tensor):
        """``x_proj`` is the embedding part of the LSTM input projection."""
        W = self.params["dec.W"]
        xp = x_proj + g_prev @ W[: self.ctx_dim]
        hc = T.lstm_cell(xp, hc, self.params["dec.U"])
        d = hc[: self.Hd]
        g_i, attn = doc_attention(d, self.h_x, self.keys, self.params)
        return hc, d, g_i, attn

    def embed_projection(self, Ey: Tensor) -> Tensor:
        return Ey @ self.params["dec.W"][self.ctx_dim:] + self.params["dec.b"]


def decode_step(rec: DecoderRecurrence, hc: Tensor, g_prev: Tensor, y_prev_emb: Tensor, M: Tensor, l: Tensor,
                src_ids, ext_size: int):
    """One inference step; returns (DecoderStep, new [h; c])."""
    hc, d, g_i, attn = rec.step(hc, g_prev, rec.embed_projection(y_prev_emb))
    D = d.reshape(1, d.shape[0])
    P_v, p_gen, gamma, g_m, g_s = output_layer(rec.params, D, g_i.reshape(1, g_i.shape[0]),
                                               y_prev_emb.reshape(1, y_prev_emb.shape[0]), M, l)
    dist = final_distribution(P_v, p_gen, attn.reshape(1, attn.shape[0]), src_ids, ext_size)
    step = DecoderStep(d=d, g_i=g_i, g_m=g_m[0], g_s=g_s[0], gamma=gamma[0], p_gen=p_gen[0], attn=attn,
                       dist=dist[0])
    return step, hc
