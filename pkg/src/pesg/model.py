"""Full model: parameter layout, training forward pass and decoding state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .checker import CheckerScores, check
from .config import TrainConfig
from .facts import FactMemory, extract_facts
from .generator import (DecoderRecurrence, decode_step, init_decoder, output_layer, sequence_loss,
                        target_probability)
from .params import ModelParams, truncated_normal
from .reader import EncodedStates, embed, read_prototype
from .tensor import Tensor
from .text import BOS_ID, UNK_ID, Example


def param_shapes(config: TrainConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    E, H = config.embedding_dim, config.hidden
    C, Hd, V = config.channels, config.dec_hidden, vocab_size
    shapes = {"emb": (V, E)}
    for enc in ("enc_x", "enc_y"):
        for d in ("fw", "bw"):
            shapes[f"{enc}.{d}.W"] = (E, 4 * H)
            shapes[f"{enc}.{d}.U"] = (H, 4 * H)
            shapes[f"{enc}.{d}.b"] = (4 * H,)
    shapes.update({
        "reader.alpha_w": (6 * H,),
        "reader.conv_k": (3, 2 * H, C),
        "reader.conv_b": (C,),
        "facts.alpha_w": (6 * H,),
        "facts.conv_k": (3, 2 * H, C),
        "facts.conv_b": (C,),
        "sru.W1": (3 * C, C),
        "sru.b1": (C,),
        "sru.W2": (C,),
        "sru.b2": (1,),
        "sru.W": (C, 2 * C),
        "sru.b": (2 * C,),
        "sru.U": (C, 2 * C),
        "gru.W": (C, 3 * C),
        "gru.b": (3 * C,),
        "gru.U": (C, 3 * C),
        "dec.W_e": (4 * H, Hd),
        "dec.b_e": (Hd,),
        "dec.W": (2 * H + E, 4 * Hd),
        "dec.U": (Hd, 4 * Hd),
        "dec.b": (4 * Hd,),
        "attn.W_a": (2 * H, Hd),
        "attn.U_a": (Hd, Hd),
        "attn.b_a": (Hd,),
        "attn.v": (Hd,),
        "dyn.W_fm": (C, Hd),
        "dyn.W_fs": (2 * H, Hd),
        "gate.W_g": (Hd,),
        "gate.b_g": (1,),
        "out.W_o": (Hd + C + 2 * H, Hd),
        "out.b_o": (Hd,),
        "out.W_v": (Hd, V),
        "out.b_v": (V,),
        "ptr.w_c": (2 * H,),
        "ptr.w_d": (Hd,),
        "ptr.w_y": (E,),
        "ptr.b": (1,),
        "check.W_l": (Hd + C, C),
        "check.b_l": (C,),
        "check.w_lf": (C,),
        "check.b_lf": (1,),
        "check.W_m": (Hd + 2 * H,),
        "check.b_m": (1,),
    })
    return shapes


def init_params(config: TrainConfig, vocab_size: int, seed: int | None = None) -> ModelParams:
    rng = np.random.default_rng(config.seed if seed is None else seed)
    params = ModelParams()
    for name, shape in param_shapes(config, vocab_size).items():
        params.add(name, truncated_normal(rng, shape, config.init_std))
    return params


def total_loss(L_s: Tensor, L_l: Tensor, L_g: Tensor, eps: float = 1.0, eta: float = 1.0) -> Tensor:
    """L = eps * L_g + eta * L_l + L_s."""
    parts = {"L_s": L_s, "L_l": L_l, "L_g": L_g}
    bad = {k: float(np.asarray(v.data).sum()) for k, v in parts.items() if not np.isfinite(v.data).all()}
    if bad:
        raise FloatingPointError(f"non-finite loss component(s): {bad}")
    return L_g * eps + L_l * eta + L_s


@dataclass
class ForwardResult:
    loss: Tensor
    L_s: Tensor
    L_s_token: Tensor
    tokens: int
    scores: CheckerScores
    enc: EncodedStates
    memory: FactMemory
    gamma: Tensor
    p_gen: Tensor


def _fold(ids, vocab_size: int) -> list[int]:
    return [i if i < vocab_size else UNK_ID for i in ids]


def forward(params: ModelParams, ex: Example, config: TrainConfig, rng: np.random.Generator | None = None,
            training: bool = False) -> ForwardResult:
    """Teacher-forced pass over one example producing every loss term."""
    V = params["emb"].shape[0]
    E = params["emb"].shape[1]
    inputs = [BOS_ID] + _fold(ex.summary, V)
    targets = ex.targets
    n = len(inputs)

    def mask(shape):
        return T.dropout_mask(shape, config.keep_prob, rng, training)

    masks = (mask((len(ex.doc), E)), mask((len(ex.proto_doc), E)), mask((len(ex.proto_summary), E)))
    enc = read_prototype(params, ex.doc_input_ids(V), ex.proto_doc, ex.proto_summary,
                         config.normalize_attention, masks)
    mem = extract_facts(params, enc.h_x, enc.h_xhat, enc.a_d, enc.q, config.hops)

    rec = DecoderRecurrence(params, enc.h_x)
    hc, g = rec.initial(init_decoder(enc.h_x_final, enc.l, params["dec.W_e"], params["dec.b_e"]))
    Ey = embed(params, inputs, mask((n, E)))
    XP = rec.embed_projection(Ey)
    Ds, Gs, As = [], [], []
    for t in range(n):
        hc, d, g, attn = rec.step(hc, g, XP[t])
        Ds.append(d)
        Gs.append(g)
        As.append(attn)
    D = T.stack(Ds)
    P_v, p_gen, gamma, _, _ = output_layer(params, D, T.stack(Gs), Ey, mem.M, enc.l,
                                           mask((n, config.dec_hidden)))
    probs = target_probability(P_v, p_gen, T.stack(As), ex.doc, targets)
    L_s, L_tok = sequence_loss(probs)
    scores = check(Ds[-1], mem.r, enc.r_hat, enc.h_x_final, enc.h_xhat_final, params)
    loss = total_loss(L_s, scores.L_l, scores.L_g, config.epsilon, config.eta)
    return ForwardResult(loss, L_s, L_tok, n, scores, enc, mem, gamma, p_gen)


class DecodingState:
    """Encoder outputs and decoder recurrence for step-wise inference."""

    def __init__(self, params: ModelParams, ex: Example, config: TrainConfig):
        with T.no_grad():
            self.params = params
            self.example = ex
            self.vocab_size = params["emb"].shape[0]
            self.ext_size = self.vocab_size + len(ex.oov_map)
            self.enc = read_prototype(params, ex.doc_input_ids(self.vocab_size), ex.proto_doc, ex.proto_summary,
                                      config.normalize_attention)
            self.memory = extract_facts(params, self.enc.h_x, self.enc.h_xhat, self.enc.a_d, self.enc.q, config.hops)
            self.rec = DecoderRecurrence(params, self.enc.h_x)
            d0 = init_decoder(self.enc.h_x_final, self.enc.l, params["dec.W_e"], params["dec.b_e"])
            self.initial = self.rec.initial(d0)

    def step(self, state, token: int):
        """Advance by one token; returns (log-probs over the extended vocab, new state, step info)."""
        hc, g_prev = state
        with T.no_grad():
            y = T.embedding(self.params["emb"], [token if token < self.vocab_size else UNK_ID])[0]
            st, hc = decode_step(self.rec, hc, g_prev, y, self.memory.M, self.enc.l, self.example.doc,
                                 self.ext_size)
        dist = st.dist.data
        with np.errstate(divide="ignore"):
            logp = np.log(dist)
        return logp, (hc, st.g_i), st

    def check_scores(self, d_final: Tensor) -> CheckerScores:
        with T.no_grad():
            return check(d_final, self.memory.r, self.enc.r_hat, self.enc.h_x_final, self.enc.h_xhat_final,
                         self.params)


def per_token_loss(params: ModelParams, examples, config: TrainConfig) -> float:
    """Corpus-level token-averaged L_s without dropout."""
    total = tokens = 0.0
    with T.no_grad():
        for ex in examples:
            res = forward(params, ex, config)
            total += float(res.L_s.data)
            tokens += res.tokens
    return total / tokens if tokens else math.nan
