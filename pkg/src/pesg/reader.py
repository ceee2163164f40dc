"""Prototype reader: sequence encoders and the prototype document/summary
cross-dependency (summary pattern, prototype facts and their aggregate)."""

from __future__ import annotations

from dataclasses import dataclass

from . import tensor as T
from .tensor import Tensor


def lstm_layer(xs: Tensor, W: Tensor, U: Tensor, b: Tensor, reverse: bool = False) -> Tensor:
    """Run an LSTM over rows of ``xs`` (steps, in) and return the (steps, H) states."""
    return T.lstm_sequence(xs @ W + b, U, reverse)


def bilstm(params, prefix: str, xs: Tensor) -> Tensor:
    """Forward and backward states concatenated per position: (steps, 2H)."""
    fw = lstm_layer(xs, params[f"{prefix}.fw.W"], params[f"{prefix}.fw.U"], params[f"{prefix}.fw.b"])
    bw = lstm_layer(xs, params[f"{prefix}.bw.W"], params[f"{prefix}.bw.U"], params[f"{prefix}.bw.b"], reverse=True)
    return T.concat([fw, bw], axis=1)


def alpha(x: Tensor, y: Tensor, w: Tensor) -> Tensor:
    """Trainable similarity w . [x, y, x * y] of two vectors."""
    return T.concat([x, y, x * y]) @ w


def alpha_matrix(X: Tensor, Y: Tensor, w: Tensor) -> Tensor:
    """``alpha`` for every row pair: out[i, j] = alpha(X[i], Y[j], w).

    Evaluated blockwise so no (m, n, 3d) tensor is materialised.
    """
    d = X.shape[1]
    if Y.shape[1] != d or w.shape != (3 * d,):
        raise T.ShapeError(f"alpha_matrix: X {X.shape}, Y {Y.shape}, w {w.shape}")
    m, n = X.shape[0], Y.shape[0]
    left = (X @ w[:d]).reshape(m, 1)
    right = (Y @ w[d:2 * d]).reshape(1, n)
    return left + right + (X * w[2 * d:]) @ Y.T


@dataclass
class EncodedStates:
    h_x: Tensor
    h_xhat: Tensor
    h_yhat: Tensor
    S: Tensor
    a_s: Tensor
    a_d: Tensor
    l: Tensor
    r_hat: Tensor
    q: Tensor

    @property
    def h_x_final(self) -> Tensor:
        return self.h_x[self.h_x.shape[0] - 1]

    @property
    def h_xhat_final(self) -> Tensor:
        return self.h_xhat[self.h_xhat.shape[0] - 1]


def embed(params, ids, mask=None) -> Tensor:
    return T.dropout(T.embedding(params["emb"], ids), mask)


def encode_sequences(params, doc_ids, proto_doc_ids, proto_summary_ids, masks=(None, None, None)):
    """Encode X and the prototype document with the shared document encoder
    and the prototype summary with its own encoder."""
    h_x = bilstm(params, "enc_x", embed(params, doc_ids, masks[0]))
    h_xhat = bilstm(params, "enc_x", embed(params, proto_doc_ids, masks[1]))
    h_yhat = bilstm(params, "enc_y", embed(params, proto_summary_ids, masks[2]))
    return h_x, h_xhat, h_yhat


def cross_dependency(h_xhat: Tensor, h_yhat: Tensor, w: Tensor, normalize: bool = False):
    """Similarity matrix S with its column means (summary side, a_s) and row
    means (document side, a_d)."""
    S = alpha_matrix(h_xhat, h_yhat, w)
    a_s = S.mean(axis=0)
    a_d = S.mean(axis=1)
    if normalize:
        a_s, a_d = T.softmax(a_s), T.softmax(a_d)
    return S, a_s, a_d


def summary_pattern(h_yhat: Tensor, a_s: Tensor) -> Tensor:
    return a_s.reshape(a_s.shape[0], 1) * h_yhat


def fact_conv(states: Tensor, weights: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """ReLU convolution over position-weighted states."""
    return T.relu(T.conv1d(weights.reshape(weights.shape[0], 1) * states, kernel, bias))


def prototype_facts(h_xhat: Tensor, a_d: Tensor, kernel: Tensor, bias: Tensor):
    r_hat = fact_conv(h_xhat, a_d, kernel, bias)
    return r_hat, r_hat.sum(axis=0)


def read_prototype(params, doc_ids, proto_doc_ids, proto_summary_ids, normalize: bool = False,
                   masks=(None, None, None)) -> EncodedStates:
    h_x, h_xhat, h_yhat = encode_sequences(params, doc_ids, proto_doc_ids, proto_summary_ids, masks)
    S, a_s, a_d = cross_dependency(h_xhat, h_yhat, params["reader.alpha_w"], normalize)
    l = summary_pattern(h_yhat, a_s)
    r_hat, q = prototype_facts(h_xhat, a_d, params["reader.conv_k"], params["reader.conv_b"])
    return EncodedStates(h_x, h_xhat, h_yhat, S, a_s, a_d, l, r_hat, q)
