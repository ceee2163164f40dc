"""Fact extraction: prototype-guided input facts polished over K hops.

Each hop runs a selective recurrent unit (a GRU whose update gate is a
softmax over positions, conditioned on the current polished fact) across
the input facts, then feeds its last state into a regular GRU that updates
the polished fact. A GRU has a single state, so the new state is both the
hop's memory entry m_{k+1} and the next polished fact q_{k+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tensor as T
from .reader import alpha_matrix, fact_conv
from .tensor import Tensor


@dataclass
class FactMemory:
    r: Tensor
    E: Tensor
    E_row: Tensor
    M: Tensor
    q_trace: list[Tensor]
    gates: list[Tensor] = field(default_factory=list)

    @property
    def hops(self) -> int:
        return len(self.q_trace) - 1


def cross_weights(h_xhat: Tensor, a_d: Tensor, h_x: Tensor, w: Tensor):
    """E[i, j] = alpha(a_d[i] * h_xhat[i], h_x[j]); E_row sums over the prototype axis."""
    weighted = a_d.reshape(a_d.shape[0], 1) * h_xhat
    E = alpha_matrix(weighted, h_x, w)
    return E, E.sum(axis=0)


def input_facts(h_x: Tensor, E_row: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    return fact_conv(h_x, E_row, kernel, bias)


def sru_gate(r: Tensor, q: Tensor, W1: Tensor, b1: Tensor, W2: Tensor, b2: Tensor) -> Tensor:
    """Softmax over positions of a scalar score of [r_i * q, r_i, q]."""
    C = r.shape[1]
    # W1 applied blockwise to the concatenation, so q is never tiled
    hidden = T.tanh((r * q) @ W1[:C] + r @ W1[C:2 * C] + q @ W1[2 * C:] + b1)
    z = hidden @ W2 + b2
    return T.softmax(z)


def sru_step(r: Tensor, q: Tensor, params, return_gate: bool = False):
    g = sru_gate(r, q, params["sru.W1"], params["sru.b1"], params["sru.W2"], params["sru.b2"])
    h = T.sru_sequence(r @ params["sru.W"] + params["sru.b"], g, params["sru.U"])
    return (h, g) if return_gate else h


def gru_update(h: Tensor, q: Tensor, params) -> Tensor:
    return T.gru_cell(h @ params["gru.W"] + params["gru.b"], q, params["gru.U"])


def polish(r: Tensor, q0: Tensor, hops: int, params, E: Tensor | None = None, E_row: Tensor | None = None) -> FactMemory:
    if hops < 1:
        raise ValueError(f"hops must be >= 1, got {hops}")
    q = q0
    trace, mem, gates = [q0], [], []
    for _ in range(hops):
        h, g = sru_step(r, q, params, return_gate=True)
        q = gru_update(h, q, params)
        trace.append(q)
        mem.append(q)
        gates.append(g)
    return FactMemory(r=r, E=E, E_row=E_row, M=T.stack(mem), q_trace=trace, gates=gates)


def extract_facts(params, h_x: Tensor, h_xhat: Tensor, a_d: Tensor, q: Tensor, hops: int) -> FactMemory:
    E, E_row = cross_weights(h_xhat, a_d, h_x, params["facts.alpha_w"])
    r = input_facts(h_x, E_row, params["facts.conv_k"], params["facts.conv_b"])
    return polish(r, q, hops, params, E, E_row)
