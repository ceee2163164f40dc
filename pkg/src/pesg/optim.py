"""Adagrad with elementwise gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams


@dataclass
class AdagradState:
    lr: float = 0.15
    eps: float = 1e-8
    initial_accumulator: float = 0.0
    accumulators: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ModelParams, lr: float = 0.15, eps: float = 1e-8,
                   initial_accumulator: float = 0.0) -> "AdagradState":
        acc = {k: np.full(t.shape, initial_accumulator) for k, t in params.items()}
        return cls(lr=lr, eps=eps, initial_accumulator=initial_accumulator, accumulators=acc)


def clip_gradients(params: ModelParams, lo: float = -5.0, hi: float = 5.0) -> None:
    for t in params.tensors():
        np.clip(t.grad, lo, hi, out=t.grad)


def adagrad_step(params: ModelParams, state: AdagradState, clip: tuple[float, float] | None = (-5.0, 5.0)) -> None:
    """Clip, accumulate squared gradients, update, then zero the gradients."""
    if clip is not None:
        clip_gradients(params, *clip)
    for name, t in params.items():
        g = t.grad
        acc = state.accumulators[name]
        acc += g * g
        denom = np.sqrt(acc) + state.eps
        # eps may be 0; untouched entries (acc == 0) must stay put, not NaN
        upd = np.divide(g, denom, out=np.zeros_like(g), where=denom > 0)
        t.data -= state.lr * upd
        t.zero_grad()
