"""Fact checker: local and global matching scores of the summary state
against input vs. prototype facts, and the losses that prefer the input.

Scores are sigmoid-squashed so log(1 - tau) is always defined.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import tensor as T
from .tensor import Tensor

TAU_LO, TAU_HI = 1e-7, 1.0 - 1e-7


@dataclass
class CheckerScores:
    tau_r_local: Tensor
    tau_f_local: Tensor
    tau_r_global: Tensor
    tau_f_global: Tensor
    L_l: Tensor
    L_g: Tensor

    def values(self) -> dict[str, float]:
        return {k: float(getattr(self, k).data.reshape(-1)[0]) for k in
                ("tau_r_local", "tau_f_local", "tau_r_global", "tau_f_global", "L_l", "L_g")}


def local_score(d_final: Tensor, facts: Tensor, params) -> Tensor:
    """1x1 conv over [d_final, fact_t], ReLU, mean over positions, then a
    fully connected scalar logit squashed by a sigmoid."""
    W = params["check.W_l"]
    Hd = d_final.shape[0]
    feats = T.relu(d_final @ W[:Hd] + facts @ W[Hd:] + params["check.b_l"])
    return T.sigmoid(feats.mean(axis=0) @ params["check.w_lf"] + params["check.b_lf"])


def global_score(d_final: Tensor, h_final: Tensor, params) -> Tensor:
    return T.sigmoid(T.concat([d_final, h_final]) @ params["check.W_m"] + params["check.b_m"])


def matching_loss(tau_r: Tensor, tau_f: Tensor) -> Tensor:
    """-(log tau_r + log(1 - tau_f)) with both arguments clamped to [1e-7, 1 - 1e-7]."""
    pos = T.log(T.clip(tau_r, TAU_LO, TAU_HI))
    neg = T.log(1.0 - T.clip(tau_f, TAU_LO, TAU_HI))
    return -(pos + neg).sum()


def check(d_final: Tensor, r: Tensor, r_hat: Tensor, h_x_final: Tensor, h_xhat_final: Tensor, params) -> CheckerScores:
    trl = local_score(d_final, r, params)
    tfl = local_score(d_final, r_hat, params)
    trg = global_score(d_final, h_x_final, params)
    tfg = global_score(d_final, h_xhat_final, params)
    return CheckerScores(trl, tfl, trg, tfg, matching_loss(trl, tfl), matching_loss(trg, tfg))
