"""Optimisation loop, metrics log and checkpoint series."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .model import forward, init_params, total_loss
from .optim import AdagradState, adagrad_step
from .params import ModelParams, load_checkpoint, save_checkpoint
from .retrieval import ProtoIndex, attach_prototypes
from .text import Example, Vocabulary, encode_example

__all__ = ["TrainConfig", "total_loss", "train", "TrainResult", "TrainingDiverged", "encode_corpus",
           "batch_indices", "METRIC_FIELDS"]

log = logging.getLogger(__name__)

METRIC_FIELDS = ("step", "L_s", "L_l", "L_g", "grad_norm", "lr")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    params: ModelParams
    state: AdagradState
    step: int
    logs: list[dict] = field(default_factory=list)
    checkpoints: list[Path] = field(default_factory=list)


def encode_corpus(records: Sequence[dict], vocab: Vocabulary, config: TrainConfig,
                  index: ProtoIndex | None = None, prototype_ids: Sequence[int] | None = None) -> list[Example]:
    """Encode records with their self-excluded prototypes attached."""
    if prototype_ids is None:
        if index is None:
            raise ValueError("need either a prototype index or precomputed prototype ids")
        prototype_ids = attach_prototypes(records, index)
    out = []
    for rec, pid in zip(records, prototype_ids):
        proto = records[pid] if index is None else {"doc": index.docs[pid], "summary": index.summaries[pid]}
        full = dict(rec, proto_doc=proto["doc"], proto_summary=proto["summary"])
        out.append(encode_example(full, vocab, config.max_src, config.max_tgt))
    return out


def batch_indices(step: int, n: int, batch_size: int, seed: int) -> list[int]:
    """Examples for ``step`` (0-based) from a stream of per-epoch shuffles.

    Depends only on (step, n, batch_size, seed) so resumed runs see the same data.
    """
    out = []
    start = step * batch_size
    for pos in range(start, start + batch_size):
        epoch, k = divmod(pos, n)
        perm = np.random.default_rng([seed, 0, epoch]).permutation(n)
        out.append(int(perm[k]))
    return out


def _checkpoint_meta(config: TrainConfig, vocab_size: int) -> dict:
    return {"config": config.to_dict(), "vocab_size": vocab_size}


def train(config: TrainConfig, examples: Sequence[Example], vocab_size: int, out_dir=None,
          resume_from=None, callback: Callable[[dict], None] | None = None) -> TrainResult:
    """Run ``config.steps`` optimiser steps (counted from the resumed step).

    Each step builds one graph for a minibatch, backpropagates the mean total
    loss, clips gradients to ``config.clip`` and applies Adagrad. With
    ``out_dir`` a metrics CSV and checkpoints are written there.
    """
    if not examples:
        raise ValueError("training needs at least one example")
    params = init_params(config, vocab_size)
    state = AdagradState.for_params(params, config.lr, config.adagrad_eps, config.initial_accumulator)
    step = 0
    if resume_from is not None:
        acc, step, _ = load_checkpoint(resume_from, params)
        if acc is not None:
            state.accumulators = {k: v.copy() for k, v in acc.items()}

    out_dir = Path(out_dir) if out_dir is not None else None
    ckpt_dir = metrics_path = None
    result = TrainResult(params, state, step)
    meta = _checkpoint_meta(config, vocab_size)
    if out_dir is not None:
        ckpt_dir = out_dir / "checkpoints"
        metrics_path = out_dir / "metrics.csv"
        ckpt_dir.mkdir(parents=True, exist_ok=True)
        if resume_from is None:
            with open(metrics_path, "w", newline="") as fh:
                csv.writer(fh).writerow(METRIC_FIELDS)
            result.checkpoints.append(_save(ckpt_dir, params, state, step, meta))

    end = step + config.steps
    while step < end:
        batch = [examples[i] for i in batch_indices(step, len(examples), config.batch_size, config.seed)]
        rng = np.random.default_rng([config.seed, 1, step])
        try:
            row = _train_step(params, state, batch, config, rng)
        except FloatingPointError as exc:
            raise TrainingDiverged(f"step {step + 1}: {exc}; last good checkpoint kept") from exc
        step += 1
        row = {"step": step, **row}
        result.logs.append(row)
        if metrics_path is not None:
            with open(metrics_path, "a", newline="") as fh:
                csv.writer(fh).writerow([_fmt(row[k]) for k in METRIC_FIELDS])
        if callback is not None:
            callback(row)
        if ckpt_dir is not None and (step % config.checkpoint_every == 0 or step == end):
            result.checkpoints.append(_save(ckpt_dir, params, state, step, meta))
    result.step = step
    return result


def _train_step(params: ModelParams, state: AdagradState, batch, config: TrainConfig, rng) -> dict:
    params.zero_grad()
    losses, L_s, tokens, L_l, L_g = [], 0.0, 0, 0.0, 0.0
    for ex in batch:
        res = forward(params, ex, config, rng, training=True)
        losses.append(res.loss)
        L_s += float(res.L_s.data)
        tokens += res.tokens
        L_l += float(res.scores.L_l.data)
        L_g += float(res.scores.L_g.data)
    batch_loss = T.stack(losses).mean()
    T.backward(batch_loss)
    grad_norm = T.parameters_grad_norm(params.tensors())
    if not np.isfinite(grad_norm):
        raise FloatingPointError("non-finite gradient norm")
    adagrad_step(params, state, config.clip)
    n = len(batch)
    return {"L_s": L_s / tokens, "L_l": L_l / n, "L_g": L_g / n, "grad_norm": grad_norm, "lr": state.lr}


def _save(ckpt_dir: Path, params, state, step, meta) -> Path:
    path = ckpt_dir / f"step_{step:06d}.ckpt"
    save_checkpoint(path, params, state.accumulators, step, meta)
    return path


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def load_trained(path) -> tuple[ModelParams, TrainConfig, int]:
    """Rebuild (params, config, step) from a checkpoint written by ``train``."""
    from .params import read_checkpoint
    values, _, step, meta = read_checkpoint(path)
    if "config" not in meta or "vocab_size" not in meta:
        raise ValueError(f"{path}: checkpoint has no training metadata")
    config = TrainConfig.from_dict(meta["config"])
    params = init_params(config, meta["vocab_size"])
    params.load_state(values)
    return params, config, step
