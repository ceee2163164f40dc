"""Hop-count sweep: train one model per K and score greedy decodes."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import TrainConfig
from .evaluation import rouge
from .inference import detokenize, generate
from .model import per_token_loss
from .retrieval import build_index
from .text import Vocabulary, build_vocab, corpus_tokens
from .training import encode_corpus, train

log = logging.getLogger(__name__)

SWEEP_FIELDS = ("K", "R1", "R2", "RL", "L_s_token")


@dataclass
class SweepRow:
    K: int
    R1: float
    R2: float
    RL: float
    L_s_token: float

    def as_row(self) -> list:
        return [self.K, repr(self.R1), repr(self.R2), repr(self.RL), repr(self.L_s_token)]


def decode_corpus(params, examples, vocab: Vocabulary, config: TrainConfig, beam: int = 1,
                  max_len: int | None = None) -> list[str]:
    return [detokenize(generate(params, ex, config, beam, max_len).tokens, vocab, ex.oov_map) for ex in examples]


def corpus_rouge(candidates: Sequence[str], references: Sequence[str]) -> dict[str, float]:
    scores = [rouge(c, r) for c, r in zip(candidates, references)]
    return {k: float(np.mean([s[k].f1 for s in scores])) for k in ("R1", "R2", "RL")}


def hop_sweep(records: Sequence[dict], config: TrainConfig, hops: Sequence[int], beam: int = 1,
              vocab: Vocabulary | None = None) -> list[SweepRow]:
    """Train from scratch at each K (same seed and data) and score on the training inputs."""
    vocab = vocab or build_vocab(corpus_tokens(records), config.vocab_size)
    index = build_index(records)
    rows = []
    for k in hops:
        cfg = config.replace(hops=k)
        examples = encode_corpus(records, vocab, cfg, index)
        res = train(cfg, examples, len(vocab))
        cands = decode_corpus(res.params, examples, vocab, cfg, beam)
        refs = [" ".join(ex.summary_tokens) for ex in examples]
        r = corpus_rouge(cands, refs)
        row = SweepRow(k, r["R1"], r["R2"], r["RL"], per_token_loss(res.params, examples, cfg))
        log.info("K=%d R1=%.4f R2=%.4f RL=%.4f", k, row.R1, row.R2, row.RL)
        rows.append(row)
    return rows
