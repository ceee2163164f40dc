"""Beam search and greedy decoding over an extended (copy-augmented) vocabulary.

Decoders are driven through a step function
``step(state, last_token) -> (log_probs, new_state, info)`` so the same search
runs on the full model or on small test models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .config import TrainConfig
from .model import DecodingState
from .params import ModelParams
from .text import BOS_ID, EOS_ID, Example, Vocabulary, decode_ids

StepFn = Callable[[Any, int], tuple[np.ndarray, Any, Any]]


@dataclass
class Hypothesis:
    tokens: list[int]
    logprob: float
    state: Any
    step_logprobs: list[float] = field(default_factory=list)
    infos: list[Any] = field(default_factory=list)
    finished: bool = False

    @property
    def score(self) -> float:
        """Length-normalised log-probability (per emitted token, EOS included)."""
        return self.logprob / len(self.tokens) if self.tokens else 0.0

    @property
    def gammas(self) -> list[float]:
        return [float(np.asarray(i.gamma.data)) for i in self.infos if hasattr(i, "gamma")]

    def output_ids(self, eos: int = EOS_ID) -> list[int]:
        return self.tokens[:-1] if self.tokens and self.tokens[-1] == eos else list(self.tokens)


def _rank_key(h: Hypothesis):
    return (-h.score, tuple(h.tokens))


def beam_search(step: StepFn, initial_state, beam: int = 5, max_len: int = 100, bos: int = BOS_ID,
                eos: int = EOS_ID) -> list[Hypothesis]:
    """Return finished (or, at ``max_len``, unfinished) hypotheses ranked best first.

    Each round expands every live hypothesis, keeps the ``beam`` best by
    cumulative log-probability (token sequence breaks ties) and moves those
    ending in EOS to the finished pool. Search stops once ``beam`` hypotheses
    have finished or ``max_len`` tokens were emitted.
    """
    if beam < 1:
        raise ValueError(f"beam must be >= 1, got {beam}")
    live = [Hypothesis([], 0.0, initial_state)]
    finished: list[Hypothesis] = []
    for _ in range(max_len):
        cands = []
        for h in live:
            logp, new_state, info = step(h.state, h.tokens[-1] if h.tokens else bos)
            logp = np.asarray(logp, dtype=float)
            toks = np.arange(len(logp))
            # a global top-k is always inside each parent's own top-k
            order = np.lexsort((toks, -logp))[:beam]
            for tok in order:
                lp = float(logp[tok])
                if lp == -math.inf:
                    continue
                cands.append(Hypothesis(h.tokens + [int(tok)], h.logprob + lp, new_state,
                                        h.step_logprobs + [lp], h.infos + [info]))
        cands.sort(key=lambda c: (-c.logprob, tuple(c.tokens)))
        live = []
        for c in cands[:beam]:
            if c.tokens[-1] == eos:
                c.finished = True
                finished.append(c)
            else:
                live.append(c)
        if len(finished) >= beam or not live:
            live = []
            break
    pool = finished + live
    pool.sort(key=_rank_key)
    return pool


def greedy_search(step: StepFn, initial_state, max_len: int = 100, bos: int = BOS_ID,
                  eos: int = EOS_ID) -> Hypothesis:
    h = Hypothesis([], 0.0, initial_state)
    for _ in range(max_len):
        logp, state, info = step(h.state, h.tokens[-1] if h.tokens else bos)
        tok = int(np.argmax(logp))
        h = Hypothesis(h.tokens + [tok], h.logprob + float(logp[tok]), state, h.step_logprobs + [float(logp[tok])],
                       h.infos + [info])
        if tok == eos:
            h.finished = True
            break
    return h


def generate(params: ModelParams, ex: Example, config: TrainConfig, beam: int | None = None,
             max_len: int | None = None) -> Hypothesis:
    """Best hypothesis for one encoded example (beam 1 means greedy)."""
    beam = config.beam if beam is None else beam
    max_len = config.max_tgt if max_len is None else max_len
    ds = DecodingState(params, ex, config)
    if beam == 1:
        return greedy_search(ds.step, ds.initial, max_len)
    return beam_search(ds.step, ds.initial, beam, max_len)[0]


def detokenize(ids: Sequence[int], vocab: Vocabulary, oov_map: Sequence[str], eos: int = EOS_ID) -> str:
    ids = list(ids)
    if ids and ids[-1] == eos:
        ids = ids[:-1]
    return " ".join(decode_ids(ids, vocab, oov_map))
