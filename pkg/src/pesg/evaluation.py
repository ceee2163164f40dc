"""ROUGE-1/2/L (full-length F1), extractive-fragment statistics and Lead-3."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .text import tokenize

log = logging.getLogger(__name__)

SENTENCE_END = frozenset({".", "!", "?", "。", "！", "？"})


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, overlap: float, n_cand: int, n_ref: int) -> "RougeScore":
        p = overlap / n_cand if n_cand else 0.0
        r = overlap / n_ref if n_ref else 0.0
        return cls(p, r, f1(p, r))


def f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _seq(x) -> list:
    return tokenize(x) if isinstance(x, str) else list(x)


def ngrams(tokens: Sequence[Hashable], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate, reference, n: int = 1) -> RougeScore:
    """Clipped n-gram overlap between candidate and reference."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    cand, ref = ngrams(_seq(candidate), n), ngrams(_seq(reference), n)
    if not ref:
        log.warning("empty reference for ROUGE-%d; scoring 0", n)
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum((cand & ref).values())
    return RougeScore.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence, b: Sequence) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, reference) -> RougeScore:
    cand, ref = _seq(candidate), _seq(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    return RougeScore.from_counts(lcs_length(cand, ref), len(cand), len(ref))


def rouge(candidate, reference) -> dict[str, RougeScore]:
    return {"R1": rouge_n(candidate, reference, 1), "R2": rouge_n(candidate, reference, 2),
            "RL": rouge_l(candidate, reference)}


# abstractness ---------------------------------------------------------------

@dataclass
class AbstractnessStats:
    coverage: float
    density: float
    compression: float
    novel: dict[int, float]
    fragments: list[tuple[int, int]] = field(default_factory=list)


def extractive_fragments(doc: Sequence, summary: Sequence) -> list[tuple[int, int]]:
    """Greedy partition of the summary into shared fragments.

    At each summary position take the longest span that also occurs in the
    document (earliest document position on ties) and jump past it; skip one
    token when nothing matches. Returns (summary_start, length) pairs.
    """
    frags = []
    i = 0
    while i < len(summary):
        best = 0
        for j in range(len(doc)):
            k = 0
            while i + k < len(summary) and j + k < len(doc) and summary[i + k] == doc[j + k]:
                k += 1
            if k > best:
                best = k
        if best:
            frags.append((i, best))
        i += max(best, 1)
    return frags


def novel_ngram_fraction(doc: Sequence, summary: Sequence, n: int) -> float:
    summ = ngrams(summary, n)
    total = sum(summ.values())
    if not total:
        return 0.0
    seen = ngrams(doc, n)
    return sum(c for g, c in summ.items() if g not in seen) / total


def abstractness(doc, summary, max_n: int = 4) -> AbstractnessStats:
    doc, summary = _seq(doc), _seq(summary)
    if not summary:
        raise ValueError("abstractness needs a non-empty summary")
    frags = extractive_fragments(doc, summary)
    n = len(summary)
    return AbstractnessStats(
        coverage=sum(k for _, k in frags) / n,
        density=sum(k * k for _, k in frags) / n,
        compression=len(doc) / n,
        novel={k: novel_ngram_fraction(doc, summary, k) for k in range(1, max_n + 1)},
        fragments=frags,
    )


# baseline -------------------------------------------------------------------

def split_sentences(tokens: Sequence[str]) -> list[list[str]]:
    sents, cur = [], []
    for tok in tokens:
        cur.append(tok)
        if tok in SENTENCE_END:
            sents.append(cur)
            cur = []
    if cur:
        sents.append(cur)
    return sents


def lead3(doc) -> list[str]:
    """First three sentences of the document (all of them if fewer)."""
    return [tok for sent in split_sentences(_seq(doc))[:3] for tok in sent]
