"""TF-IDF cosine retrieval of prototype (document, summary) pairs.

Index file format (JSON lines, UTF-8)::

    {"format": "pesg-index", "version": 1, "n_docs": N, "idf": {term: idf, ...}}
    {"id": 0, "doc": "...", "summary": "..."}
    ...

Term weights are recomputed from ``idf`` and the stored text on load.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .text import tokenize

FORMAT = "pesg-index"
VERSION = 1


class Retrieved(NamedTuple):
    doc_id: int
    doc: str
    summary: str
    score: float


@dataclass
class ProtoIndex:
    docs: list[str]
    summaries: list[str]
    idf: dict[str, float]
    weights: list[dict[str, float]]
    norms: list[float]
    postings: dict[str, list[tuple[int, float]]]

    def __len__(self) -> int:
        return len(self.docs)

    def vector(self, tokens: Sequence[str]) -> dict[str, float]:
        tf = Counter(tokens)
        return {t: c * self.idf[t] for t, c in tf.items() if self.idf.get(t, 0.0) != 0.0}

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {"format": FORMAT, "version": VERSION, "n_docs": len(self.docs), "idf": self.idf}
            fh.write(json.dumps(header, ensure_ascii=False, sort_keys=True) + "\n")
            for i, (d, s) in enumerate(zip(self.docs, self.summaries)):
                fh.write(json.dumps({"id": i, "doc": d, "summary": s}, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path) -> "ProtoIndex":
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != FORMAT or header.get("version") != VERSION:
                raise ValueError(f"{path}: not a version-{VERSION} prototype index")
            rows = [json.loads(line) for line in fh if line.strip()]
        if len(rows) != header["n_docs"]:
            raise ValueError(f"{path}: header says {header['n_docs']} documents, found {len(rows)}")
        rows.sort(key=lambda r: r["id"])
        return _assemble([r["doc"] for r in rows], [r["summary"] for r in rows], header["idf"])


def build_index(records: Sequence[dict]) -> ProtoIndex:
    """Index ``records`` (each with ``doc`` and ``summary``) with IDF = ln(N/df), TF = raw count."""
    if not records:
        raise ValueError("cannot index an empty corpus")
    docs = [r["doc"] if isinstance(r["doc"], str) else " ".join(r["doc"]) for r in records]
    sums = [r["summary"] if isinstance(r["summary"], str) else " ".join(r["summary"]) for r in records]
    df: Counter = Counter()
    for d in docs:
        df.update(set(tokenize(d)))
    n = len(docs)
    idf = {t: math.log(n / c) for t, c in sorted(df.items())}
    return _assemble(docs, sums, idf)


def _assemble(docs, sums, idf) -> ProtoIndex:
    index = ProtoIndex(docs=list(docs), summaries=list(sums), idf=dict(idf), weights=[], norms=[],
                       postings=defaultdict(list))
    for i, d in enumerate(docs):
        w = index.vector(tokenize(d))
        index.weights.append(w)
        index.norms.append(math.sqrt(sum(v * v for v in w.values())))
        for t, v in w.items():
            index.postings[t].append((i, v))
    return index


def scores(index: ProtoIndex, query: str | Sequence[str]) -> list[float]:
    """Cosine similarity of the query against every indexed document."""
    tokens = tokenize(query) if isinstance(query, str) else list(query)
    q = index.vector(tokens)
    qn = math.sqrt(sum(v * v for v in q.values()))
    dots = [0.0] * len(index)
    for t, qv in q.items():
        for i, dv in index.postings.get(t, ()):
            dots[i] += qv * dv
    out = []
    for i, dot in enumerate(dots):
        denom = qn * index.norms[i]
        out.append(min(max(dot / denom, 0.0), 1.0) if denom > 0 else 0.0)
    return out


def retrieve_top(index: ProtoIndex, query, k: int = 1, exclude_id: int | None = None) -> list[Retrieved]:
    s = scores(index, query)
    candidates = [i for i in range(len(index)) if i != exclude_id]
    if not candidates:
        raise ValueError("no candidate documents left after exclusion")
    candidates.sort(key=lambda i: (-s[i], i))
    return [Retrieved(i, index.docs[i], index.summaries[i], s[i]) for i in candidates[:k]]


def retrieve(index: ProtoIndex, query, exclude_id: int | None = None) -> Retrieved:
    """Best-scoring (document, summary) pair; ties go to the lowest id."""
    return retrieve_top(index, query, 1, exclude_id)[0]


def attach_prototypes(records: Sequence[dict], index: ProtoIndex, self_exclude: bool = True) -> list[int]:
    """Prototype id for each record; record i is never its own prototype when
    ``self_exclude`` is set (records are assumed to be the indexed corpus)."""
    return [retrieve(index, r["doc"], i if self_exclude else None).doc_id for i, r in enumerate(records)]
