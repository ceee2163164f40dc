"""Tokenisation, vocabulary, example encoding and corpus files."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
RESERVED = (PAD, UNK, BOS, EOS)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3
TAGS = ("PERS", "NUM", "DATE", "MONEY", "YEARS", "MONTHS")
RECORD_FIELDS = ("doc", "summary", "proto_doc", "proto_summary")


def tokenize(text: str) -> list[str]:
    return text.split()


class Vocabulary:
    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:4]) != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.itos = list(tokens)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def id(self, token: str) -> int:
        return self.stoi.get(token, UNK_ID)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.stoi.get(t, UNK_ID) for t in tokens]

    def token(self, i: int) -> str:
        return self.itos[i]

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.itos) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls(Path(path).read_text(encoding="utf-8").splitlines())


def build_vocab(corpus: Iterable[Sequence[str]], cap: int = 5000) -> Vocabulary:
    """Most frequent tokens up to ``cap`` entries in total.

    Reserved symbols and anonymisation tags are always present; frequency
    ties go to the token seen first.
    """
    if cap <= len(RESERVED) + len(TAGS):
        raise ValueError(f"vocabulary cap must exceed {len(RESERVED) + len(TAGS)}, got {cap}")
    counts: Counter = Counter()
    first: dict[str, int] = {}
    n = 0
    for tokens in corpus:
        for tok in tokens:
            counts[tok] += 1
            if tok not in first:
                first[tok] = n
            n += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    itos = list(RESERVED) + list(TAGS)
    fixed = set(itos)
    ranked = sorted((t for t in counts if t not in fixed), key=lambda t: (-counts[t], first[t]))
    itos.extend(ranked[: cap - len(itos)])
    return Vocabulary(itos)


@dataclass
class Example:
    """One encoded record. Ids >= len(vocab) index ``oov_map``."""

    doc: list[int]
    summary: list[int]
    proto_doc: list[int]
    proto_summary: list[int]
    oov_map: list[str] = field(default_factory=list)
    doc_tokens: list[str] = field(default_factory=list)
    summary_tokens: list[str] = field(default_factory=list)

    def doc_input_ids(self, vocab_size: int) -> list[int]:
        """Doc ids with extended ids folded to UNK, for embedding lookup."""
        return [i if i < vocab_size else UNK_ID for i in self.doc]

    @property
    def targets(self) -> list[int]:
        return self.summary + [EOS_ID]


def encode_example(record: dict, vocab: Vocabulary, max_src: int = 250, max_tgt: int = 100) -> Example:
    for name in RECORD_FIELDS:
        if name not in record:
            raise ValueError(f"record is missing field {name!r}")
    doc = _tokens(record["doc"])[:max_src]
    summary = _tokens(record["summary"])[:max_tgt]
    proto_doc = _tokens(record["proto_doc"])[:max_src]
    proto_summary = _tokens(record["proto_summary"])[:max_tgt]
    for name, seq in (("doc", doc), ("proto_doc", proto_doc), ("proto_summary", proto_summary)):
        if not seq:
            raise ValueError(f"record field {name!r} is empty")

    oov_map: list[str] = []
    oov_ids: dict[str, int] = {}
    doc_ids = []
    for tok in doc:
        if tok in vocab:
            doc_ids.append(vocab.id(tok))
        else:
            if tok not in oov_ids:
                oov_ids[tok] = len(vocab) + len(oov_map)
                oov_map.append(tok)
            doc_ids.append(oov_ids[tok])
    summary_ids = [vocab.id(t) if t in vocab else oov_ids.get(t, UNK_ID) for t in summary]
    return Example(
        doc=doc_ids,
        summary=summary_ids,
        proto_doc=vocab.encode(proto_doc),
        proto_summary=vocab.encode(proto_summary),
        oov_map=oov_map,
        doc_tokens=doc,
        summary_tokens=summary,
    )


def decode_ids(ids: Iterable[int], vocab: Vocabulary, oov_map: Sequence[str]) -> list[str]:
    out = []
    n = len(vocab)
    for i in ids:
        if 0 <= i < n:
            out.append(vocab.token(i))
        elif n <= i < n + len(oov_map):
            out.append(oov_map[i - n])
        else:
            raise IndexError(f"id {i} is outside vocabulary ({n}) plus {len(oov_map)} source OOVs")
    return out


def pad(ids: Sequence[int], length: int) -> tuple[list[int], list[float]]:
    """Cut or pad to ``length``; returns (ids, mask)."""
    ids = list(ids[:length])
    mask = [1.0] * len(ids) + [0.0] * (length - len(ids))
    return ids + [PAD_ID] * (length - len(ids)), mask


def _tokens(value) -> list[str]:
    return tokenize(value) if isinstance(value, str) else list(value)


# corpus files -------------------------------------------------------------

def read_jsonl(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON record ({exc.msg})") from None
    return records


def write_jsonl(path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def corpus_tokens(records: Iterable[dict]) -> Iterable[list[str]]:
    for rec in records:
        yield tokenize(rec["doc"])
        yield tokenize(rec["summary"])
