from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class TrainConfig:
    """Model and optimisation settings.

    Defaults are the full-scale settings (256-d embeddings and hidden units,
    batch 64, keep probability 0.7, clip [-5, 5], beam 5, unit loss weights,
    250/100 source/target lengths). ``hops`` and ``lr`` have no published
    value. ``toy()`` gives the desk-scale profile used by the tests.
    """

    embedding_dim: int = 256
    hidden: int = 256
    vocab_size: int = 5000
    batch_size: int = 64
    keep_prob: float = 0.7
    clip: tuple[float, float] = (-5.0, 5.0)
    beam: int = 5
    epsilon: float = 1.0
    eta: float = 1.0
    hops: int = 3
    max_src: int = 250
    max_tgt: int = 100
    lr: float = 0.15
    adagrad_eps: float = 1e-8
    initial_accumulator: float = 0.1
    init_std: float = 0.1
    seed: int = 0
    steps: int = 1000
    checkpoint_every: int = 500
    normalize_attention: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.clip = tuple(self.clip)
        if not 1 <= self.hops <= 8:
            raise ValueError(f"hops must be in 1..8, got {self.hops}")
        if not 0.0 < self.keep_prob <= 1.0:
            raise ValueError(f"keep_prob must be in (0, 1], got {self.keep_prob}")

    @property
    def channels(self) -> int:
        return 2 * self.hidden

    @property
    def dec_hidden(self) -> int:
        return 2 * self.hidden

    @classmethod
    def toy(cls, **overrides) -> "TrainConfig":
        base = dict(embedding_dim=32, hidden=32, vocab_size=500, batch_size=4, max_src=80, max_tgt=40,
                    steps=2000, checkpoint_every=500)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["clip"] = list(self.clip)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)
