"""Named parameter registry, Gaussian initialisation, and checkpoint files.

Checkpoint layout (all integers little-endian)::

    magic    8 bytes   b"PESGCKPT"
    version  uint32    currently 1
    step     uint64
    meta     uint32 length + UTF-8 JSON (config snapshot, free-form)
    params   tensor section
    accum    tensor section (Adagrad accumulators, same names/order)

    tensor section: uint32 count, then per tensor
        uint16 name length, UTF-8 name, uint8 ndim, uint32 dims...,
        float64 values in row-major order
"""

from __future__ import annotations

import json
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Iterator

import numpy as np

from .tensor import Tensor, parameter

MAGIC = b"PESGCKPT"
VERSION = 1


class CheckpointError(ValueError):
    pass


class ModelParams:
    """Ordered name -> trainable tensor map with a fixed shape registry."""

    def __init__(self):
        self._tensors: "OrderedDict[str, Tensor]" = OrderedDict()

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise KeyError(f"duplicate parameter {name!r}")
        t = parameter(value)
        self._tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    def tensors(self) -> list[Tensor]:
        return list(self._tensors.values())

    @property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {k: t.shape for k, t in self._tensors.items()}

    def num_values(self) -> int:
        return sum(t.size for t in self._tensors.values())

    def zero_grad(self) -> None:
        for t in self._tensors.values():
            t.zero_grad()

    def state(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self._tensors.items()}

    def load_state(self, values: dict[str, np.ndarray]) -> None:
        check_registry(self.shapes, {k: v.shape for k, v in values.items()})
        for k, t in self._tensors.items():
            t.data = np.array(values[k], dtype=np.float64)


def check_registry(expected: dict, found: dict) -> None:
    """Raise naming the first tensor whose presence or shape differs."""
    for name, shape in expected.items():
        if name not in found:
            raise CheckpointError(f"shape registry mismatch: missing tensor {name!r}")
        if tuple(found[name]) != tuple(shape):
            raise CheckpointError(
                f"shape registry mismatch: tensor {name!r} expected {tuple(shape)}, found {tuple(found[name])}"
            )
    extra = [n for n in found if n not in expected]
    if extra:
        raise CheckpointError(f"shape registry mismatch: unexpected tensor {extra[0]!r}")


def truncated_normal(rng: np.random.Generator, shape, std: float = 0.1) -> np.ndarray:
    """Zero-mean Gaussian truncated at two standard deviations (resampling)."""
    out = rng.normal(0.0, std, size=shape)
    bad = np.abs(out) > 2 * std
    while bad.any():
        out[bad] = rng.normal(0.0, std, size=int(bad.sum()))
        bad = np.abs(out) > 2 * std
    return out


# checkpoint io ------------------------------------------------------------

def _write_section(buf: bytearray, tensors: "OrderedDict[str, np.ndarray]") -> None:
    buf += struct.pack("<I", len(tensors))
    for name, arr in tensors.items():
        raw = name.encode("utf-8")
        arr = np.asarray(arr, dtype="<f8")
        buf += struct.pack("<H", len(raw)) + raw
        buf += struct.pack("<B", arr.ndim)
        buf += struct.pack(f"<{arr.ndim}I", *arr.shape)
        buf += arr.tobytes(order="C")


def _read_section(data: bytes, pos: int):
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    out: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for _ in range(count):
        (n,) = struct.unpack_from("<H", data, pos)
        pos += 2
        name = data[pos:pos + n].decode("utf-8")
        pos += n
        (ndim,) = struct.unpack_from("<B", data, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", data, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=size, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * size
        out[name] = arr
    return out, pos


def checkpoint_bytes(params: ModelParams, accumulators: dict[str, np.ndarray] | None, step: int,
                     meta: dict | None = None) -> bytes:
    buf = bytearray(MAGIC)
    buf += struct.pack("<IQ", VERSION, step)
    meta_raw = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    buf += struct.pack("<I", len(meta_raw)) + meta_raw
    _write_section(buf, OrderedDict((k, t.data) for k, t in params.items()))
    acc = OrderedDict((k, accumulators[k]) for k in params) if accumulators else OrderedDict()
    _write_section(buf, acc)
    return bytes(buf)


def save_checkpoint(path, params: ModelParams, accumulators: dict[str, np.ndarray] | None, step: int,
                    meta: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(checkpoint_bytes(params, accumulators, step, meta))
    tmp.replace(path)


def read_checkpoint(path):
    """Return (values, accumulators, step, meta) without touching a model."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic bytes)")
    version, step = struct.unpack_from("<IQ", data, 8)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version} (expected {VERSION})")
    pos = 20
    (n,) = struct.unpack_from("<I", data, pos)
    pos += 4
    meta = json.loads(data[pos:pos + n].decode("utf-8"))
    pos += n
    values, pos = _read_section(data, pos)
    acc, pos = _read_section(data, pos)
    if pos != len(data):
        raise CheckpointError(f"{path}: trailing bytes after checkpoint payload")
    return values, (dict(acc) or None), step, meta


def load_checkpoint(path, params: ModelParams):
    """Load values into ``params`` in place; returns (accumulators, step, meta)."""
    values, acc, step, meta = read_checkpoint(path)
    params.load_state(values)
    if acc is not None:
        check_registry(params.shapes, {k: v.shape for k, v in acc.items()})
    return acc, step, meta
