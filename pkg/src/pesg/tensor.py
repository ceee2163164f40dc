"""Minimal reverse-mode automatic differentiation over numpy arrays.

Only the operations the summarizer needs are provided. Every op builds its
output eagerly and, when any input requires a gradient, records a node with a
closure that maps the output gradient to input gradients. Node ids grow with
creation order, so sorting reachable nodes by descending id is a reverse
topological order.
"""

from __future__ import annotations

import contextlib
import itertools
from typing import Iterable, Sequence

import numpy as np

DTYPE = np.float64

_ids = itertools.count()
_grad_enabled = True


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible for an op."""


class GraphReleasedError(RuntimeError):
    """Raised when backward runs twice over the same graph."""


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def is_grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "op", "id", "_parents", "_backward", "_released")

    def __init__(self, data, requires_grad: bool = False, op: str | None = None):
        self.data = np.asarray(data, dtype=DTYPE)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad and op is None else None
        self.op = op
        self.id = next(_ids)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None
        self._released = False

    def __repr__(self) -> str:
        kind = self.op or ("param" if self.requires_grad else "const")
        return f"Tensor({kind}, shape={self.shape})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    # operator sugar -------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self, axis=None):
        return sum_(self, axis)

    def mean(self, axis=None):
        return mean(self, axis)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    @property
    def T(self):
        return transpose(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data) -> Tensor:
    return Tensor(np.array(data, dtype=DTYPE), requires_grad=True)


def _check_finite(op: str, out: np.ndarray) -> None:
    if not np.isfinite(out).all():
        raise FloatingPointError(f"{op}: non-finite value produced (shape {out.shape})")


def _make(op: str, out: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    _check_finite(op, out)
    needs = _grad_enabled and any(p.requires_grad for p in parents)
    t = Tensor.__new__(Tensor)
    t.data = out
    t.requires_grad = needs
    t.grad = None
    t.op = op
    t.id = next(_ids)
    t._released = False
    if needs:
        t._parents = tuple(parents)
        t._backward = backward
    else:
        t._parents = ()
        t._backward = None
    return t


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=DTYPE)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every tensor reachable from a scalar loss.

    Parameter gradients accumulate; the caller zeroes them between steps.
    The graph is released afterwards, so a second call raises.
    """
    if loss.size != 1:
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
    if loss._released:
        raise GraphReleasedError("backward: graph already consumed; rebuild it with a new forward pass")
    if not loss.requires_grad:
        loss._released = True
        return
    nodes = []
    seen = set()
    stack = [loss]
    while stack:
        t = stack.pop()
        if t.id in seen:
            continue
        seen.add(t.id)
        nodes.append(t)
        stack.extend(p for p in t._parents if p.requires_grad)
    nodes.sort(key=lambda t: t.id, reverse=True)
    loss.grad = np.ones_like(loss.data)
    for t in nodes:
        fn = t._backward
        if fn is not None and t.grad is not None:
            fn(t.grad)
        if t.op is not None:
            t._backward = None
            t._parents = ()
            t._released = True


# elementwise ------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data + b.data
    except ValueError:
        raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}") from None

    def bw(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _make("add", out, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data - b.data
    except ValueError:
        raise ShapeError(f"sub: incompatible shapes {a.shape} and {b.shape}") from None

    def bw(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(-g, b.shape))

    return _make("sub", out, (a, b), bw)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.data * b.data
    except ValueError:
        raise ShapeError(f"mul: incompatible shapes {a.shape} and {b.shape}") from None

    def bw(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g * a.data, b.shape))

    return _make("mul", out, (a, b), bw)


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)

    def bw(g):
        _accum(x, g * out * (1.0 - out))

    return _make("sigmoid", out, (x,), bw)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def bw(g):
        _accum(x, g * (1.0 - out * out))

    return _make("tanh", out, (x,), bw)


def relu(x: Tensor) -> Tensor:
    out = np.maximum(x.data, 0.0)

    def bw(g):
        _accum(x, g * (x.data > 0.0))

    return _make("relu", out, (x,), bw)


def log(x: Tensor) -> Tensor:
    if (x.data <= 0).any():
        raise FloatingPointError("log: non-positive input")
    out = np.log(x.data)

    def bw(g):
        _accum(x, g / x.data)

    return _make("log", out, (x,), bw)


def log_floor(x: Tensor, floor: float) -> Tensor:
    """log(max(x, floor)) whose gradient 1/max(x, floor) stays alive below the floor.

    A plain clamp would zero the gradient there and strand any entry that
    falls below ``floor``.
    """
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    if (x.data < 0).any():
        raise FloatingPointError("log_floor: negative input")
    safe = np.maximum(x.data, floor)

    def bw(g):
        _accum(x, g / safe)

    return _make("log_floor", np.log(safe), (x,), bw)


def clip(x: Tensor, lo: float | None = None, hi: float | None = None) -> Tensor:
    """Clamp values; the gradient is zero where the clamp is active."""
    out = np.clip(x.data, lo, hi)

    def bw(g):
        inside = np.ones_like(x.data, dtype=bool)
        if lo is not None:
            inside &= x.data >= lo
        if hi is not None:
            inside &= x.data <= hi
        _accum(x, g * inside)

    return _make("clip", out, (x,), bw)


def dropout(x: Tensor, mask: np.ndarray | None) -> Tensor:
    """Apply a precomputed (inverted) dropout mask; ``None`` is identity."""
    if mask is None:
        return x
    if mask.shape != x.shape:
        raise ShapeError(f"dropout: mask shape {mask.shape} does not match input {x.shape}")

    def bw(g):
        _accum(x, g * mask)

    return _make("dropout", x.data * mask, (x,), bw)


# reductions and shape ops ----------------------------------------------

def sum_(x: Tensor, axis=None) -> Tensor:
    out = np.asarray(x.data.sum(axis=axis))

    def bw(g):
        if axis is None:
            _accum(x, np.broadcast_to(g, x.shape))
        else:
            _accum(x, np.broadcast_to(np.expand_dims(g, axis), x.shape))

    return _make("sum", out, (x,), bw)


def mean(x: Tensor, axis=None) -> Tensor:
    n = x.size if axis is None else x.shape[axis]
    out = np.asarray(x.data.mean(axis=axis))

    def bw(g):
        if axis is None:
            _accum(x, np.broadcast_to(g / n, x.shape))
        else:
            _accum(x, np.broadcast_to(np.expand_dims(g / n, axis), x.shape))

    return _make("mean", out, (x,), bw)


def reshape(x: Tensor, shape) -> Tensor:
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {x.shape} to {tuple(shape)}") from None

    def bw(g):
        _accum(x, g.reshape(x.shape))

    return _make("reshape", out, (x,), bw)


def transpose(x: Tensor) -> Tensor:
    def bw(g):
        _accum(x, g.T)

    return _make("transpose", x.data.T, (x,), bw)


def getitem(x: Tensor, index) -> Tensor:
    out = np.array(x.data[index])

    def bw(g):
        full = np.zeros_like(x.data)
        if _is_fancy(index):
            np.add.at(full, index, g)
        else:
            full[index] = g
        _accum(x, full)

    return _make("getitem", out, (x,), bw)


def _is_fancy(index) -> bool:
    if isinstance(index, tuple):
        return any(isinstance(i, (list, np.ndarray)) for i in index)
    return isinstance(index, (list, np.ndarray))


def concat(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    try:
        out = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError:
        shapes = ", ".join(str(x.shape) for x in xs)
        raise ShapeError(f"concat: incompatible shapes along axis {axis}: {shapes}") from None
    bounds = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def bw(g):
        for x, part in zip(xs, np.split(g, bounds, axis=axis)):
            _accum(x, part)

    return _make("concat", out, xs, bw)


def stack(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    try:
        out = np.stack([x.data for x in xs], axis=axis)
    except ValueError:
        shapes = ", ".join(str(x.shape) for x in xs)
        raise ShapeError(f"stack: shapes differ: {shapes}") from None

    def bw(g):
        for i, x in enumerate(xs):
            _accum(x, np.take(g, i, axis=axis))

    return _make("stack", out, xs, bw)


# linear algebra ---------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim == 0 or b.data.ndim == 0 or a.shape[-1] != b.shape[0] or b.data.ndim > 2 or a.data.ndim > 2:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = a.data @ b.data

    def bw(g):
        ad, bd = a.data, b.data
        if a.requires_grad:
            if bd.ndim == 1:
                ga = np.multiply.outer(g, bd)
            else:
                ga = g @ bd.T
            _accum(a, ga)
        if b.requires_grad:
            if ad.ndim == 1:
                gb = np.multiply.outer(ad, g)
            elif bd.ndim == 1:
                gb = ad.T @ g
            else:
                gb = ad.T @ g
            _accum(b, gb)

    return _make("matmul", out, (a, b), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    out = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        _accum(x, out * (g - (g * out).sum(axis=axis, keepdims=True)))

    return _make("softmax", out, (x,), bw)


def embedding(weight: Tensor, ids) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= weight.shape[0]):
        raise ShapeError(f"embedding: id out of range for table of shape {weight.shape}")
    out = weight.data[ids]

    def bw(g):
        full = np.zeros_like(weight.data)
        np.add.at(full, ids, g)
        _accum(weight, full)

    return _make("embedding", out, (weight,), bw)


def pick(x: Tensor, index) -> Tensor:
    """Gather one entry per row: ``out[t] = x[t, index[t]]`` (NLL gather)."""
    index = np.asarray(index, dtype=np.int64)
    if x.data.ndim != 2 or index.shape != (x.shape[0],):
        raise ShapeError(f"pick: need a matrix and one index per row, got {x.shape} and {index.shape}")
    rows = np.arange(x.shape[0])
    out = x.data[rows, index]

    def bw(g):
        full = np.zeros_like(x.data)
        full[rows, index] = g
        _accum(x, full)

    return _make("pick", out, (x,), bw)


def scatter_add(values: Tensor, index, size: int) -> Tensor:
    """Scatter the last axis of ``values`` onto ``size`` slots by ``index``."""
    index = np.asarray(index, dtype=np.int64)
    if values.shape[-1] != index.shape[0]:
        raise ShapeError(f"scatter_add: values {values.shape} vs index {index.shape}")
    if index.size and (index.min() < 0 or index.max() >= size):
        raise ShapeError(f"scatter_add: index out of range for size {size}")
    out = np.zeros(values.shape[:-1] + (size,))
    np.add.at(out, (..., index), values.data)

    def bw(g):
        _accum(values, g[..., index])

    return _make("scatter_add", out, (values,), bw)


def conv1d(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """Same-padded 1-D convolution over a (T, C_in) sequence.

    ``kernel`` has shape (width, C_in, C_out) with odd width; positions
    beyond either end read zeros.
    """
    width, c_in, c_out = kernel.shape
    if x.data.ndim != 2 or x.shape[1] != c_in or width % 2 == 0 or bias.shape != (c_out,):
        raise ShapeError(f"conv1d: input {x.shape}, kernel {kernel.shape}, bias {bias.shape}")
    T = x.shape[0]
    pad = width // 2
    xp = np.zeros((T + 2 * pad, c_in))
    xp[pad:pad + T] = x.data
    cols = np.concatenate([xp[o:o + T] for o in range(width)], axis=1)
    kmat = kernel.data.reshape(width * c_in, c_out)
    out = cols @ kmat + bias.data

    def bw(g):
        if kernel.requires_grad:
            _accum(kernel, (cols.T @ g).reshape(kernel.shape))
        if bias.requires_grad:
            _accum(bias, g.sum(axis=0))
        if x.requires_grad:
            gcols = g @ kmat.T
            gxp = np.zeros_like(xp)
            for o in range(width):
                gxp[o:o + T] += gcols[:, o * c_in:(o + 1) * c_in]
            _accum(x, gxp[pad:pad + T])

    return _make("conv1d", out, (x, kernel, bias), bw)


# fused recurrent cells ---------------------------------------------------

def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * z) + 1.0)


def lstm_cell(xp: Tensor, hc: Tensor, U: Tensor) -> Tensor:
    """One LSTM step. ``xp`` is the input projection (4H, gate order i,f,o,g),
    ``hc`` the previous [h; c] (2H). Returns the new [h; c]."""
    H = U.shape[0]
    if U.shape != (H, 4 * H) or xp.shape != (4 * H,) or hc.shape != (2 * H,):
        raise ShapeError(f"lstm_cell: xp {xp.shape}, hc {hc.shape}, U {U.shape}")
    h, c = hc.data[:H], hc.data[H:]
    z = xp.data + h @ U.data
    s = _sigmoid(z[:3 * H])
    i, f, o = s[:H], s[H:2 * H], s[2 * H:]
    gg = np.tanh(z[3 * H:])
    c2 = f * c + i * gg
    tc = np.tanh(c2)
    h2 = o * tc
    out = np.concatenate([h2, c2])

    def bw(g):
        dh, dc = g[:H], g[H:]
        dct = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dct * gg * i * (1.0 - i),
            dct * c * f * (1.0 - f),
            dh * tc * o * (1.0 - o),
            dct * i * (1.0 - gg * gg),
        ])
        _accum(xp, dz)
        if hc.requires_grad:
            _accum(hc, np.concatenate([U.data @ dz, dct * f]))
        if U.requires_grad:
            _accum(U, np.multiply.outer(h, dz))

    return _make("lstm_cell", out, (xp, hc, U), bw)


def gru_cell(xp: Tensor, h: Tensor, U: Tensor) -> Tensor:
    """One GRU step with the candidate computed as tanh(x_h + r * (U_h h)).

    ``xp`` holds input projections [x_u; x_r; x_h] (3n) and ``U`` the
    recurrent matrices [U_u | U_r | U_h] (n, 3n).
    """
    n = h.shape[0]
    if U.shape != (n, 3 * n) or xp.shape != (3 * n,) or h.shape != (n,):
        raise ShapeError(f"gru_cell: xp {xp.shape}, h {h.shape}, U {U.shape}")
    hv = h.data
    hu = hv @ U.data
    u = _sigmoid(xp.data[:n] + hu[:n])
    r = _sigmoid(xp.data[n:2 * n] + hu[n:2 * n])
    hh = hu[2 * n:]
    cand = np.tanh(xp.data[2 * n:] + r * hh)
    out = u * cand + (1.0 - u) * hv

    def bw(g):
        du = g * (cand - hv)
        dzh = g * u * (1.0 - cand * cand)
        dzr = dzh * hh * r * (1.0 - r)
        dzu = du * u * (1.0 - u)
        dhu = np.concatenate([dzu, dzr, dzh * r])
        _accum(xp, np.concatenate([dzu, dzr, dzh]))
        if h.requires_grad:
            _accum(h, g * (1.0 - u) + U.data @ dhu)
        if U.requires_grad:
            _accum(U, np.multiply.outer(hv, dhu))

    return _make("gru_cell", out, (xp, h, U), bw)


def sru_cell(xp: Tensor, gate: Tensor, h: Tensor, U: Tensor) -> Tensor:
    """GRU step whose update gate is supplied externally as a scalar.

    ``xp`` holds [x_r; x_h] (2n), ``U`` is [U_r | U_h] (n, 2n) and ``gate``
    a 0-d tensor that scales the candidate against the carried state.
    """
    n = h.shape[0]
    if U.shape != (n, 2 * n) or xp.shape != (2 * n,) or gate.size != 1:
        raise ShapeError(f"sru_cell: xp {xp.shape}, gate {gate.shape}, h {h.shape}, U {U.shape}")
    hv = h.data
    gv = float(gate.data)
    hu = hv @ U.data
    r = _sigmoid(xp.data[:n] + hu[:n])
    hh = hu[n:]
    cand = np.tanh(xp.data[n:] + r * hh)
    out = gv * cand + (1.0 - gv) * hv

    def bw(g):
        if gate.requires_grad:
            _accum(gate, np.reshape(np.dot(g, cand - hv), gate.shape))
        dzh = g * gv * (1.0 - cand * cand)
        dzr = dzh * hh * r * (1.0 - r)
        dhu = np.concatenate([dzr, dzh * r])
        _accum(xp, np.concatenate([dzr, dzh]))
        if h.requires_grad:
            _accum(h, g * (1.0 - gv) + U.data @ dhu)
        if U.requires_grad:
            _accum(U, np.multiply.outer(hv, dhu))

    return _make("sru_cell", out, (xp, gate, h, U), bw)


def lstm_sequence(xp: Tensor, U: Tensor, reverse: bool = False) -> Tensor:
    """Whole-sequence LSTM from zero state with a hand-written BPTT backward.

    ``xp`` holds per-step input projections (T, 4H), gate order i,f,o,g.
    Returns hidden states (T, H) indexed by position; ``reverse`` runs the
    recurrence from the last position to the first.
    """
    steps, width = xp.shape
    H = U.shape[0]
    if U.shape != (H, 4 * H) or width != 4 * H:
        raise ShapeError(f"lstm_sequence: xp {xp.shape}, U {U.shape}")
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    Ud = U.data
    gates = np.empty((steps, 4 * H))
    cs = np.empty((steps, H))
    tcs = np.empty((steps, H))
    hprev = np.empty((steps, H))
    cprev = np.empty((steps, H))
    out = np.empty((steps, H))
    h = np.zeros(H)
    c = np.zeros(H)
    for t in order:
        hprev[t], cprev[t] = h, c
        z = xp.data[t] + h @ Ud
        s = _sigmoid(z[:3 * H])
        gg = np.tanh(z[3 * H:])
        c = s[H:2 * H] * c + s[:H] * gg
        tc = np.tanh(c)
        h = s[2 * H:] * tc
        gates[t, :3 * H], gates[t, 3 * H:] = s, gg
        cs[t], tcs[t], out[t] = c, tc, h

    def bw(g):
        dZ = np.empty((steps, 4 * H))
        dh_next = np.zeros(H)
        dc_next = np.zeros(H)
        for t in reversed(order):
            i, f, o, gg = gates[t, :H], gates[t, H:2 * H], gates[t, 2 * H:3 * H], gates[t, 3 * H:]
            tc = tcs[t]
            dh = g[t] + dh_next
            dct = dc_next + dh * o * (1.0 - tc * tc)
            dz = dZ[t]
            dz[:H] = dct * gg * i * (1.0 - i)
            dz[H:2 * H] = dct * cprev[t] * f * (1.0 - f)
            dz[2 * H:3 * H] = dh * tc * o * (1.0 - o)
            dz[3 * H:] = dct * i * (1.0 - gg * gg)
            dh_next = Ud @ dz
            dc_next = dct * f
        _accum(xp, dZ)
        if U.requires_grad:
            _accum(U, hprev.T @ dZ)

    return _make("lstm_sequence", out, (xp, U), bw)


def sru_sequence(xp: Tensor, gate: Tensor, U: Tensor) -> Tensor:
    """Run ``sru_cell`` over all positions from a zero state; returns the last state.

    ``xp`` is (T, 2n), ``gate`` (T,) holds the per-position update gates.
    """
    steps = xp.shape[0]
    n = U.shape[0]
    if U.shape != (n, 2 * n) or xp.shape != (steps, 2 * n) or gate.shape != (steps,):
        raise ShapeError(f"sru_sequence: xp {xp.shape}, gate {gate.shape}, U {U.shape}")
    Ud, gv = U.data, gate.data
    rs = np.empty((steps, n))
    cands = np.empty((steps, n))
    hhs = np.empty((steps, n))
    hprev = np.empty((steps, n))
    h = np.zeros(n)
    for t in range(steps):
        hprev[t] = h
        hu = h @ Ud
        r = _sigmoid(xp.data[t, :n] + hu[:n])
        cand = np.tanh(xp.data[t, n:] + r * hu[n:])
        h = gv[t] * cand + (1.0 - gv[t]) * h
        rs[t], cands[t], hhs[t] = r, cand, hu[n:]

    def bw(g):
        dxp = np.empty((steps, 2 * n))
        dhu = np.empty((steps, 2 * n))
        dgate = np.empty(steps)
        dh = np.array(g, dtype=DTYPE)
        for t in range(steps - 1, -1, -1):
            r, cand = rs[t], cands[t]
            dgate[t] = dh @ (cand - hprev[t])
            dzh = dh * gv[t] * (1.0 - cand * cand)
            dzr = dzh * hhs[t] * r * (1.0 - r)
            dxp[t, :n], dxp[t, n:] = dzr, dzh
            dhu[t, :n], dhu[t, n:] = dzr, dzh * r
            dh = dh * (1.0 - gv[t]) + Ud @ dhu[t]
        _accum(xp, dxp)
        _accum(gate, dgate)
        if U.requires_grad:
            _accum(U, hprev.T @ dhu)

    return _make("sru_sequence", h, (xp, gate, U), bw)


# misc -------------------------------------------------------------------

def dropout_mask(shape, keep_prob: float, rng: np.random.Generator | None, training: bool = True):
    """Inverted-dropout mask: entries are 1/keep_prob with probability keep_prob.

    Returns ``None`` (identity) at inference or without a generator.
    """
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not training or rng is None:
        return None
    if keep_prob == 1.0:
        return np.ones(shape)
    return (rng.random(shape) < keep_prob) / keep_prob


def zeros(*shape) -> Tensor:
    return Tensor(np.zeros(shape))


def parameters_grad_norm(params: Iterable[Tensor]) -> float:
    return float(np.sqrt(sum(float((p.grad ** 2).sum()) for p in params if p.grad is not None)))
