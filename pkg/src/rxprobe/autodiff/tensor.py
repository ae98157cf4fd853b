"""Dense tensors with a reverse-mode tape.

Complex tensors follow the "real and imaginary parts are independent real
leaves" convention: the gradient stored for a complex tensor ``z = a + ib``
is ``dL/da + i dL/db``. Losses must be real scalars.

Operations are only recorded while a :class:`Tape` is active (it is a
context manager backed by a ``ContextVar``, so independent tapes in
different threads or tasks never see each other).
"""
from __future__ import annotations

import contextvars
from typing import Callable, Iterable, Sequence

import numpy as np

_ACTIVE_TAPE: contextvars.ContextVar["Tape | None"] = contextvars.ContextVar(
    "rxprobe_active_tape", default=None
)


class ShapeError(ValueError):
    """Raised when an op receives inputs of incompatible shape."""


class GradientError(RuntimeError):
    """Raised for invalid backward calls (non-scalar or complex loss, ...)."""


def _as_array(value) -> np.ndarray:
    arr = np.asarray(value)
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    return arr.astype(np.float64, copy=False)


class Tensor:
    """A dense float64/complex128 array that can take part in a tape."""

    __slots__ = ("data", "requires_grad", "grad", "name", "__weakref__")
    __array_priority__ = 100.0

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        if isinstance(data, Tensor):
            data = data.data
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self):
        return self.data.item()

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # -- arithmetic -------------------------------------------------------
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

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)

    # -- method forms -----------------------------------------------------
    @property
    def real(self) -> "Tensor":
        return real(self)

    @property
    def imag(self) -> "Tensor":
        return imag(self)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def conj(self) -> "Tensor":
        return conj(self)

    def abs2(self) -> "Tensor":
        return abs2(self)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)


def tensor(data, requires_grad: bool = False, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


# -- tape ---------------------------------------------------------------------

VJP = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


class TapeEntry:
    __slots__ = ("kind", "inputs", "output", "vjp")

    def __init__(self, kind: str, inputs: tuple[Tensor, ...], output: Tensor, vjp: VJP):
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.vjp = vjp


class Tape:
    """Ordered record of differentiable operations.

    Usage::

        with Tape() as tape:
            loss = f(x)
        grads = tape.backward(loss)
    """

    def __init__(self):
        self.entries: list[TapeEntry] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: TapeEntry) -> None:
        self.entries.append(entry)

    def backward(self, loss: Tensor, wrt: Iterable[Tensor] = ()) -> dict[Tensor, np.ndarray]:
        """Propagate d(loss) to every ``requires_grad`` leaf seen on the tape.

        Leaves get their ``.grad`` overwritten. Leaves listed in ``wrt`` that
        the loss does not depend on receive zeros.
        """
        if loss.size != 1:
            raise GradientError(f"backward needs a scalar loss, got shape {loss.shape}")
        if loss.is_complex:
            raise GradientError("backward needs a real-valued loss")

        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        produced = {id(e.output) for e in self.entries}
        leaves: dict[int, Tensor] = {
            id(t): t
            for e in self.entries
            for t in e.inputs
            if t.requires_grad and id(t) not in produced
        }
        for entry in reversed(self.entries):
            g = grads.pop(id(entry.output), None)
            if g is None:
                continue
            in_grads = entry.vjp(g)
            for inp, gi in zip(entry.inputs, in_grads):
                if gi is None or not inp.requires_grad:
                    continue
                gi = _fit(gi, inp)
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + gi
                else:
                    grads[key] = gi

        out: dict[Tensor, np.ndarray] = {}
        for leaf in list(leaves.values()) + list(wrt):
            g = grads.get(id(leaf))
            if g is None:
                g = np.zeros_like(leaf.data)
            leaf.grad = g
            out[leaf] = g
        if not self.entries and loss.requires_grad:
            loss.grad = np.ones_like(loss.data)
            out[loss] = loss.grad
        return out


def active_tape() -> Tape | None:
    return _ACTIVE_TAPE.get()


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _fit(g: np.ndarray, inp: Tensor) -> np.ndarray:
    g = _unbroadcast(np.asarray(g), inp.shape)
    if not inp.is_complex and np.iscomplexobj(g):
        g = g.real
    return g


def record(kind: str, out_data: np.ndarray, inputs: Sequence[Tensor], vjp: VJP) -> Tensor:
    """Wrap ``out_data`` as a tensor and log the op if a tape is active."""
    out = Tensor(out_data)
    tape = _ACTIVE_TAPE.get()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.append(TapeEntry(kind, tuple(inputs), out, vjp))
    return out


def _broadcast_check(kind: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{kind}: incompatible shapes {a.shape} and {b.shape}") from None


# -- elementwise ---------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("add", a, b)
    return record("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("sub", a, b)
    return record("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def neg(a) -> Tensor:
    a = as_tensor(a)
    return record("neg", -a.data, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("mul", a, b)

    def vjp(g):
        return (
            g * np.conj(b.data) if a.requires_grad else None,
            g * np.conj(a.data) if b.requires_grad else None,
        )

    return record("mul", a.data * b.data, (a, b), vjp)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("div", a, b)
    out = a.data / b.data

    def vjp(g):
        ga = g / np.conj(b.data) if a.requires_grad else None
        gb = -g * np.conj(out / b.data) if b.requires_grad else None
        return ga, gb

    return record("div", out, (a, b), vjp)


def power(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    p = float(exponent)
    out = a.data ** p
    return record("pow", out, (a,), lambda g: (g * np.conj(p * a.data ** (p - 1)),))


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return record("sqrt", out, (a,), lambda g: (g / np.conj(2.0 * out),))


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    return record("exp", out, (a,), lambda g: (g * np.conj(out),))


def log(a) -> Tensor:
    a = as_tensor(a)
    return record("log", np.log(a.data), (a,), lambda g: (g / np.conj(a.data),))


def cis(phase) -> Tensor:
    """exp(i * phase) for a real phase tensor."""
    phase = as_tensor(phase)
    if phase.is_complex:
        raise TypeError("cis expects a real phase")
    out = np.exp(1j * phase.data)
    return record("cis", out, (phase,), lambda g: ((np.conj(g) * 1j * out).real,))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = _stable_sigmoid(a.data)
    return record("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(a) -> Tensor:
    """log(1 + exp(a)), computed without overflow."""
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return record("softplus", out, (a,), lambda g: (g * _stable_sigmoid(x),))


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return record("relu", a.data * mask, (a,), lambda g: (g * mask,))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return record("tanh", out, (a,), lambda g: (g * (1.0 - out**2),))


def clip(a, lo: float, hi: float) -> Tensor:
    a = as_tensor(a)
    inside = (a.data >= lo) & (a.data <= hi)
    return record("clip", np.clip(a.data, lo, hi), (a,), lambda g: (g * inside,))


def where(cond, a, b) -> Tensor:
    """Elementwise select; ``cond`` is a constant boolean array."""
    cond = np.asarray(cond, dtype=bool)
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_check("where", a, b)
    return record(
        "where",
        np.where(cond, a.data, b.data),
        (a, b),
        lambda g: (np.where(cond, g, 0.0), np.where(cond, 0.0, g)),
    )


# -- complex helpers -------------------------------------------------------------

def real(z) -> Tensor:
    z = as_tensor(z)
    return record("real", np.real(z.data).copy(), (z,), lambda g: (g.astype(np.complex128),))


def imag(z) -> Tensor:
    z = as_tensor(z)
    return record("imag", np.imag(z.data).copy(), (z,), lambda g: (1j * g,))


def conj(z) -> Tensor:
    z = as_tensor(z)
    return record("conj", np.conj(z.data), (z,), lambda g: (np.conj(g),))


def abs2(z) -> Tensor:
    """|z|^2 as a real tensor."""
    z = as_tensor(z)
    out = (z.data * np.conj(z.data)).real
    return record("abs2", out, (z,), lambda g: (2.0 * g * z.data,))


def complex_(re, im) -> Tensor:
    """Assemble a complex tensor from two real tensors."""
    re, im = as_tensor(re), as_tensor(im)
    if re.is_complex or im.is_complex:
        raise TypeError("complex_ expects real parts")
    _broadcast_check("complex", re, im)
    return record(
        "complex", re.data + 1j * im.data, (re, im), lambda g: (np.real(g), np.imag(g))
    )


# -- shape ops ---------------------------------------------------------------------

def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot reshape {a.shape} to {shape}") from None
    return record("reshape", out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    out = np.transpose(a.data, axes)
    inv = None if axes is None else np.argsort(axes)
    return record("transpose", out, (a,), lambda g: (np.transpose(g, inv),))


def getitem(a, index) -> Tensor:
    a = as_tensor(a)
    if isinstance(index, Tensor):
        index = index.data
    out = a.data[index]

    def vjp(g):
        full = np.zeros(a.shape, dtype=np.result_type(g.dtype, a.data.dtype))
        np.add.at(full, index, g)
        return (full,)

    return record("getitem", out, (a,), vjp)


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeError(f"concat: incompatible shapes {[t.shape for t in ts]}") from None
    bounds = np.cumsum([t.shape[axis] for t in ts])[:-1]

    def vjp(g):
        return tuple(np.split(g, bounds, axis=axis))

    return record("concat", out, ts, vjp)


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([t.data for t in ts], axis=axis)
    except ValueError:
        raise ShapeError(f"stack: incompatible shapes {[t.shape for t in ts]}") from None

    def vjp(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(ts)))

    return record("stack", out, ts, vjp)


# -- reductions ---------------------------------------------------------------------

def _expand_like(g: np.ndarray, shape, axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(g, shape)
    if not keepdims:
        axes = (axis,) if np.isscalar(axis) else tuple(axis)
        axes = tuple(ax % len(shape) for ax in axes)
        g = np.expand_dims(g, axes)
    return np.broadcast_to(g, shape)


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.sum(a.data, axis=axis, keepdims=keepdims)
    return record("sum", out, (a,), lambda g: (_expand_like(g, a.shape, axis, keepdims),))


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.mean(a.data, axis=axis, keepdims=keepdims)
    n = a.size / max(out.size, 1)
    return record(
        "mean", out, (a,), lambda g: (_expand_like(g, a.shape, axis, keepdims) / n,)
    )


def amin(a, axis: int) -> Tensor:
    """Minimum along one axis; the gradient flows to the first argmin."""
    a = as_tensor(a)
    if a.is_complex:
        raise TypeError("amin needs a real tensor")
    idx = np.argmin(a.data, axis=axis)
    out = np.take_along_axis(a.data, np.expand_dims(idx, axis), axis=axis).squeeze(axis)

    def vjp(g):
        full = np.zeros(a.shape)
        np.put_along_axis(full, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        return (full,)

    return record("amin", out, (a,), vjp)


def logsumexp(a, axis: int) -> Tensor:
    a = as_tensor(a)
    m = np.max(a.data, axis=axis, keepdims=True)
    e = np.exp(a.data - m)
    s = e.sum(axis=axis, keepdims=True)
    out = (np.log(s) + m).squeeze(axis)
    soft = e / s
    return record("logsumexp", out, (a,), lambda g: (np.expand_dims(g, axis) * soft,))


# -- linear algebra ---------------------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    out = a.data @ b.data

    def vjp(g):
        ga = g @ np.conj(np.swapaxes(b.data, -1, -2)) if a.requires_grad else None
        gb = np.conj(np.swapaxes(a.data, -1, -2)) @ g if b.requires_grad else None
        return ga, gb

    return record("matmul", out, (a, b), vjp)


def dft_matrix(n: int, inverse: bool = False) -> np.ndarray:
    k = np.arange(n)
    sign = 1.0 if inverse else -1.0
    w = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    return w / np.sqrt(n)


def dft(a, axis: int = -1, inverse: bool = False) -> Tensor:
    """Unitary DFT along ``axis`` computed as a dense matrix product."""
    a = as_tensor(a)
    n = a.shape[axis]
    w = dft_matrix(n, inverse)
    moved = np.moveaxis(a.data, axis, -1)
    out = np.moveaxis(moved @ w.T, -1, axis)

    def vjp(g):
        gm = np.moveaxis(g, axis, -1) @ np.conj(w)
        return (np.moveaxis(gm, -1, axis),)

    return record("dft", out, (a,), vjp)


def conv2d(x, weight, bias=None, precision: str = "float64") -> Tensor:
    """Same-padded 2D convolution, channels last.

    x: (batch, height, width, c_in); weight: (kh, kw, c_in, c_out) with odd
    kernel sizes; bias: (c_out,). ``precision="float32"`` runs the matrix
    products in single precision (inputs, outputs and gradients stay float64).

    The padded input is flattened to (rows, c_in); each kernel tap is then a
    contiguous row-shifted slice, so the product needs no im2col copy.
    Outputs landing on padding rows are computed and discarded.
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4 or x.shape[-1] != weight.shape[2]:
        raise ShapeError(f"conv2d: incompatible shapes {x.shape} and {weight.shape}")
    if x.is_complex or weight.is_complex:
        raise TypeError("conv2d: real tensors only")
    kh, kw, cin, cout = weight.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"conv2d: kernel {kh}x{kw} must have odd sizes")
    dt = {"float64": np.float64, "float32": np.float32}[precision]
    b, h, w, _ = x.shape
    ph, pw = kh // 2, kw // 2
    hp, wp = h + 2 * ph, w + 2 * pw
    xp = np.zeros((b, hp, wp, cin), dtype=dt)
    xp[:, ph : ph + h, pw : pw + w, :] = x.data
    flat = xp.reshape(-1, cin)
    rows = flat.shape[0]
    n = rows - ((kh - 1) * wp + (kw - 1))
    shifts = [(i, j, i * wp + j) for i in range(kh) for j in range(kw)]
    wk = weight.data.astype(dt, copy=False)
    acc = np.zeros((rows, cout), dtype=dt)
    for i, j, s in shifts:
        acc[:n] += flat[s : s + n] @ wk[i, j]
    out = acc.reshape(b, hp, wp, cout)[:, :h, :w, :].astype(np.float64)
    inputs = [x, weight]
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data
        inputs.append(bias)

    def vjp(g):
        gfull = np.zeros((rows, cout), dtype=dt)
        gfull.reshape(b, hp, wp, cout)[:, :h, :w, :] = g
        gx = gw = gb = None
        if x.requires_grad:
            gflat = np.zeros_like(flat)
            for i, j, s in shifts:
                gflat[s : s + n] += gfull[:n] @ wk[i, j].T
            gx = gflat.reshape(b, hp, wp, cin)[:, ph : ph + h, pw : pw + w, :].astype(np.float64)
        if weight.requires_grad:
            gw = np.empty(weight.shape)
            for i, j, s in shifts:
                gw[i, j] = flat[s : s + n].T @ gfull[:n]
        if bias is not None and bias.requires_grad:
            gb = g.reshape(-1, cout).sum(axis=0)
        return (gx, gw, gb)[: len(inputs)]

    return record("conv2d", out, inputs, vjp)
