"""Tape-based reverse-mode autodiff over float64 numpy arrays.

The op vocabulary is deliberately small: exactly what a dense Q-network,
a GRU-based sequence encoder with attention, and their losses need.
Every op records a backward closure; `backward(loss)` replays them in
reverse topological order and accumulates gradients into leaf tensors.
"""

from __future__ import annotations

import numpy as np


class AutodiffError(RuntimeError):
    """Backward invoked without a recorded forward computation."""


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested op."""


def _shape_err(op: str, *shapes) -> ShapeError:
    return ShapeError(f"{op}: incompatible shapes {' vs '.join(str(tuple(s)) for s in shapes)}")


class Tensor:
    """A node in the computation graph: float64 data plus optional grad.

    Leaf tensors created with requires_grad=True keep a persistent grad
    buffer that accumulates across backward calls until the caller zeros
    it. Interior nodes get fresh grad buffers on each backward pass.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if (requires_grad and _backward is None) else None
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, leaf={self.is_leaf}, rg={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(data, parents, backward_fn) -> Tensor:
    rg = any(p.requires_grad for p in parents)
    t = Tensor(data, requires_grad=rg, _parents=tuple(parents), _backward=backward_fn if rg else None)
    return t


def _accum(p: Tensor, g: np.ndarray) -> None:
    if p.requires_grad:
        if p.grad is None:
            p.grad = np.zeros_like(p.data)
        p.grad += g


# ---------------------------------------------------------------------------
# op vocabulary


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape:
        raise _shape_err("add", a.data.shape, b.data.shape)
    out = _node(a.data + b.data, (a, b), None)

    def bw():
        _accum(a, out.grad)
        _accum(b, out.grad)

    out._backward = bw if out.requires_grad else None
    return out


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape:
        raise _shape_err("sub", a.data.shape, b.data.shape)
    out = _node(a.data - b.data, (a, b), None)

    def bw():
        _accum(a, out.grad)
        _accum(b, -out.grad)

    out._backward = bw if out.requires_grad else None
    return out


def mul(a, b) -> Tensor:
    """Elementwise product; one side may be a 0-d scalar tensor."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape and a.data.ndim != 0 and b.data.ndim != 0:
        raise _shape_err("mul", a.data.shape, b.data.shape)
    out = _node(a.data * b.data, (a, b), None)

    def bw():
        ga = out.grad * b.data
        gb = out.grad * a.data
        _accum(a, ga if a.data.ndim else np.sum(ga))
        _accum(b, gb if b.data.ndim else np.sum(gb))

    out._backward = bw if out.requires_grad else None
    return out


def scale(a, c: float) -> Tensor:
    """Multiply by a python constant (no gradient to the constant)."""
    a = as_tensor(a)
    c = float(c)
    out = _node(a.data * c, (a,), None)

    def bw():
        _accum(a, out.grad * c)

    out._backward = bw if out.requires_grad else None
    return out


def neg(a) -> Tensor:
    return scale(a, -1.0)


def matmul(w, x) -> Tensor:
    """2-D weight times 1-D vector (the only matmul the networks need)."""
    w, x = as_tensor(w), as_tensor(x)
    if w.data.ndim != 2 or x.data.ndim != 1 or w.data.shape[1] != x.data.shape[0]:
        raise _shape_err("matmul", w.data.shape, x.data.shape)
    out = _node(w.data @ x.data, (w, x), None)

    def bw():
        _accum(w, np.outer(out.grad, x.data))
        _accum(x, w.data.T @ out.grad)

    out._backward = bw if out.requires_grad else None
    return out


def tanh(a) -> Tensor:
    a = as_tensor(a)
    y = np.tanh(a.data)
    out = _node(y, (a,), None)

    def bw():
        _accum(a, out.grad * (1.0 - y * y))

    out._backward = bw if out.requires_grad else None
    return out


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    y = 1.0 / (1.0 + np.exp(-a.data))
    out = _node(y, (a,), None)

    def bw():
        _accum(a, out.grad * y * (1.0 - y))

    out._backward = bw if out.requires_grad else None
    return out


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = _node(np.maximum(a.data, 0.0), (a,), None)

    def bw():
        _accum(a, out.grad * (a.data > 0.0))

    out._backward = bw if out.requires_grad else None
    return out


def concat(parts) -> Tensor:
    """Concatenate 1-D tensors."""
    parts = [as_tensor(p) for p in parts]
    for p in parts:
        if p.data.ndim != 1:
            raise _shape_err("concat", p.data.shape)
    out = _node(np.concatenate([p.data for p in parts]), tuple(parts), None)
    sizes = [p.data.shape[0] for p in parts]

    def bw():
        o = 0
        for p, n in zip(parts, sizes):
            _accum(p, out.grad[o:o + n])
            o += n

    out._backward = bw if out.requires_grad else None
    return out


def softmax(z) -> Tensor:
    """Stable softmax of a 1-D vector (max-subtracted)."""
    z = as_tensor(z)
    if z.data.ndim != 1 or z.data.shape[0] == 0:
        raise _shape_err("softmax", z.data.shape)
    e = np.exp(z.data - np.max(z.data))
    p = e / np.sum(e)
    out = _node(p, (z,), None)

    def bw():
        g = out.grad
        _accum(z, p * (g - np.dot(g, p)))

    out._backward = bw if out.requires_grad else None
    return out


def log(a) -> Tensor:
    a = as_tensor(a)
    out = _node(np.log(a.data), (a,), None)

    def bw():
        _accum(a, out.grad / a.data)

    out._backward = bw if out.requires_grad else None
    return out


def clamp_min(a, floor: float) -> Tensor:
    """Lower clamp; gradient passes only where the input is above the floor."""
    a = as_tensor(a)
    keep = a.data >= floor
    out = _node(np.where(keep, a.data, floor), (a,), None)

    def bw():
        _accum(a, out.grad * keep)

    out._backward = bw if out.requires_grad else None
    return out


def tsum(a) -> Tensor:
    """Sum all entries to a 0-d scalar."""
    a = as_tensor(a)
    out = _node(np.sum(a.data), (a,), None)

    def bw():
        _accum(a, np.full_like(a.data, float(out.grad)))

    out._backward = bw if out.requires_grad else None
    return out


def tmean(a) -> Tensor:
    a = as_tensor(a)
    return scale(tsum(a), 1.0 / a.data.size)


def dot(a, b) -> Tensor:
    return tsum(mul(a, b))


def pick(a, i: int) -> Tensor:
    """Select a single entry of a 1-D tensor as a 0-d scalar."""
    a = as_tensor(a)
    i = int(i)
    out = _node(a.data[i], (a,), None)

    def bw():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            a.grad[i] += float(out.grad)

    out._backward = bw if out.requires_grad else None
    return out


def pick_row(m, i: int) -> Tensor:
    """Select row i of a 2-D tensor (embedding lookup)."""
    m = as_tensor(m)
    if m.data.ndim != 2:
        raise _shape_err("pick_row", m.data.shape)
    i = int(i)
    out = _node(m.data[i], (m,), None)

    def bw():
        if m.requires_grad:
            if m.grad is None:
                m.grad = np.zeros_like(m.data)
            m.grad[i] += out.grad

    out._backward = bw if out.requires_grad else None
    return out


def stack(scalars) -> Tensor:
    """Stack 0-d tensors into a 1-D vector."""
    scalars = [as_tensor(s) for s in scalars]
    out = _node(np.array([float(s.data) for s in scalars]), tuple(scalars), None)

    def bw():
        for k, s in enumerate(scalars):
            _accum(s, np.asarray(out.grad[k]))

    out._backward = bw if out.requires_grad else None
    return out


# ---------------------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Reverse-mode accumulation from a scalar loss into leaf grads.

    Repeated calls keep accumulating into leaves; the caller zeros grads
    between optimizer steps. Interior grads are reset per call.
    """
    if loss._backward is None and not loss._parents:
        raise AutodiffError("backward called on a tensor with no recorded forward computation")
    if loss.data.size != 1:
        raise AutodiffError(f"backward needs a scalar loss, got shape {loss.data.shape}")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack_: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node._parents:
            stack_.append((p, False))

    # fresh grad buffers for interior nodes; leaves keep accumulating
    for node in topo:
        if not node.is_leaf:
            node.grad = np.zeros_like(node.data)

    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None:
            node._backward()
