"""Layers for the policy, estimator and session-encoder networks.

Everything here is expressed through the tape ops in `tensor`, so a single
`backward` call differentiates any stack built from these pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .params import ParamStore, glorot
from .tensor import Tensor

ACTIVATIONS = ("identity", "tanh", "relu")


def dense_forward(x, weights, bias, activation: str = "identity") -> Tensor:
    """y = act(W x + b) for a 1-D input."""
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}, expected one of {ACTIVATIONS}")
    y = T.add(T.matmul(weights, x), bias)
    if activation == "tanh":
        return T.tanh(y)
    if activation == "relu":
        return T.relu(y)
    return y


@dataclass
class GruCellParams:
    """Gate weights of one GRU cell; weights live in a ParamStore.

    Each gate maps the concatenation [x, h_prev] (input_dim + hidden_dim)
    to hidden_dim.
    """

    input_dim: int
    hidden_dim: int
    wz: Tensor
    bz: Tensor
    wr: Tensor
    br: Tensor
    wh: Tensor
    bh: Tensor

    @classmethod
    def create(cls, store: ParamStore, prefix: str, input_dim: int, hidden_dim: int,
               rng: np.random.Generator) -> "GruCellParams":
        cat = input_dim + hidden_dim
        mk = lambda gate: store.add(f"{prefix}.w{gate}", glorot(rng, cat, hidden_dim, (hidden_dim, cat)))
        mb = lambda gate: store.add(f"{prefix}.b{gate}", np.zeros(hidden_dim))
        return cls(input_dim, hidden_dim,
                   mk("z"), mb("z"), mk("r"), mb("r"), mk("h"), mb("h"))


def gru_step(h_prev, x, p: GruCellParams) -> Tensor:
    """One GRU update: h = (1 - z) * h_prev + z * h_tilde."""
    h_prev = T.as_tensor(h_prev)
    x = T.as_tensor(x)
    if h_prev.data.shape != (p.hidden_dim,) or x.data.shape != (p.input_dim,):
        raise T.ShapeError(
            f"gru_step: got h_prev {h_prev.data.shape}, x {x.data.shape}; "
            f"cell expects ({p.hidden_dim},), ({p.input_dim},)")
    xh = T.concat([x, h_prev])
    z = T.sigmoid(T.add(T.matmul(p.wz, xh), p.bz))
    r = T.sigmoid(T.add(T.matmul(p.wr, xh), p.br))
    xrh = T.concat([x, T.mul(r, h_prev)])
    h_tilde = T.tanh(T.add(T.matmul(p.wh, xrh), p.bh))
    one_minus_z = T.sub(Tensor(np.ones(p.hidden_dim)), z)
    return T.add(T.mul(one_minus_z, h_prev), T.mul(z, h_tilde))


def gru_forward(seq, p: GruCellParams, h0=None) -> list[Tensor]:
    """Run a GRU over a sequence; returns hidden states per position."""
    if len(seq) == 0:
        raise ValueError("gru_forward: empty sequence")
    h = T.as_tensor(h0) if h0 is not None else Tensor(np.zeros(p.hidden_dim))
    out = []
    for x in seq:
        h = gru_step(h, x, p)
        out.append(h)
    return out


def bigru_forward(seq, fwd: GruCellParams, bwd: GruCellParams) -> list[Tensor]:
    """Per-position concat of forward and backward hidden states."""
    if len(seq) == 0:
        raise ValueError("bigru_forward: empty sequence")
    hf = gru_forward(seq, fwd)
    hb = gru_forward(list(reversed(seq)), bwd)
    hb = list(reversed(hb))
    return [T.concat([f, b]) for f, b in zip(hf, hb)]


@dataclass
class AttentionParams:
    """Score head for additive attention pooling."""

    d_in: int
    d_att: int
    w_h: Tensor
    w_a: Tensor
    w: Tensor

    @classmethod
    def create(cls, store: ParamStore, prefix: str, d_in: int, d_att: int,
               rng: np.random.Generator) -> "AttentionParams":
        return cls(d_in, d_att,
                   store.add(f"{prefix}.wh", glorot(rng, d_in, d_att, (d_att, d_in))),
                   store.add(f"{prefix}.wa", glorot(rng, d_att, d_att, (d_att, d_att))),
                   store.add(f"{prefix}.w", glorot(rng, d_att, 1, (d_att,))))


def attention(hiddens, p: AttentionParams) -> tuple[Tensor, Tensor]:
    """Score each hidden with w . (W_a tanh(W_h h)), softmax, pool.

    Returns (weights, context) where context = sum_j alpha_j h_j.
    """
    if len(hiddens) == 0:
        raise ValueError("attention: empty input")
    scores = []
    for h in hiddens:
        ha = T.matmul(p.w_a, T.tanh(T.matmul(p.w_h, T.as_tensor(h))))
        scores.append(T.dot(p.w, ha))
    alpha = T.softmax(T.stack(scores))
    ctx = None
    for j, h in enumerate(hiddens):
        term = T.mul(T.as_tensor(h), T.pick(alpha, j))
        ctx = term if ctx is None else T.add(ctx, term)
    return alpha, ctx


LOG_FLOOR = 1e-12


def cross_entropy(target, pred) -> Tensor:
    """-sum(target * log(pred)) with pred clamped to >= 1e-12 before the log."""
    target = T.as_tensor(target)
    pred = T.as_tensor(pred)
    if target.data.shape != pred.data.shape:
        raise T.ShapeError(f"cross_entropy: target {target.data.shape} vs pred {pred.data.shape}")
    for name, t in (("target", target), ("pred", pred)):
        if abs(float(np.sum(t.data)) - 1.0) > 1e-6:
            raise ValueError(f"cross_entropy: {name} must sum to 1, got {float(np.sum(t.data)):.9f}")
    return T.neg(T.tsum(T.mul(target, T.log(T.clamp_min(pred, LOG_FLOOR)))))


def one_hot(i: int, n: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return v
