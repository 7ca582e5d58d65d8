"""Finite-difference verification of every differentiable building block.

Each case builds a small randomly-initialized network, defines a scalar
loss, and compares tape gradients against central differences. The 1e-4
relative-error bound is deliberately tight; these nets are tiny enough
that float64 central differences are accurate to ~1e-7.
"""

import numpy as np
import pytest

from oppa import nn
from oppa.nn import tensor as T

TOL = 1e-4


def test_dense_tanh_cross_entropy():
    store = nn.ParamStore()
    rng = np.random.default_rng(101)
    w1 = store.add("w1", nn.glorot(rng, 4, 6, (6, 4)))
    b1 = store.add("b1", rng.normal(size=6) * 0.1)
    w2 = store.add("w2", nn.glorot(rng, 6, 3, (3, 6)))
    b2 = store.add("b2", rng.normal(size=3) * 0.1)
    x = rng.normal(size=4)
    target = nn.one_hot(2, 3)

    def loss():
        h = nn.dense_forward(x, w1, b1, "tanh")
        logits = nn.dense_forward(h, w2, b2)
        return nn.cross_entropy(target, T.softmax(logits))

    assert nn.grad_check(loss, store) < TOL


def test_gru_three_steps():
    store = nn.ParamStore()
    rng = np.random.default_rng(202)
    cell = nn.GruCellParams.create(store, "g", 3, 4, rng)
    seq = [rng.normal(size=3) for _ in range(3)]
    v = rng.normal(size=4)

    def loss():
        h = nn.gru_forward(seq, cell)[-1]
        return T.dot(h, v)

    assert nn.grad_check(loss, store) < TOL


def test_bigru_attention_softmax_head():
    store = nn.ParamStore()
    rng = np.random.default_rng(303)
    fwd = nn.GruCellParams.create(store, "f", 3, 4, rng)
    bwd = nn.GruCellParams.create(store, "b", 3, 4, rng)
    att = nn.AttentionParams.create(store, "att", 8, 5, rng)
    w_out = store.add("w_out", nn.glorot(rng, 8, 3, (3, 8)))
    b_out = store.add("b_out", np.zeros(3))
    seq = [rng.normal(size=3) for _ in range(4)]
    target = nn.one_hot(1, 3)

    def loss():
        hiddens = nn.bigru_forward(seq, fwd, bwd)
        _, ctx = nn.attention(hiddens, att)
        logits = nn.dense_forward(ctx, w_out, b_out)
        return nn.cross_entropy(target, T.softmax(logits))

    assert nn.grad_check(loss, store) < TOL


def test_embedding_lookup_and_stack():
    store = nn.ParamStore()
    rng = np.random.default_rng(404)
    emb = store.add("emb", rng.normal(size=(5, 3)))
    w = store.add("w", nn.glorot(rng, 6, 4, (4, 6)))
    x = rng.normal(size=3)

    def loss():
        row = T.pick_row(emb, 2)
        q = T.matmul(w, T.concat([T.Tensor(x), row]))
        picked = T.stack([T.pick(q, 0), T.pick(q, 3)])
        return T.tsum(T.mul(picked, picked))

    assert nn.grad_check(loss, store) < TOL


def test_relu_and_clamp_paths():
    # kink points avoided by the random draw; subgradient elsewhere is exact
    store = nn.ParamStore()
    rng = np.random.default_rng(505)
    w = store.add("w", rng.normal(size=(4, 4)))
    x = rng.normal(size=4)

    def loss():
        h = T.relu(T.matmul(w, x))
        return T.tsum(T.log(T.clamp_min(h, 0.3)))

    assert nn.grad_check(loss, store) < TOL


def test_mean_and_scalar_broadcast():
    store = nn.ParamStore()
    rng = np.random.default_rng(606)
    w = store.add("w", rng.normal(size=6))
    c = store.add("c", np.array(0.7))

    def loss():
        scaled = T.mul(w, c)
        return T.tmean(T.mul(scaled, scaled))

    assert nn.grad_check(loss, store) < TOL


def test_perturbation_restores_values():
    store = nn.ParamStore()
    rng = np.random.default_rng(707)
    w = store.add("w", rng.normal(size=(3, 3)))
    x = rng.normal(size=3)
    before = w.data.copy()
    nn.grad_check(lambda: T.tsum(T.tanh(T.matmul(w, x))), store)
    np.testing.assert_array_equal(w.data, before)


def test_detects_wrong_gradient():
    # a deliberately broken backward must be caught, otherwise the
    # oracle itself is vacuous
    store = nn.ParamStore()
    w = store.add("w", np.array([0.5, -0.3]))
    x = np.array([1.0, 2.0])

    def bad_loss():
        out = T.Tensor(np.sum(w.data * x), requires_grad=True,
                       _parents=(w,), _backward=None)

        def bw():
            w.grad += 2.0 * x * float(out.grad)  # doubled on purpose

        out._backward = bw
        return out

    assert nn.grad_check(bad_loss, store) > 0.3


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_q_network_shape_used_by_policy(seed):
    # two dense layers over a state-action embedding concat, the exact
    # shape the dialogue policy trains
    store = nn.ParamStore()
    rng = np.random.default_rng(seed)
    d_state, d_emb, n_act, d_hid = 6, 3, 4, 5
    emb = store.add("emb", rng.normal(size=(n_act, d_emb)) * 0.3)
    w1 = store.add("w1", nn.glorot(rng, d_state + d_emb, d_hid, (d_hid, d_state + d_emb)))
    b1 = store.add("b1", np.zeros(d_hid))
    w2 = store.add("w2", nn.glorot(rng, d_hid, n_act, (n_act, d_hid)))
    b2 = store.add("b2", np.zeros(n_act))
    s = rng.normal(size=d_state)

    def loss():
        aug = T.concat([T.Tensor(s), T.pick_row(emb, 1)])
        q = nn.dense_forward(nn.dense_forward(aug, w1, b1, "tanh"), w2, b2)
        target = np.zeros(n_act)
        target[2] = 1.0
        return nn.cross_entropy(target, T.softmax(q))

    assert nn.grad_check(loss, store) < TOL
