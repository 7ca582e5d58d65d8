"""Finite-difference gradient oracle.

Central differences per coordinate, compared against whatever the tape
produced. This is the independent check for every network in the package;
it never reuses the tape's backward results to compute the numeric side.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .params import ParamStore
from .tensor import Tensor, backward


def grad_check(build_loss: Callable[[], Tensor], store: ParamStore, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference grads.

    `build_loss` must be deterministic given the store's current values.
    Relative error per coordinate is |a - n| / max(1e-8, |a| + |n|).
    """
    store.zero_grads()
    backward(build_loss())
    analytic = {name: store[name].grad.copy() for name in store.names()}

    worst = 0.0
    for name in store.names():
        value = store[name].data
        flat = value.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            lo_hi = float(build_loss().data)
            flat[k] = orig - h
            lo_lo = float(build_loss().data)
            flat[k] = orig
            numeric = (lo_hi - lo_lo) / (2.0 * h)
            a = a_flat[k]
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, err)
    return worst
