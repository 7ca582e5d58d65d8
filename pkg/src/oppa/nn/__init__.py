"""Minimal reverse-mode neural substrate (float64, numpy-backed)."""

from .tensor import (AutodiffError, ShapeError, Tensor, add, as_tensor, backward, clamp_min,
                     concat, dot, log, matmul, mul, neg, pick, pick_row, relu, scale, sigmoid,
                     softmax, stack, sub, tanh, tmean, tsum)
from .params import OptimizerError, ParamStore, adam_step, glorot
from .layers import (LOG_FLOOR, AttentionParams, GruCellParams, attention, bigru_forward,
                     cross_entropy, dense_forward, gru_forward, gru_step, one_hot)
from .gradcheck import grad_check

__all__ = [
    "AutodiffError", "ShapeError", "Tensor", "add", "as_tensor", "backward", "clamp_min",
    "concat", "dot", "log", "matmul", "mul", "neg", "pick", "pick_row", "relu", "scale",
    "sigmoid", "softmax", "stack", "sub", "tanh", "tmean", "tsum",
    "OptimizerError", "ParamStore", "adam_step", "glorot",
    "LOG_FLOOR", "AttentionParams", "GruCellParams", "attention", "bigru_forward",
    "cross_entropy", "dense_forward", "gru_forward", "gru_step", "one_hot",
    "grad_check",
]
