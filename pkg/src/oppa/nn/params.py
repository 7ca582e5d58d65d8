"""Named parameter storage with paired gradients and Adam moments."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class OptimizerError(RuntimeError):
    """Raised when an optimizer step cannot be applied safely."""


class ParamStore:
    """Ordered map name -> (value, grad, moment1, moment2), plus a step count.

    Values and grads live inside leaf Tensors so the tape writes gradients
    straight into the store. Iteration order is insertion order, which makes
    checkpoints and optimizer sweeps deterministic.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._m1: dict[str, np.ndarray] = {}
        self._m2: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, data) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(np.asarray(data, dtype=np.float64), requires_grad=True)
        self._params[name] = t
        self._m1[name] = np.zeros_like(t.data)
        self._m2[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def moments(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self._m1[name], self._m2[name]

    def zero_grads(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def copy_values_from(self, other: "ParamStore") -> None:
        """Overwrite values (only) with another store's, matching by name."""
        for name, t in self._params.items():
            src = other._params[name]
            if src.data.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {name}: {t.data.shape} vs {src.data.shape}")
            t.data[...] = src.data

    def clone(self) -> "ParamStore":
        out = ParamStore()
        for name, t in self._params.items():
            out.add(name, t.data.copy())
            out._params[name].grad[...] = t.grad
            out._m1[name][...] = self._m1[name]
            out._m2[name][...] = self._m2[name]
        out.step_count = self.step_count
        return out

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Flat view of every array under a stable sub-keyed name."""
        flat: dict[str, np.ndarray] = {}
        for name, t in self._params.items():
            flat[f"{name}:value"] = t.data
            flat[f"{name}:grad"] = t.grad
            flat[f"{name}:m1"] = self._m1[name]
            flat[f"{name}:m2"] = self._m2[name]
        return flat


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))."""
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def adam_step(store: ParamStore, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> None:
    """Bias-corrected Adam update over every entry; grads are left untouched.

    Refuses to update (and changes nothing) if any gradient is non-finite.
    """
    for name in store.names():
        if not np.all(np.isfinite(store[name].grad)):
            raise OptimizerError(f"non-finite gradient in parameter {name!r}; no update applied")
    store.step_count += 1
    t = store.step_count
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name in store.names():
        g = store[name].grad
        m1, m2 = store.moments(name)
        m1 *= beta1
        m1 += (1.0 - beta1) * g
        m2 *= beta2
        m2 += (1.0 - beta2) * (g * g)
        store[name].data -= lr * (m1 / c1) / (np.sqrt(m2 / c2) + eps)
