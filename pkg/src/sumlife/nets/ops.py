"""Dense-tensor primitives: activations, dropout, init, finiteness guard.

Everything is float64; gradients elsewhere are hand-derived, so the forward
formulas here are the single source of truth for their derivatives.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericalError

_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(x: np.ndarray) -> np.ndarray:
    """Derivative mask of relu at pre-activation x (0 at the kink)."""
    return (x > 0.0).astype(x.dtype)


def gelu(x: np.ndarray) -> np.ndarray:
    """tanh-approximation GELU: 0.5*x*(1 + tanh(c*(x + a*x^3)))."""
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + _GELU_A * x**3)))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    u = _GELU_C * (x + _GELU_A * x**3)
    t = np.tanh(u)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * _GELU_C * (1.0 + 3.0 * _GELU_A * x**2)


def dropout_mask(rng: np.random.Generator, shape: tuple[int, ...], rate: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability ``rate``, else 1/(1-rate)."""
    if rate <= 0.0:
        return np.ones(shape, dtype=np.float64)
    if rate >= 1.0:
        raise ValueError("dropout rate must be < 1")
    keep = rng.random(shape) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def assert_finite(name: str, arr: np.ndarray | float) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {name}")
