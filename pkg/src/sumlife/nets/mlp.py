"""Single-hidden-layer MLP baseline: ReLU, dropout, biases."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import dropout_mask, glorot_uniform, relu, relu_grad


@dataclass
class MlpParams:
    w0: np.ndarray  # input x hidden
    b0: np.ndarray
    w_out: np.ndarray  # hidden x classes
    b_out: np.ndarray

    def tensors(self) -> dict[str, np.ndarray]:
        return {"w0": self.w0, "b0": self.b0, "w_out": self.w_out, "b_out": self.b_out}

    @property
    def n_in(self) -> int:
        return self.w0.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w_out.shape[1]


def init_mlp(rng: np.random.Generator, n_in: int, hidden: int, n_classes: int) -> MlpParams:
    return MlpParams(
        w0=glorot_uniform(rng, n_in, hidden, (n_in, hidden)),
        b0=np.zeros(hidden),
        w_out=glorot_uniform(rng, hidden, n_classes, (hidden, n_classes)),
        b_out=np.zeros(n_classes),
    )


def mlp_forward(
    params: MlpParams,
    x: np.ndarray,
    train_mode: bool = False,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict | None]:
    """Logits plus, in train mode, the cache needed for the backward pass.

    Dropout (inverted scaling) is applied to the hidden activation only in
    train mode; eval mode needs no rescale.
    """
    if x.shape[1] != params.n_in:
        raise ValueError(f"feature width {x.shape[1]} != input width {params.n_in}")
    a = x @ params.w0 + params.b0
    h = relu(a)
    if train_mode:
        mask = dropout_mask(rng if rng is not None else np.random.default_rng(), h.shape, dropout)
        hd = h * mask
        logits = hd @ params.w_out + params.b_out
        return logits, {"x": x, "a": a, "mask": mask, "hd": hd}
    return h @ params.w_out + params.b_out, None


def mlp_backward(params: MlpParams, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    dw_out = cache["hd"].T @ dlogits
    db_out = dlogits.sum(axis=0)
    dhd = dlogits @ params.w_out.T
    da = dhd * cache["mask"] * relu_grad(cache["a"])
    return {
        "w0": cache["x"].T @ da,
        "b0": da.sum(axis=0),
        "w_out": dw_out,
        "b_out": db_out,
    }


def grow_mlp(
    params: MlpParams,
    rng: np.random.Generator,
    new_in: int,
    new_classes: int,
    zero_init: bool = False,
) -> MlpParams:
    """Widen input rows and output columns; existing weights are copied bit-exactly."""
    if new_in < params.n_in or new_classes < params.n_classes:
        raise ValueError("layers can only grow")
    hidden = params.w0.shape[1]
    w0 = params.w0
    if new_in > params.n_in:
        extra = (
            np.zeros((new_in - params.n_in, hidden))
            if zero_init
            else glorot_uniform(rng, new_in, hidden, (new_in - params.n_in, hidden))
        )
        w0 = np.vstack([w0, extra])
    w_out = params.w_out
    b_out = params.b_out
    if new_classes > params.n_classes:
        extra = (
            np.zeros((hidden, new_classes - params.n_classes))
            if zero_init
            else glorot_uniform(rng, hidden, new_classes, (hidden, new_classes - params.n_classes))
        )
        w_out = np.hstack([w_out, extra])
        b_out = np.concatenate([b_out, np.zeros(new_classes - params.n_classes)])
    return MlpParams(w0.copy(), params.b0.copy(), w_out.copy(), b_out.copy())
