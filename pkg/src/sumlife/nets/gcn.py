"""Sampled-subgraph GCN with jumping-knowledge connections.

Message passing aggregates from out-neighbors over the sampled batch
adjacency; self-loops are always added so isolated targets keep their own
features.  Optional degree normalization scales each entry by
1/sqrt(d_v * d_u), with d the row degree of the self-looped adjacency.
The hidden layers' outputs are concatenated before the linear classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ops import dropout_mask, glorot_uniform, relu, relu_grad


@dataclass
class GcnParams:
    layers: list[np.ndarray]  # layer l: width_{l-1} x width_l
    w_cls: np.ndarray  # sum of hidden widths x classes

    def tensors(self) -> dict[str, np.ndarray]:
        out = {f"w{i}": w for i, w in enumerate(self.layers)}
        out["w_cls"] = self.w_cls
        return out

    @property
    def n_in(self) -> int:
        return self.layers[0].shape[0]

    @property
    def n_classes(self) -> int:
        return self.w_cls.shape[1]


def init_gcn(
    rng: np.random.Generator, n_in: int, hidden: list[int], n_classes: int
) -> GcnParams:
    layers = []
    prev = n_in
    for h in hidden:
        layers.append(glorot_uniform(rng, prev, h, (prev, h)))
        prev = h
    jk = sum(hidden)
    return GcnParams(layers=layers, w_cls=glorot_uniform(rng, jk, n_classes, (jk, n_classes)))


def batch_adjacency(n: int, edge_src: np.ndarray, edge_dst: np.ndarray) -> np.ndarray:
    """Dense out-neighbor adjacency with self-loops for a sampled batch."""
    a = np.eye(n, dtype=np.float64)
    if len(edge_src):
        a[edge_src, edge_dst] = 1.0
    return a


def normalize_adjacency(adj: np.ndarray) -> np.ndarray:
    """Scale entries by 1/sqrt(d_v * d_u) with d the row degrees."""
    d = adj.sum(axis=1)
    d = np.where(d > 0, d, 1.0)
    inv = 1.0 / np.sqrt(d)
    return adj * inv[:, None] * inv[None, :]


def gcn_layer(
    h_prev: np.ndarray, adj: np.ndarray, w: np.ndarray, normalize: bool = False
) -> np.ndarray:
    """One propagation step: relu(A @ h_prev @ w), optionally degree-normalized."""
    a = normalize_adjacency(adj) if normalize else adj
    return relu(a @ (h_prev @ w))


def gcn_forward(
    params: GcnParams,
    x: np.ndarray,
    adj: np.ndarray,
    normalize: bool = False,
    train_mode: bool = False,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict | None]:
    """Logits via jumping-knowledge concatenation of all hidden layers."""
    if x.shape[1] != params.n_in:
        raise ValueError(f"feature width {x.shape[1]} != input width {params.n_in}")
    a = normalize_adjacency(adj) if normalize else adj
    hs = [x]
    pre = []
    masks = []
    gen = rng if rng is not None else np.random.default_rng()
    h = x
    for w in params.layers:
        p = a @ (h @ w)
        h = relu(p)
        if train_mode:
            mask = dropout_mask(gen, h.shape, dropout)
            h = h * mask
            masks.append(mask)
        pre.append(p)
        hs.append(h)
    jk = np.hstack(hs[1:])
    logits = jk @ params.w_cls
    cache = {"a": a, "hs": hs, "pre": pre, "masks": masks, "jk": jk} if train_mode else None
    return logits, cache


def gcn_backward(params: GcnParams, cache: dict, dlogits: np.ndarray) -> dict[str, np.ndarray]:
    a = cache["a"]
    hs, pre, masks = cache["hs"], cache["pre"], cache["masks"]
    grads: dict[str, np.ndarray] = {"w_cls": cache["jk"].T @ dlogits}
    djk = dlogits @ params.w_cls.T
    # split the jumping-knowledge gradient back onto each layer's output
    widths = [w.shape[1] for w in params.layers]
    offsets = np.cumsum([0] + widths)
    dh_jk = [djk[:, offsets[i] : offsets[i + 1]] for i in range(len(widths))]
    dh_next = np.zeros_like(hs[-1])
    for l in range(len(params.layers) - 1, -1, -1):
        dh = dh_next + dh_jk[l]
        if masks:
            dh = dh * masks[l]
        dp = dh * relu_grad(pre[l])
        m = a.T @ dp
        grads[f"w{l}"] = hs[l].T @ m
        dh_next = m @ params.layers[l].T
    return grads


def grow_gcn(
    params: GcnParams,
    rng: np.random.Generator,
    new_in: int,
    new_classes: int,
    zero_init: bool = False,
) -> GcnParams:
    if new_in < params.n_in or new_classes < params.n_classes:
        raise ValueError("layers can only grow")
    layers = [w.copy() for w in params.layers]
    if new_in > params.n_in:
        h0 = layers[0].shape[1]
        extra = (
            np.zeros((new_in - params.n_in, h0))
            if zero_init
            else glorot_uniform(rng, new_in, h0, (new_in - params.n_in, h0))
        )
        layers[0] = np.vstack([layers[0], extra])
    w_cls = params.w_cls.copy()
    if new_classes > params.n_classes:
        jk = w_cls.shape[0]
        extra = (
            np.zeros((jk, new_classes - params.n_classes))
            if zero_init
            else glorot_uniform(rng, jk, new_classes, (jk, new_classes - params.n_classes))
        )
        w_cls = np.hstack([w_cls, extra])
    return GcnParams(layers=layers, w_cls=w_cls)
