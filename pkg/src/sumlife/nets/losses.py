"""Cross-entropy and the neighbor-contrastive objective, with gradients.

All logarithms are natural; both losses return their analytic gradient so
training never touches numeric differentiation.
"""

from __future__ import annotations

import warnings

import numpy as np

from .ops import softmax_rows

_NORM_EPS = 1e-12


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over rows; returns (loss, dloss/dlogits)."""
    n = len(labels)
    if n == 0:
        raise ValueError("cross entropy over zero rows")
    z = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    picked = z[np.arange(n), labels]
    loss = float(np.mean(logsumexp - picked))
    grad = softmax_rows(logits)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def ncontrast_loss(
    z: np.ndarray, gamma: np.ndarray, tau: float
) -> tuple[float, np.ndarray]:
    """Neighbor-contrastive loss over batch embeddings.

    For each row i with at least one positive (gamma[i, j] = 1, j != i):
        l_i = -ln( sum_j gamma_ij exp(sim_ij / tau) / sum_k exp(sim_ik / tau) )
    with cosine similarity sim.  Rows without positives are excluded from the
    average; if no row has positives the loss is 0 with a zero gradient.
    Returns (loss, dloss/dz).
    """
    b = z.shape[0]
    if b < 2:
        raise ValueError("batch must contain at least 2 embeddings")
    gamma = np.array(gamma, dtype=np.float64, copy=True)
    np.fill_diagonal(gamma, 0.0)
    has_pos = gamma.sum(axis=1) > 0
    retained = int(has_pos.sum())
    if retained == 0:
        warnings.warn("no positive pairs in batch; contrastive loss skipped")
        return 0.0, np.zeros_like(z)

    norms = np.sqrt((z * z).sum(axis=1) + _NORM_EPS)
    zn = z / norms[:, None]
    sim = zn @ zn.T
    scaled = sim / tau
    np.fill_diagonal(scaled, -np.inf)  # exclude self pairs from both sums
    shift = scaled.max(axis=1, keepdims=True)
    e = np.exp(scaled - shift)
    den = e.sum(axis=1)
    num = (gamma * e).sum(axis=1)
    losses = np.where(has_pos, np.log(den) - np.log(np.where(has_pos, num, 1.0)), 0.0)
    loss = float(losses.sum() / retained)

    # dloss/dsim, only over retained rows; diagonal stays zero
    g = np.zeros_like(sim)
    rows = has_pos
    g[rows] = (e[rows] / den[rows, None] - gamma[rows] * e[rows] / num[rows, None]) / tau
    g /= retained
    np.fill_diagonal(g, 0.0)

    # sim = zn zn^T, so dzn = (g + g^T) zn; then through the normalization
    dzn = (g + g.T) @ zn
    dz = dzn / norms[:, None] - zn * ((zn * dzn).sum(axis=1) / norms)[:, None]
    return loss, dz


def combined_loss(
    logits: np.ndarray, labels: np.ndarray, loss_nc: float, alpha: float
) -> float:
    """Cross-entropy over the labeled rows plus alpha times the contrastive term."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    ce, _ = cross_entropy(logits, labels)
    return ce + alpha * loss_nc
