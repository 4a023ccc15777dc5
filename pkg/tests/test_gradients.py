"""Analytic vs central-difference gradients on small random instances.

The acceptance suite sweeps more seeds; these cover each architecture and
loss path during development.
"""

import numpy as np
import pytest

from gradcheck import max_rel_error, small_problem
from sumlife.nets.gcn import batch_adjacency, gcn_backward, gcn_forward, init_gcn
from sumlife.nets.graphmlp import graphmlp_backward, graphmlp_forward, init_graphmlp
from sumlife.nets.losses import cross_entropy, ncontrast_loss
from sumlife.nets.mlp import init_mlp, mlp_backward, mlp_forward

TOL = 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("dropout", [0.0, 0.5])
def test_mlp_gradients(seed, dropout):
    x, labels, _, _ = small_problem(seed)
    params = init_mlp(np.random.default_rng(seed + 100), x.shape[1], 4, 3)

    def loss_fn():
        logits, cache = mlp_forward(params, x, True, dropout, np.random.default_rng(7))
        loss, dlogits = cross_entropy(logits, labels)
        return loss, mlp_backward(params, cache, dlogits)

    assert max_rel_error(loss_fn, params.tensors()) < TOL


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_graphmlp_combined_gradients(seed):
    x, labels, src, dst = small_problem(seed)
    b = x.shape[0]
    params = init_graphmlp(np.random.default_rng(seed + 200), x.shape[1], 4, 3)
    gamma = np.zeros((b, b))
    gamma[src, dst] = 1.0
    gamma[dst, src] = 1.0
    alpha, tau = 1.0, 2.0

    def loss_fn():
        z, logits, cache = graphmlp_forward(params, x, True, 0.2, np.random.default_rng(3))
        ce, dlogits = cross_entropy(logits, labels)
        nc, dz = ncontrast_loss(z, gamma, tau)
        grads = graphmlp_backward(params, cache, dlogits, alpha * dz)
        return ce + alpha * nc, grads

    assert max_rel_error(loss_fn, params.tensors()) < TOL


@pytest.mark.parametrize("seed", [0, 1])
@pytest.mark.parametrize("normalize", [False, True])
@pytest.mark.parametrize("hidden", [[4], [4, 3]])
def test_gcn_gradients(seed, normalize, hidden):
    x, labels, src, dst = small_problem(seed)
    params = init_gcn(np.random.default_rng(seed + 300), x.shape[1], hidden, 3)
    adj = batch_adjacency(x.shape[0], src, dst)

    def loss_fn():
        logits, cache = gcn_forward(params, x, adj, normalize, True, 0.0, np.random.default_rng(1))
        loss, dlogits = cross_entropy(logits, labels)
        return loss, gcn_backward(params, cache, dlogits)

    assert max_rel_error(loss_fn, params.tensors()) < TOL


def test_ncontrast_gradient_wrt_embeddings():
    rng = np.random.default_rng(7)
    z = rng.normal(size=(6, 4))
    gamma = np.zeros((6, 6))
    gamma[np.array([0, 1, 2, 3]), np.array([1, 2, 0, 4])] = 1.0
    gamma += gamma.T
    nc, dz = ncontrast_loss(z, gamma, 2.0)
    eps = 1e-5
    worst = 0.0
    for i in range(6):
        for j in range(4):
            orig = z[i, j]
            z[i, j] = orig + eps
            lp, _ = ncontrast_loss(z, gamma, 2.0)
            z[i, j] = orig - eps
            lm, _ = ncontrast_loss(z, gamma, 2.0)
            z[i, j] = orig
            fd = (lp - lm) / (2 * eps)
            worst = max(worst, abs(fd - dz[i, j]) / max(abs(fd), abs(dz[i, j]), 1e-8))
    assert worst < TOL
