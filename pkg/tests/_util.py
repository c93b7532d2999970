"""Shared helpers for the test suite."""
import copy

import numpy as np

from ftgcl import autodiff as ad
from ftgcl.contrast import channel_loss
from ftgcl.encoder import encode, init_encoder, init_head, project

_LIST_FIELDS = {"weight": "weights", "bias": "biases"}


def rebind(enc, head, name, node):
    """Shallow copies of (enc, head) with parameter ``name`` replaced by ``node``."""
    e2 = copy.copy(enc)
    e2.layers = [copy.copy(layer) for layer in enc.layers]
    h2 = copy.copy(head)
    h2.weights, h2.biases = list(head.weights), list(head.biases)
    parts = name.split(".")
    if parts[0] == "encoder":
        setattr(e2.layers[int(parts[1])], parts[2], node)
    elif parts[1] == "slope":
        h2.slope = node
    else:
        getattr(h2, _LIST_FIELDS[parts[2]])[int(parts[1])] = node
    return e2, h2


def composition_fd_errors(graph, view_graph, X, d_prime, d, activation, tau=0.5, seed=0, h=1e-5):
    """Finite-difference error for every parameter tensor of channel_loss(project(encode(.)))."""
    rng = np.random.default_rng(seed)
    enc = init_encoder(X.shape[1], d_prime, rng, activation)
    head = init_head(d_prime, d, rng, activation)
    for b in head.biases:  # zero init would be skipped by the kink guard
        b.value = rng.normal(scale=0.1, size=b.shape)
    errors = {}
    for name, p in {**enc.parameters(), **head.parameters()}.items():
        def f(node, name=name):
            e2, h2 = rebind(enc, head, name, node)
            H = project(h2, encode(e2, graph, X))
            Ha = project(h2, encode(e2, view_graph, X))
            return channel_loss(H, Ha, tau)

        errors[name] = ad.finite_diff_check(f, p.value, h)
    return errors


def channel_loss_loops(H, Ha, tau):
    """Scalar double-loop evaluation of the channel loss, straight from its definition."""
    H = np.asarray(H, dtype=float)
    Ha = np.asarray(Ha, dtype=float)
    d = H.shape[1]

    def cos(u, v):
        return float(u @ v) / (np.sqrt(float(u @ u)) * np.sqrt(float(v @ v)))

    total = 0.0
    for i in range(d):
        pos = np.exp(cos(H[:, i], Ha[:, i]) / tau)
        den_a = 0.0
        den_b = 0.0
        for j in range(d):
            if j == i:
                continue
            den_a += np.exp(cos(H[:, i], Ha[:, j]) / tau)
            den_b += np.exp(cos(H[:, j], Ha[:, i]) / tau)
        total += -(np.log(pos / den_a) + np.log(pos / den_b))
    return total / d
