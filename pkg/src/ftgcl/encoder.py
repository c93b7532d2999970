"""Shared two-layer single-head graph-attention encoder and MLP projection head."""
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import InvalidArgument

ACTIVATIONS = ("relu", "elu", "prelu")
LOGIT_CLAMP = 50.0
PRELU_INIT = 0.25


def glorot(rng, fan_in, fan_out):
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


def activate(x, activation, slope=None):
    if activation == "relu":
        return ad.relu(x)
    if activation == "elu":
        return ad.elu(x)
    if activation == "prelu":
        if slope is None:
            raise InvalidArgument("prelu activation needs a slope parameter")
        return ad.prelu(x, slope)
    raise InvalidArgument(f"unknown activation {activation!r}; choose from {ACTIVATIONS}")


@dataclass
class GatLayerParams:
    weight: ad.Node  # in_dim x out_dim
    attention: ad.Node  # (2 * out_dim, 1): first half scores the target, second the source
    slope: ad.Node | None = None

    @property
    def out_dim(self):
        return self.weight.shape[1]


@dataclass
class EncoderParams:
    layers: list
    activation: str = "prelu"
    final_activation: bool = True

    def parameters(self):
        out = {}
        for i, layer in enumerate(self.layers):
            out[f"encoder.{i}.weight"] = layer.weight
            out[f"encoder.{i}.attention"] = layer.attention
            if layer.slope is not None:
                out[f"encoder.{i}.slope"] = layer.slope
        return out


@dataclass
class HeadParams:
    weights: list
    biases: list
    activation: str = "prelu"
    slope: ad.Node | None = None

    def parameters(self):
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"head.{i}.weight"] = w
            out[f"head.{i}.bias"] = b
        if self.slope is not None:
            out["head.slope"] = self.slope
        return out


def _slope(activation, name):
    return ad.parameter([[PRELU_INIT]], name) if activation == "prelu" else None


def init_encoder(in_dim, hidden, rng, activation="prelu", final_activation=True, n_layers=2):
    if activation not in ACTIVATIONS:
        raise InvalidArgument(f"unknown activation {activation!r}; choose from {ACTIVATIONS}")
    layers = []
    dims = [in_dim] + [hidden] * n_layers
    for i in range(n_layers):
        w = ad.parameter(glorot(rng, dims[i], dims[i + 1]), f"encoder.{i}.weight")
        a = ad.parameter(glorot(rng, 2 * dims[i + 1], 1), f"encoder.{i}.attention")
        layers.append(GatLayerParams(w, a, _slope(activation, f"encoder.{i}.slope")))
    return EncoderParams(layers, activation, final_activation)


def init_head(in_dim, out_dim, rng, activation="prelu"):
    weights = [
        ad.parameter(glorot(rng, in_dim, out_dim), "head.0.weight"),
        ad.parameter(glorot(rng, out_dim, out_dim), "head.1.weight"),
    ]
    biases = [ad.parameter(np.zeros((1, out_dim)), f"head.{i}.bias") for i in range(2)]
    return HeadParams(weights, biases, activation, _slope(activation, "head.slope"))


def gat_layer(layer, graph, H, activation="prelu", apply_activation=True):
    """One attention layer; node ``i`` attends over itself and its in-neighbors.

    ``e_ij = LeakyReLU_0.2(a^T [W h_i || W h_j])``, clamped to +-50, then
    softmax-normalized per target and used to weight ``W h_j``.
    """
    H = ad._lift(H)
    if H.value.ndim != 2 or H.shape[0] != graph.n or H.shape[1] != layer.weight.shape[0]:
        raise InvalidArgument(
            f"input of shape {H.shape} does not fit a {graph.n}-node graph and "
            f"weight of shape {layer.weight.shape}"
        )
    indptr, src, dst = graph.attention_index()
    out_dim = layer.out_dim
    WH = H @ layer.weight
    score_dst = WH @ ad.slice_rows(layer.attention, 0, out_dim)
    score_src = WH @ ad.slice_rows(layer.attention, out_dim, 2 * out_dim)
    logits = ad.leaky_relu(ad.gather_rows(score_dst, dst) + ad.gather_rows(score_src, src), 0.2)
    alpha = ad.segment_softmax(ad.clip(logits, -LOGIT_CLAMP, LOGIT_CLAMP), indptr)
    out = ad.segment_sum(ad.gather_rows(WH, src) * alpha, indptr)
    return activate(out, activation, layer.slope) if apply_activation else out


def encode(enc, graph, X):
    """Node embeddings ``Z`` (N x d') as a differentiable node."""
    X = ad._lift(X)
    if X.shape[0] != graph.n:
        raise InvalidArgument(f"feature matrix has {X.shape[0]} rows for a {graph.n}-node graph")
    h = X
    last = len(enc.layers) - 1
    for i, layer in enumerate(enc.layers):
        h = gat_layer(layer, graph, h, enc.activation, i < last or enc.final_activation)
    return h


def embed(enc, graph, X):
    """Plain-array embeddings for downstream use."""
    return encode(enc, graph, X).value


def project(head, Z):
    """``H = Lin2(act(Lin1(Z)))``."""
    Z = ad._lift(Z)
    if Z.value.ndim != 2 or Z.shape[1] != head.weights[0].shape[0]:
        raise InvalidArgument(f"projection head expects {head.weights[0].shape[0]} columns, got {Z.shape}")
    h = Z @ head.weights[0] + head.biases[0]
    h = activate(h, head.activation, head.slope)
    return h @ head.weights[1] + head.biases[1]
