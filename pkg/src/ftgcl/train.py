"""Contrastive training loop: views, shared encoder and head, Adam with L2 decay."""
import json
import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import autodiff as ad
from . import views as views_mod
from .contrast import channel_loss, node_level_loss
from .encoder import encode, init_encoder, init_head, project
from .errors import DegenerateLossError, InvalidArgument, NumericalError
from .topo import structural_embedding

log = logging.getLogger(__name__)

VARIANTS = ("ft", "f", "t", "ft-nl")


@dataclass
class TrainConfig:
    # defaults are the Cora settings
    k_max: int = 8
    d: int = 512
    d_prime: int = 256
    lr: float = 5e-4
    tau: float = 0.2
    weight_decay: float = 5e-5
    activation: str = "prelu"
    iterations: int = 400
    seed: int = 0
    gamma: int = 30
    walk_len: int = 10
    basis: int = 200
    wl_iters: int = 3
    subgraph: str = "walk"
    egonet_radius: int = 1
    final_activation: bool = True

    def __post_init__(self):
        for name in ("k_max", "d", "d_prime", "gamma", "walk_len", "basis", "wl_iters", "egonet_radius"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)}")
        if self.iterations < 0:
            raise InvalidArgument("iterations must be non-negative")
        if not (self.lr > 0 and self.tau > 0 and self.weight_decay >= 0):
            raise InvalidArgument("lr and tau must be positive, weight_decay non-negative")

    @classmethod
    def from_dict(cls, raw):
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InvalidArgument(f"unknown config field(s): {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(state, params, grads, lr, weight_decay=0.0):
    """One Adam update in place, with L2 decay folded into the gradient.

    ``params`` maps names to parameter nodes, ``grads`` maps the same names
    to arrays.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for {name}")
        if g.shape != params[name].shape:
            raise InvalidArgument(f"gradient shape {g.shape} does not match {name} {params[name].shape}")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for name, g in grads.items():
        p = params[name]
        g = g + weight_decay * p.value
        m = state.m.get(name, np.zeros_like(g))
        v = state.v.get(name, np.zeros_like(g))
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        p.value = p.value - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state


@dataclass
class ModelState:
    encoder: object
    head: object
    optimizer: AdamState
    config: TrainConfig
    in_dim: int

    def parameters(self):
        return {**self.encoder.parameters(), **self.head.parameters()}


@dataclass
class TrainResult:
    state: ModelState
    losses: list
    records: list  # one dict per step: step, variant, space, k, loss


def init_model(in_dim, cfg):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    enc = init_encoder(in_dim, cfg.d_prime, rng, cfg.activation, cfg.final_activation)
    head = init_head(cfg.d_prime, cfg.d, rng, cfg.activation)
    return ModelState(enc, head, AdamState(), cfg, in_dim)


def build_rankings(dataset, cfg, need_topology=True):
    """Feature and topology neighbor rankings with ``cfg.k_max`` entries per node."""
    fpg = views_mod.rank_neighbors(dataset.features, cfg.k_max, views_mod.FEATURE)
    tpg = None
    if need_topology:
        emb = structural_embedding(
            dataset.graph, m=cfg.basis, t=cfg.wl_iters, extractor=cfg.subgraph,
            gamma=cfg.gamma, walk_len=cfg.walk_len, radius=cfg.egonet_radius, seed=cfg.seed,
        )
        tpg = views_mod.rank_neighbors(emb.R, cfg.k_max, views_mod.TOPOLOGY)
    return fpg, tpg


def forward_pair(state, graph, view_graph, X):
    """Projected representations of the original graph and a view, through one shared parameter set."""
    H = project(state.head, encode(state.encoder, graph, X))
    Ha = project(state.head, encode(state.encoder, view_graph, X))
    return H, Ha


def _space_for(variant, step):
    if variant == "f":
        return views_mod.FEATURE
    if variant == "t":
        return views_mod.TOPOLOGY
    return views_mod.FEATURE if step % 2 == 1 else views_mod.TOPOLOGY


def train(dataset, cfg, variant="ft", fpg=None, tpg=None, on_step=None):
    """Train encoder and head for ``cfg.iterations`` steps.

    Rankings are computed from the dataset when not supplied. ``on_step``,
    if given, receives each step's record as it is produced.
    """
    if variant not in VARIANTS:
        raise InvalidArgument(f"unknown variant {variant!r}; choose from {VARIANTS}")
    if cfg.k_max >= dataset.graph.n:
        raise InvalidArgument(f"k_max={cfg.k_max} must be below the node count {dataset.graph.n}")
    needs_f = variant != "t"
    needs_t = variant != "f"
    if (needs_f and fpg is None) or (needs_t and tpg is None):
        f_built, t_built = build_rankings(dataset, cfg, need_topology=needs_t and tpg is None)
        fpg = fpg if fpg is not None else f_built
        tpg = tpg if tpg is not None else t_built

    state = init_model(dataset.features.shape[1], cfg)
    params = state.parameters()
    view_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(2)[1])
    loss_fn = node_level_loss if variant == "ft-nl" else channel_loss
    X = ad.constant(dataset.features)
    losses, records = [], []
    for step in range(1, cfg.iterations + 1):
        space = _space_for(variant, step)
        ranking = fpg if space == views_mod.FEATURE else tpg
        view = views_mod.sample_view_from(ranking, dataset.features, view_rng)
        H, Ha = forward_pair(state, dataset.graph, view.graph, X)
        try:
            loss = loss_fn(H, Ha, cfg.tau)
            adj = ad.grad(loss)
        except (InvalidArgument, NumericalError) as exc:
            raise DegenerateLossError(step, str(exc)) from exc
        by_node = {id(node): g for node, g in adj.items()}
        grads = {name: by_node.get(id(node), np.zeros_like(node.value)) for name, node in params.items()}
        adam_step(state.optimizer, params, grads, cfg.lr, cfg.weight_decay)
        value = float(loss.value.reshape(-1)[0])
        losses.append(value)
        rec = {"step": step, "variant": variant, "space": space, "k": view.k, "loss": value}
        records.append(rec)
        if on_step is not None:
            on_step(rec)
    return TrainResult(state, losses, records)


CHECKPOINT_FORMAT = "ftgcl-ckpt-v1"


def save_checkpoint(state, path):
    payload = {
        "format": CHECKPOINT_FORMAT,
        "in_dim": state.in_dim,
        "config": state.config.to_dict(),
        "params": {
            name: {"shape": list(node.shape), "data": node.value.ravel().tolist()}
            for name, node in state.parameters().items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise InvalidArgument(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
    cfg = TrainConfig.from_dict(payload["config"])
    state = init_model(payload["in_dim"], cfg)
    params = state.parameters()
    stored = payload["params"]
    if set(stored) != set(params):
        raise InvalidArgument(f"{path}: parameter names do not match the configured model")
    for name, node in params.items():
        entry = stored[name]
        value = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        if value.shape != node.shape:
            raise InvalidArgument(f"{path}: {name} has shape {value.shape}, expected {node.shape}")
        node.value = value
    return state
