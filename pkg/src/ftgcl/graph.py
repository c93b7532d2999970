"""Graph and dataset containers, file loaders, and synthetic generators."""
import json
import logging
import os
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidArgument, NotFound, SchemaError

log = logging.getLogger(__name__)


def _csr(n, rows, cols):
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols.astype(np.int64)


class Graph:
    """Unweighted graph over nodes ``0..n-1`` with sorted in/out adjacency.

    Undirected graphs store every edge in both directions. Self-loops and
    duplicate edges are dropped at construction. Instances are treated as
    immutable.
    """

    def __init__(self, n, src, dst, directed):
        n = int(n)
        if n < 0:
            raise InvalidArgument("node count must be non-negative")
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise InvalidArgument("src and dst must have equal length")
        if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise InvalidArgument(f"edge endpoint outside [0, {n})")
        loops = src == dst
        if loops.any():
            log.warning("dropping %d self-loop(s)", int(loops.sum()))
            src, dst = src[~loops], dst[~loops]
        if not directed:
            src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        pairs = np.unique(np.stack([src, dst], axis=1), axis=0) if len(src) else np.empty((0, 2), np.int64)
        n_dup = len(src) - len(pairs) if directed else (len(src) - len(pairs)) // 2
        if n_dup > 0:
            log.warning("collapsed %d duplicate edge(s)", n_dup)
        self.n = n
        self.directed = bool(directed)
        self._src = pairs[:, 0].copy()
        self._dst = pairs[:, 1].copy()
        self.out_indptr, self.out_indices = _csr(n, self._src, self._dst)
        self.in_indptr, self.in_indices = _csr(n, self._dst, self._src)
        self._cache = {}

    @classmethod
    def _from_arcs(cls, n, src, dst, directed):
        # arcs already contain both directions when undirected
        g = cls(n, src, dst, directed=True)
        g.directed = bool(directed)
        return g

    @classmethod
    def from_edges(cls, n, edges, directed=False):
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n, edges[:, 0], edges[:, 1], directed)

    def out_neighbors(self, v):
        return self.out_indices[self.out_indptr[v]:self.out_indptr[v + 1]]

    def in_neighbors(self, v):
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def out_degree(self):
        return np.diff(self.out_indptr)

    def in_degree(self):
        return np.diff(self.in_indptr)

    @property
    def num_arcs(self):
        """Stored directed arcs (an undirected edge counts twice)."""
        return len(self._src)

    @property
    def num_edges(self):
        """Edges as the user sees them: undirected edges counted once."""
        return self.num_arcs if self.directed else self.num_arcs // 2

    def edges(self):
        """Edge list of shape (num_edges, 2); undirected edges listed once with src < dst."""
        pairs = np.stack([self._src, self._dst], axis=1)
        if not self.directed:
            pairs = pairs[pairs[:, 0] < pairs[:, 1]]
        return pairs

    def arcs(self):
        return np.stack([self._src, self._dst], axis=1)

    def undirected_adjacency(self):
        """CSR (indptr, indices) of the graph with orientation ignored."""
        if "undirected" not in self._cache:
            rows = np.concatenate([self._src, self._dst])
            cols = np.concatenate([self._dst, self._src])
            pairs = np.unique(np.stack([rows, cols], axis=1), axis=0) if len(rows) else np.empty((0, 2), np.int64)
            self._cache["undirected"] = _csr(self.n, pairs[:, 0], pairs[:, 1])
        return self._cache["undirected"]

    def attention_index(self):
        """Message-passing index with one self-loop per node.

        Returns ``(indptr, src, dst)``: arcs ``src[e] -> dst[e]`` grouped by
        target so that segment ``i`` holds node ``i`` itself followed by its
        in-neighbors.
        """
        if "attention" not in self._cache:
            deg = self.in_degree() + 1
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            src = np.empty(indptr[-1], dtype=np.int64)
            dst = np.repeat(np.arange(self.n, dtype=np.int64), deg)
            src[indptr[:-1]] = np.arange(self.n)
            mask = np.ones(indptr[-1], dtype=bool)
            mask[indptr[:-1]] = False
            src[mask] = self.in_indices
            self._cache["attention"] = (indptr, src, dst)
        return self._cache["attention"]

    def induced(self, nodes):
        """Node-induced subgraph over ``nodes`` (sorted, deduplicated)."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        local = np.full(self.n, -1, dtype=np.int64)
        local[nodes] = np.arange(len(nodes))
        keep = (local[self._src] >= 0) & (local[self._dst] >= 0)
        sub = Graph._from_arcs(len(nodes), local[self._src[keep]], local[self._dst[keep]], self.directed)
        return Subgraph(nodes, sub)

    def permute(self, perm):
        """Relabel node ``v`` as ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Graph._from_arcs(self.n, perm[self._src], perm[self._dst], self.directed)

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self._src, other._src)
            and np.array_equal(self._dst, other._dst)
        )

    __hash__ = None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, edges={self.num_edges}, {kind})"


@dataclass(frozen=True, eq=False)
class Subgraph:
    nodes: np.ndarray  # original ids, ascending
    graph: Graph  # local ids: local i <-> nodes[i]


@dataclass(eq=False)
class Dataset:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray | None = None
    splits: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] != self.graph.n:
            raise SchemaError(
                f"features must be a {self.graph.n}-row matrix, got shape {self.features.shape}"
            )
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.graph.n,):
                raise SchemaError(f"expected {self.graph.n} labels, got {self.labels.shape[0]}")
            if len(self.labels) and self.labels.min() < 0:
                raise SchemaError("labels must be non-negative")
        seen = set()
        for name, idx in list(self.splits.items()):
            idx = np.asarray(idx, dtype=np.int64)
            if len(idx) and (idx.min() < 0 or idx.max() >= self.graph.n):
                raise SchemaError(f"split {name!r} has an index outside [0, {self.graph.n})")
            overlap = seen.intersection(idx.tolist())
            if overlap:
                raise SchemaError(f"split {name!r} overlaps another split at {sorted(overlap)[:5]}")
            seen.update(idx.tolist())
            self.splits[name] = idx

    @property
    def num_classes(self):
        return 0 if self.labels is None else int(self.labels.max()) + 1


def _parse_int(tok, path, lineno):
    try:
        return int(tok)
    except ValueError:
        raise SchemaError(f"{path}:{lineno}: expected an integer, got {tok!r}") from None


def load_dataset(dir_path):
    """Read a dataset directory (``edges.tsv``, ``features.csv``, optional
    ``labels.txt`` and ``splits.json``)."""
    edges_path = os.path.join(dir_path, "edges.tsv")
    feat_path = os.path.join(dir_path, "features.csv")
    for p in (edges_path, feat_path):
        if not os.path.isfile(p):
            raise NotFound(f"missing {p}")

    try:
        features = np.loadtxt(feat_path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise SchemaError(f"{feat_path}: {exc}") from None
    n = features.shape[0]

    with open(edges_path, encoding="utf-8") as fh:
        header = fh.readline().strip().lower()
        if header not in ("directed", "undirected"):
            raise SchemaError(f"{edges_path}: first line must be 'directed' or 'undirected', got {header!r}")
        pairs = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            toks = line.split("\t") if "\t" in line else line.split()
            if len(toks) != 2:
                raise SchemaError(f"{edges_path}:{lineno}: expected 'src<TAB>dst'")
            pairs.append((_parse_int(toks[0], edges_path, lineno), _parse_int(toks[1], edges_path, lineno)))
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise SchemaError(f"{edges_path}: node id outside [0, {n}) implied by {feat_path}")
    directed = header == "directed"
    graph = Graph(n, edges[:, 0], edges[:, 1], directed)

    labels = None
    labels_path = os.path.join(dir_path, "labels.txt")
    if os.path.isfile(labels_path):
        with open(labels_path, encoding="utf-8") as fh:
            vals = [_parse_int(s.strip(), labels_path, i) for i, s in enumerate(fh, start=1) if s.strip()]
        if len(vals) != n:
            raise SchemaError(f"{labels_path}: {len(vals)} labels for {n} nodes")
        labels = np.asarray(vals, dtype=np.int64)

    splits = {}
    splits_path = os.path.join(dir_path, "splits.json")
    if os.path.isfile(splits_path):
        with open(splits_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise SchemaError(f"{splits_path}: expected an object of name -> index array")
        splits = {str(k): np.asarray(v, dtype=np.int64) for k, v in raw.items()}

    return Dataset(graph, features, labels, splits)


def save_dataset(dataset, dir_path):
    os.makedirs(dir_path, exist_ok=True)
    g = dataset.graph
    with open(os.path.join(dir_path, "edges.tsv"), "w", encoding="utf-8") as fh:
        fh.write("directed\n" if g.directed else "undirected\n")
        for s, t in g.edges():
            fh.write(f"{s}\t{t}\n")
    with open(os.path.join(dir_path, "features.csv"), "w", encoding="utf-8") as fh:
        for row in dataset.features:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    if dataset.labels is not None:
        with open(os.path.join(dir_path, "labels.txt"), "w", encoding="utf-8") as fh:
            fh.write("".join(f"{int(y)}\n" for y in dataset.labels))
    if dataset.splits:
        with open(os.path.join(dir_path, "splits.json"), "w", encoding="utf-8") as fh:
            json.dump({k: [int(i) for i in v] for k, v in dataset.splits.items()}, fh)


def barbell(m1, m2):
    """Two ``m1``-cliques joined through a path of ``m2`` bridge nodes.

    Nodes ``0..m1-1`` form the first clique, ``m1..m1+m2-1`` the bridge and
    the last ``m1`` nodes the second clique. Node ``m1-1`` and node
    ``m1+m2`` are the clique members touching the bridge.
    """
    if m1 < 3:
        raise InvalidArgument(f"barbell needs cliques of at least 3 nodes, got m1={m1}")
    if m2 < 0:
        raise InvalidArgument(f"bridge length must be non-negative, got m2={m2}")
    n = 2 * m1 + m2
    edges = list(combinations(range(m1), 2))
    edges += list(combinations(range(m1 + m2, n), 2))
    path = [m1 - 1] + list(range(m1, m1 + m2)) + [m1 + m2]
    edges += list(zip(path[:-1], path[1:]))
    return Graph.from_edges(n, edges, directed=False)


def erdos_renyi(n, p, seed=0):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return Graph(n, iu[keep], ju[keep], directed=False)


def planted_partition(classes, per_class, p_in, p_out, feat_dim, noise_sd, seed=0):
    """Assortative stochastic block model with noisy one-hot class features."""
    if not 0.0 <= p_out <= 1.0 or not 0.0 <= p_in <= 1.0:
        raise InvalidArgument("edge probabilities must lie in [0, 1]")
    if p_in < p_out:
        raise InvalidArgument(f"assortative generator requires p_in >= p_out, got {p_in} < {p_out}")
    if classes < 1 or per_class < 1:
        raise InvalidArgument("classes and per_class must be positive")
    if feat_dim < classes:
        raise InvalidArgument(f"feat_dim ({feat_dim}) must be at least the class count ({classes})")
    rng = np.random.default_rng(seed)
    n = classes * per_class
    labels = np.repeat(np.arange(classes), per_class)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    graph = Graph(n, iu[keep], ju[keep], directed=False)
    features = np.zeros((n, feat_dim))
    features[np.arange(n), labels] = 1.0
    features += noise_sd * rng.standard_normal((n, feat_dim))
    return Dataset(graph, features, labels)
