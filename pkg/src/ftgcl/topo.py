"""Local-topology coordinates from a WL subtree kernel with Nystroem factorization.

Every node gets a local subgraph (random-walk induced or an egonet). The
subgraphs are compared with the Weisfeiler-Lehman subtree kernel, and the
kernel matrix is factorized from ``m`` sampled columns as ``K ~= R R^T``.
Rows of ``R`` place nodes with similar local structure close together.
"""
import itertools
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import InvalidArgument

log = logging.getLogger(__name__)

_table_ids = itertools.count()


class WLTable:
    """Compression table mapping refinement signatures to integer labels.

    Histograms are only comparable when built against the same table.
    """

    def __init__(self):
        self.id = next(_table_ids)
        self._labels = {}

    def __len__(self):
        return len(self._labels)

    def compress(self, signature):
        label = self._labels.get(signature)
        if label is None:
            label = self._labels[signature] = len(self._labels)
        return label


_default_table = WLTable()


@dataclass(frozen=True)
class WlHistogram:
    counts: dict  # compressed label -> count, over iterations 0..t
    table_id: int
    n_nodes: int
    iterations: int

    def total(self):
        return sum(self.counts.values())


@dataclass
class StructuralEmbedding:
    R: np.ndarray
    basis: np.ndarray
    iterations: int
    m: int


def _walk_subgraphs(graph, starts, uniforms):
    visits = kernels.random_walks(graph.out_indptr, graph.out_indices, starts, uniforms)
    out = []
    for row in visits:
        nodes = np.unique(row[row >= 0])
        out.append(graph.induced(nodes))
    return out


def sample_walk_subgraph(graph, v, gamma=30, length=10, rng=None):
    """Subgraph induced by the nodes that ``gamma`` random walks of ``length``
    steps from ``v`` visit. Walks follow out-edges and stop early at sinks."""
    if not 0 <= v < graph.n:
        raise InvalidArgument(f"node {v} outside [0, {graph.n})")
    if gamma < 1 or length < 1:
        raise InvalidArgument("gamma and length must be at least 1")
    rng = np.random.default_rng(rng)
    uniforms = rng.random((1, gamma, length))
    return _walk_subgraphs(graph, np.array([v]), uniforms)[0]


def walk_subgraphs(graph, gamma=30, length=10, seed=0):
    """Random-walk subgraphs for every node.

    Node ``i`` draws from its own child stream of ``seed``, so the result for
    ``i`` equals ``sample_walk_subgraph(graph, i, ..., rng=child_i)``.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(graph.n)
    uniforms = np.empty((graph.n, gamma, length))
    for i, child in enumerate(children):
        uniforms[i] = np.random.default_rng(child).random((gamma, length))
    return _walk_subgraphs(graph, np.arange(graph.n), uniforms)


def egonet(graph, v, r=1):
    """Induced subgraph on nodes within undirected distance ``r`` of ``v``."""
    if r < 1:
        raise InvalidArgument(f"egonet radius must be at least 1, got {r}")
    indptr, indices = graph.undirected_adjacency()
    seen = {int(v)}
    frontier = [int(v)]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w in indices[indptr[u]:indptr[u + 1]].tolist():
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return graph.induced(sorted(seen))


def egonets(graph, r=1):
    return [egonet(graph, v, r) for v in range(graph.n)]


def wl_histogram(subgraph, t=3, table=None):
    """WL subtree label histogram over iterations ``0..t``.

    All nodes start with one shared label; each iteration relabels a node by
    its own label plus the sorted multiset of its neighbors' labels.
    Orientation is ignored.
    """
    if t < 0:
        raise InvalidArgument("WL iteration count must be non-negative")
    table = _default_table if table is None else table
    g = subgraph.graph
    indptr, indices = g.undirected_adjacency()
    nbrs = [indices[indptr[v]:indptr[v + 1]].tolist() for v in range(g.n)]
    labels = [table.compress(("init",))] * g.n
    counts = {}
    for it in range(t + 1):
        if it > 0:
            labels = [
                table.compress((labels[v], tuple(sorted(labels[u] for u in nbrs[v]))))
                for v in range(g.n)
            ]
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
    return WlHistogram(counts, table.id, g.n, t)


def wl_kernel(a, b):
    """Sparse dot product of two histograms from the same table."""
    if a.table_id != b.table_id:
        raise InvalidArgument(
            f"histograms come from different compression tables ({a.table_id} vs {b.table_id})"
        )
    if len(a.counts) > len(b.counts):
        a, b = b, a
    return float(sum(c * b.counts.get(lab, 0) for lab, c in a.counts.items()))


def histogram_matrix(histograms):
    """Stack histograms into a sparse (len(histograms), n_labels) count matrix."""
    if len({h.table_id for h in histograms}) > 1:
        raise InvalidArgument("histograms come from different compression tables")
    rows, cols, vals = [], [], []
    for i, h in enumerate(histograms):
        rows.extend([i] * len(h.counts))
        cols.extend(h.counts.keys())
        vals.extend(h.counts.values())
    n_labels = max(cols) + 1 if cols else 0
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(len(histograms), n_labels)
    )


def kernel_matrix(histograms, columns=None):
    """Kernel values between all histograms and those indexed by ``columns``."""
    phi = histogram_matrix(histograms)
    right = phi if columns is None else phi[np.asarray(columns)]
    return (phi @ right.T).toarray()


def nystrom_embed(subgraphs, m, t=3, eps=1e-10, rng=None):
    """Nystroem factor ``R`` with ``R R^T ~= K`` from ``m`` uniformly sampled basis subgraphs.

    Singular values of the basis block below ``eps * max`` are dropped from
    the inverse square root.
    """
    n = len(subgraphs)
    if not 1 <= m <= n:
        raise InvalidArgument(f"basis size m={m} must lie in [1, {n}]")
    rng = np.random.default_rng(rng)
    table = WLTable()
    hists = [wl_histogram(s, t, table) for s in subgraphs]
    basis = rng.choice(n, size=m, replace=False)
    cross = kernel_matrix(hists, basis)  # N x m
    block = cross[basis]  # m x m
    U, S, Vt = np.linalg.svd(block)
    keep = S > eps * S.max() if S.max() > 0 else np.zeros_like(S, dtype=bool)
    inv_sqrt = np.where(keep, 1.0 / np.sqrt(np.where(keep, S, 1.0)), 0.0)
    normalizer = (U * inv_sqrt) @ Vt
    # identical kernel rows must map to bit-identical coordinates
    uniq, inverse = np.unique(cross, axis=0, return_inverse=True)
    R = (uniq @ normalizer)[inverse.ravel()]
    return StructuralEmbedding(R, basis, t, m)


def structural_embedding(graph, m=200, t=3, extractor="walk", gamma=30, walk_len=10,
                         radius=1, eps=1e-10, seed=0):
    """Full local-topology pipeline: extract subgraphs, then ``nystrom_embed``.

    ``m`` is capped at the node count.
    """
    walk_seed, basis_seed = np.random.SeedSequence(seed).spawn(2)
    if extractor == "walk":
        subgraphs = walk_subgraphs(graph, gamma, walk_len, walk_seed)
    elif extractor == "egonet":
        subgraphs = egonets(graph, radius)
    else:
        raise InvalidArgument(f"unknown subgraph extractor {extractor!r}")
    if m > graph.n:
        log.info("basis size %d capped at node count %d", m, graph.n)
        m = graph.n
    return nystrom_embed(subgraphs, m, t, eps, np.random.default_rng(basis_seed))


def save_embedding(emb, path):
    np.savetxt(path, emb.R, delimiter=",", fmt="%.17g")
