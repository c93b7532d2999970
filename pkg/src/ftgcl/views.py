"""Feature- and topology-proximity neighbor rankings and the masked kNN views built from them."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SchemaError
from .graph import Graph

FEATURE = "feature"
TOPOLOGY = "topology"

# cosine ties closer than this are ordered by node index
_TIE_DECIMALS = 12


@dataclass(frozen=True, eq=False)
class NeighborRanking:
    """Top-``k_max`` cosine neighbors per node.

    ``neighbors`` and ``similarities`` are (N, k_max) arrays in descending
    similarity order, padded with -1 / NaN where a list is shorter.
    """

    neighbors: np.ndarray
    similarities: np.ndarray
    lengths: np.ndarray
    space: str
    k_max: int

    @property
    def n(self):
        return self.neighbors.shape[0]

    def neighbor_list(self, v):
        k = self.lengths[v]
        return list(zip(self.neighbors[v, :k].tolist(), self.similarities[v, :k].tolist()))


@dataclass(frozen=True, eq=False)
class View:
    graph: Graph
    features: np.ndarray
    k: int
    space: str


def rank_neighbors(vectors, k_max, space=FEATURE):
    """Exact brute-force cosine top-``k_max`` neighbors (self excluded).

    Zero rows get empty lists; as candidates for other nodes they score 0.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidArgument("vectors must be a 2-D matrix")
    n = X.shape[0]
    if k_max < 1:
        raise InvalidArgument(f"k_max must be at least 1, got {k_max}")
    if n < 2:
        raise InvalidArgument("need at least two vectors to rank neighbors")
    if not np.isfinite(X).all():
        raise InvalidArgument("vectors contain non-finite entries")
    norms = np.linalg.norm(X, axis=1)
    nonzero = norms > 0
    Xn = np.zeros_like(X)
    Xn[nonzero] = X[nonzero] / norms[nonzero, None]
    sim = np.clip(Xn @ Xn.T, -1.0, 1.0)

    k_eff = min(k_max, n - 1)
    neighbors = np.full((n, k_max), -1, dtype=np.int64)
    sims = np.full((n, k_max), np.nan)
    lengths = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    for i in range(n):
        if not nonzero[i]:
            continue
        cand = np.delete(idx, i)
        s = sim[i, cand]
        order = np.lexsort((cand, -np.round(s, _TIE_DECIMALS)))[:k_eff]
        k = len(order)
        neighbors[i, :k] = cand[order]
        sims[i, :k] = s[order]
        lengths[i] = k
    return NeighborRanking(neighbors, sims, lengths, space, int(k_max))


def materialize_view(ranking, features, k):
    """Directed kNN view keeping each node's first ``k`` ranked neighbors as out-edges."""
    if not 1 <= k <= ranking.k_max:
        raise InvalidArgument(f"k={k} outside [1, {ranking.k_max}]")
    keep = np.arange(ranking.k_max)[None, :] < np.minimum(ranking.lengths, k)[:, None]
    src = np.broadcast_to(np.arange(ranking.n)[:, None], keep.shape)[keep]
    dst = ranking.neighbors[keep]
    return View(Graph(ranking.n, src, dst, directed=True), features, int(k), ranking.space)


def sample_view(fpg, tpg, features, step, rng):
    """View for training step ``step`` (1-based): feature view on odd steps,
    topology view on even steps, with ``k`` uniform on ``1..k_max``."""
    if step < 1:
        raise InvalidArgument(f"step must be >= 1, got {step}")
    ranking = fpg if step % 2 == 1 else tpg
    return sample_view_from(ranking, features, rng)


def sample_view_from(ranking, features, rng):
    k = int(rng.integers(1, ranking.k_max + 1))
    return materialize_view(ranking, features, k)


def save_ranking(ranking, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# space={ranking.space} k_max={ranking.k_max} n={ranking.n}\n")
        for v in range(ranking.n):
            for u, s in ranking.neighbor_list(v):
                fh.write(f"{v}\t{u}\t{s!r}\n")


def load_ranking(path):
    meta = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta.update(kv.split("=", 1) for kv in line[1:].split() if "=" in kv)
                continue
            toks = line.split("\t")
            if len(toks) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 'node<TAB>neighbor<TAB>similarity'")
            try:
                rows.append((int(toks[0]), int(toks[1]), float(toks[2])))
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: malformed ranking entry") from None
    try:
        n = int(meta["n"]) if "n" in meta else 1 + max(max(r[0], r[1]) for r in rows)
        k_max = int(meta["k_max"]) if "k_max" in meta else None
    except ValueError:
        raise SchemaError(f"{path}: malformed header") from None
    space = meta.get("space", FEATURE)
    per_node = [[] for _ in range(n)]
    for v, u, s in rows:
        if not (0 <= v < n and 0 <= u < n):
            raise SchemaError(f"{path}: node id outside [0, {n})")
        per_node[v].append((u, s))
    if k_max is None:
        k_max = max(len(lst) for lst in per_node)
    neighbors = np.full((n, k_max), -1, dtype=np.int64)
    sims = np.full((n, k_max), np.nan)
    lengths = np.zeros(n, dtype=np.int64)
    for v, lst in enumerate(per_node):
        if len(lst) > k_max:
            raise SchemaError(f"{path}: node {v} lists {len(lst)} neighbors, more than k_max={k_max}")
        lengths[v] = len(lst)
        for j, (u, s) in enumerate(lst):
            neighbors[v, j] = u
            sims[v, j] = s
    return NeighborRanking(neighbors, sims, lengths, space, k_max)
