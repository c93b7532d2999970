"""Downstream evaluation: logistic probe, link prediction, edge homophily."""
import numpy as np
from scipy.special import expit, log_softmax
from scipy.stats import rankdata

from .errors import InvalidArgument
from .graph import Graph


def macro_f1(y_true, y_pred, n_classes):
    """Unweighted mean of per-class F1 over ``0..n_classes-1``; undefined F1 counts as 0."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    scores = []
    for c in range(n_classes):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def _standardize(Z, train_idx):
    mu = Z[train_idx].mean(axis=0)
    sd = Z[train_idx].std(axis=0)
    sd[sd == 0] = 1.0
    # scaled so the mean squared row norm is ~1, keeping step 0.1 stable for any width
    return (Z - mu) / sd / np.sqrt(Z.shape[1])


def fit_logistic(X, y, n_classes, l2=1e-3, step=0.1, tol=1e-5, max_iter=5000):
    """Multinomial logistic regression by full-batch gradient descent.

    Minimizes mean cross-entropy + ``l2/2 * ||W||^2`` (bias unpenalized).
    Stops when the gradient norm drops below ``tol`` or after ``max_iter``.
    The step is capped at ``1/L`` for the gradient's Lipschitz bound ``L``,
    so very large ``l2`` cannot make the descent diverge.
    """
    n, f = X.shape
    lip = 0.5 * (np.linalg.norm(X, 2) ** 2 + n) / n + l2
    step = min(step, 1.0 / lip)
    W = np.zeros((f, n_classes))
    b = np.zeros(n_classes)
    Y = np.eye(n_classes)[y]
    for _ in range(max_iter):
        P = np.exp(log_softmax(X @ W + b, axis=1))
        R = (P - Y) / n
        gW = X.T @ R + l2 * W
        gb = R.sum(axis=0)
        if np.sqrt(np.sum(gW * gW) + np.sum(gb * gb)) < tol:
            break
        W -= step * gW
        b -= step * gb
    return W, b


def logistic_probe(Z, labels, train_idx, test_idx, l2=1e-3):
    """Accuracy and macro-F1 of an L2-regularized logistic probe on embeddings ``Z``."""
    Z = np.asarray(Z, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    train_idx = np.asarray(train_idx, dtype=np.int64)
    test_idx = np.asarray(test_idx, dtype=np.int64)
    if np.intersect1d(train_idx, test_idx).size:
        raise InvalidArgument("train and test indices overlap")
    if len(test_idx) == 0:
        raise InvalidArgument("empty test set")
    if len(np.unique(labels[train_idx])) < 2:
        raise InvalidArgument("training set contains a single class")
    n_classes = int(labels.max()) + 1
    X = _standardize(Z, train_idx)
    W, b = fit_logistic(X[train_idx], labels[train_idx], n_classes, l2)
    pred = np.argmax(X[test_idx] @ W + b, axis=1)
    truth = labels[test_idx]
    return float(np.mean(pred == truth)), macro_f1(truth, pred, n_classes)


def _pairs(edges, name):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(e) == 0:
        raise InvalidArgument(f"{name} edge set is empty")
    return e


def auc_score(pos_scores, neg_scores):
    """Probability a positive outranks a negative, ties counted one half."""
    pos_scores = np.asarray(pos_scores, dtype=np.float64)
    neg_scores = np.asarray(neg_scores, dtype=np.float64)
    ranks = rankdata(np.concatenate([pos_scores, neg_scores]))
    n_pos, n_neg = len(pos_scores), len(neg_scores)
    return float((ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(pos_scores, neg_scores):
    """Area under the precision-recall curve from a descending-score sweep.

    Tied scores enter the sweep together as one threshold.
    """
    scores = np.concatenate([pos_scores, neg_scores])
    truth = np.concatenate([np.ones(len(pos_scores)), np.zeros(len(neg_scores))])
    order = np.argsort(-scores, kind="mergesort")
    scores, truth = scores[order], truth[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(scores)), len(scores) - 1]
    tp = np.cumsum(truth)[last_of_group]
    seen = last_of_group + 1
    precision = tp / seen
    recall = tp / truth.sum()
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def link_pred_eval(Z, pos_edges, neg_edges):
    """AUC and AP of the inner-product decoder ``sigmoid(z_u . z_v)``.

    Ranking uses the inner product itself, which orders pairs exactly as the
    sigmoid does without its saturation ties.
    """
    Z = np.asarray(Z, dtype=np.float64)
    pos = _pairs(pos_edges, "positive")
    neg = _pairs(neg_edges, "negative")
    pos_logit = np.einsum("ij,ij->i", Z[pos[:, 0]], Z[pos[:, 1]])
    neg_logit = np.einsum("ij,ij->i", Z[neg[:, 0]], Z[neg[:, 1]])
    return auc_score(pos_logit, neg_logit), average_precision(pos_logit, neg_logit)


def edge_scores(Z, edges):
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return expit(np.einsum("ij,ij->i", Z[e[:, 0]], Z[e[:, 1]]))


def edge_homophily(graph, labels):
    """Fraction of edges whose endpoints share a label.

    Undirected edges count once; directed graphs count each arc.
    """
    labels = np.asarray(labels)
    if labels.shape[0] < graph.n:
        raise InvalidArgument(f"{labels.shape[0]} labels for {graph.n} nodes")
    e = graph.edges()
    if len(e) == 0:
        raise InvalidArgument("graph has no edges")
    return float(np.mean(labels[e[:, 0]] == labels[e[:, 1]]))


def random_split(n, fractions=(0.1, 0.1, 0.8), labels=None, seed=0):
    """Disjoint train/val/test node indices, stratified by label when given."""
    rng = np.random.default_rng(seed)
    names = ("train", "val", "test")
    groups = [np.arange(n)] if labels is None else [np.flatnonzero(labels == c) for c in np.unique(labels)]
    out = {k: [] for k in names}
    for g in groups:
        g = rng.permutation(g)
        n_train = max(1, int(round(fractions[0] * len(g))))
        n_val = int(round(fractions[1] * len(g)))
        out["train"].append(g[:n_train])
        out["val"].append(g[n_train:n_train + n_val])
        out["test"].append(g[n_train + n_val:])
    return {k: np.sort(np.concatenate(v)) for k, v in out.items()}


def sample_non_edges(graph, count, rng, exclude=()):
    """``count`` distinct node pairs that are not edges (no self-pairs)."""
    n = graph.n
    taken = set()
    for s, t in graph.arcs().tolist():
        taken.add((s, t))
    for s, t in exclude:
        taken.add((s, t))
        if not graph.directed:
            taken.add((t, s))
    out = []
    while len(out) < count:
        s, t = rng.integers(0, n, size=2).tolist()
        if s == t:
            continue
        if not graph.directed and s > t:
            s, t = t, s
        if (s, t) in taken:
            continue
        taken.add((s, t))
        if not graph.directed:
            taken.add((t, s))
        out.append((s, t))
    return np.asarray(out, dtype=np.int64).reshape(-1, 2)


def split_edges(graph, val_frac=0.05, test_frac=0.10, seed=0):
    """Hold out edges for link prediction.

    Returns the training graph (held-out edges removed) and a dict with
    ``val_pos``, ``val_neg``, ``test_pos``, ``test_neg``; each negative set
    matches its positive set in size.
    """
    rng = np.random.default_rng(seed)
    edges = graph.edges()
    perm = rng.permutation(len(edges))
    n_val = int(round(val_frac * len(edges)))
    n_test = int(round(test_frac * len(edges)))
    if n_test == 0:
        raise InvalidArgument("graph too small to hold out test edges")
    val_pos = edges[perm[:n_val]]
    test_pos = edges[perm[n_val:n_val + n_test]]
    keep = edges[perm[n_val + n_test:]]
    train_graph = Graph(graph.n, keep[:, 0], keep[:, 1], graph.directed)
    val_neg = sample_non_edges(graph, n_val, rng)
    test_neg = sample_non_edges(graph, n_test, rng, exclude=[tuple(e) for e in val_neg.tolist()])
    return train_graph, {"val_pos": val_pos, "val_neg": val_neg, "test_pos": test_pos, "test_neg": test_neg}
