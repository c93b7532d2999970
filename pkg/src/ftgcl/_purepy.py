"""NumPy implementations of the hot kernels (no compiled code).

``_speedups.pyx`` mirrors these with explicit loops. Segments are given in
CSR form: segment ``s`` covers positions ``indptr[s]:indptr[s + 1]``.
"""
import numpy as np


def random_walks(indptr, indices, starts, uniforms):
    """Uniform random walks along out-edges.

    ``uniforms`` has shape (n_starts, gamma, length); step ``k`` of walk ``w``
    from start ``s`` picks neighbor ``floor(u * deg)``. Returns visited node
    ids of shape (n_starts, gamma, length + 1), padded with -1 after a sink.
    """
    n_starts, gamma, length = uniforms.shape
    out = np.full((n_starts, gamma, length + 1), -1, dtype=np.int64)
    cur = np.repeat(starts, gamma).astype(np.int64)
    flat = out.reshape(n_starts * gamma, length + 1)
    flat[:, 0] = cur
    u = uniforms.reshape(n_starts * gamma, length)
    alive = np.arange(len(cur))
    for k in range(length):
        c = cur[alive]
        lo = indptr[c]
        deg = indptr[c + 1] - lo
        keep = deg > 0
        alive, c, lo, deg = alive[keep], c[keep], lo[keep], deg[keep]
        if len(alive) == 0:
            break
        pick = np.minimum((u[alive, k] * deg).astype(np.int64), deg - 1)
        nxt = indices[lo + pick]
        cur[alive] = nxt
        flat[alive, k + 1] = nxt
    return out


def _segment_ids(indptr):
    return np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))


def segment_softmax(logits, indptr):
    if len(logits) == 0:
        return np.empty(0)
    seg = _segment_ids(indptr)
    seg_max = np.full(len(indptr) - 1, -np.inf)
    np.maximum.at(seg_max, seg, logits)
    e = np.exp(logits - seg_max[seg])
    total = np.bincount(seg, weights=e, minlength=len(indptr) - 1)
    return e / total[seg]


def segment_softmax_backward(alpha, grad, indptr):
    if len(alpha) == 0:
        return np.empty(0)
    seg = _segment_ids(indptr)
    dot = np.bincount(seg, weights=alpha * grad, minlength=len(indptr) - 1)
    return alpha * (grad - dot[seg])


def segment_sum(values, indptr):
    n_seg = len(indptr) - 1
    out = np.zeros((n_seg, values.shape[1]))
    if len(values):
        np.add.at(out, _segment_ids(indptr), values)
    return out


def scatter_add_rows(values, index, n_rows):
    out = np.zeros((n_rows, values.shape[1]))
    np.add.at(out, index, values)
    return out
