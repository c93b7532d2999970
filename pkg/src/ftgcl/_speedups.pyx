# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_purepy``. Same signatures, same results."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def random_walks(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                 const cnp.int64_t[::1] starts, const double[:, :, ::1] uniforms):
    cdef Py_ssize_t n_starts = uniforms.shape[0]
    cdef Py_ssize_t gamma = uniforms.shape[1]
    cdef Py_ssize_t length = uniforms.shape[2]
    out = np.full((n_starts, gamma, length + 1), -1, dtype=np.int64)
    cdef cnp.int64_t[:, :, ::1] o = out
    cdef Py_ssize_t s, w, k
    cdef cnp.int64_t cur, lo, deg, pick
    with nogil:
        for s in range(n_starts):
            for w in range(gamma):
                cur = starts[s]
                o[s, w, 0] = cur
                for k in range(length):
                    lo = indptr[cur]
                    deg = indptr[cur + 1] - lo
                    if deg == 0:
                        break
                    pick = <cnp.int64_t>(uniforms[s, w, k] * deg)
                    if pick >= deg:
                        pick = deg - 1
                    cur = indices[lo + pick]
                    o[s, w, k + 1] = cur
    return out


def segment_softmax(const double[::1] logits, const cnp.int64_t[::1] indptr):
    cdef Py_ssize_t n_seg = indptr.shape[0] - 1
    out = np.empty(logits.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t s, e
    cdef double m, total
    with nogil:
        for s in range(n_seg):
            if indptr[s + 1] == indptr[s]:
                continue
            m = logits[indptr[s]]
            for e in range(indptr[s] + 1, indptr[s + 1]):
                if logits[e] > m:
                    m = logits[e]
            total = 0.0
            for e in range(indptr[s], indptr[s + 1]):
                o[e] = exp(logits[e] - m)
                total += o[e]
            for e in range(indptr[s], indptr[s + 1]):
                o[e] /= total
    return out


def segment_softmax_backward(const double[::1] alpha, const double[::1] grad,
                             const cnp.int64_t[::1] indptr):
    cdef Py_ssize_t n_seg = indptr.shape[0] - 1
    out = np.empty(alpha.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t s, e
    cdef double dot
    with nogil:
        for s in range(n_seg):
            dot = 0.0
            for e in range(indptr[s], indptr[s + 1]):
                dot += alpha[e] * grad[e]
            for e in range(indptr[s], indptr[s + 1]):
                o[e] = alpha[e] * (grad[e] - dot)
    return out


def segment_sum(const double[:, ::1] values, const cnp.int64_t[::1] indptr):
    cdef Py_ssize_t n_seg = indptr.shape[0] - 1
    cdef Py_ssize_t dim = values.shape[1]
    out = np.zeros((n_seg, dim), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t s, e, c
    with nogil:
        for s in range(n_seg):
            for e in range(indptr[s], indptr[s + 1]):
                for c in range(dim):
                    o[s, c] += values[e, c]
    return out


def scatter_add_rows(const double[:, ::1] values, const cnp.int64_t[::1] index, Py_ssize_t n_rows):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t dim = values.shape[1]
    out = np.zeros((n_rows, dim), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t r, c
    cdef cnp.int64_t t
    with nogil:
        for r in range(n):
            t = index[r]
            for c in range(dim):
                o[t, c] += values[r, c]
    return out
