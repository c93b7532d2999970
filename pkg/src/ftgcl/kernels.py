"""Backend selection for the hot kernels.

The compiled ``_speedups`` extension is used when it imports; otherwise the
pure-Python ``_purepy`` module is used. Set ``FTGCL_PURE_PYTHON=1`` to force
the fallback. All callers go through the wrappers below, which normalize
dtypes and contiguity so both backends see identical inputs.
"""
import os

import numpy as np

from . import _purepy

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

_BACKENDS = {"python": _purepy}
if _speedups is not None:
    _BACKENDS["cython"] = _speedups

if os.environ.get("FTGCL_PURE_PYTHON", "") not in ("", "0") or _speedups is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name):
    """Return the raw kernel module for ``name`` ("python" or "cython")."""
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}") from None


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def random_walks(indptr, indices, starts, uniforms, backend=None):
    impl = _impl if backend is None else get_backend(backend)
    return impl.random_walks(_i64(indptr), _i64(indices), _i64(starts), _f64(uniforms))


def segment_softmax(logits, indptr, backend=None):
    impl = _impl if backend is None else get_backend(backend)
    return impl.segment_softmax(_f64(logits), _i64(indptr))


def segment_softmax_backward(alpha, grad, indptr, backend=None):
    impl = _impl if backend is None else get_backend(backend)
    return impl.segment_softmax_backward(_f64(alpha), _f64(grad), _i64(indptr))


def segment_sum(values, indptr, backend=None):
    impl = _impl if backend is None else get_backend(backend)
    return impl.segment_sum(_f64(values), _i64(indptr))


def scatter_add_rows(values, index, n_rows, backend=None):
    impl = _impl if backend is None else get_backend(backend)
    return impl.scatter_add_rows(_f64(values), _i64(index), int(n_rows))
