"""Reverse-mode automatic differentiation over dense NumPy arrays.

Each primitive builds a :class:`Node` holding its forward value, references
to its operands, and a closure mapping the output adjoint to operand
adjoints. :func:`grad` sweeps the graph in reverse topological order.

Graph adjacency enters only through the index primitives
(:func:`gather_rows`, :func:`segment_sum`, :func:`segment_softmax`), whose
loops live in :mod:`ftgcl.kernels`.
"""
import itertools

import numpy as np

from . import kernels
from .errors import InvalidArgument, NumericalError

_ids = itertools.count()


class Node:
    __slots__ = ("value", "adjoint", "parents", "backward", "op", "id", "is_param", "name")

    def __init__(self, value, parents=(), backward=None, op="leaf", is_param=False, name=None):
        self.value = value
        self.parents = parents
        self.backward = backward
        self.op = op
        self.is_param = is_param
        self.name = name
        self.adjoint = None
        self.id = next(_ids)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Node#{self.id}<{self.op}{label} shape={self.value.shape}>"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if np.isscalar(other):
            return scale(self, 1.0 / other)
        return NotImplemented

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)


def constant(value, name=None):
    return Node(np.array(value, dtype=np.float64), name=name)


def parameter(value, name=None):
    return Node(np.array(value, dtype=np.float64), is_param=True, name=name)


def _lift(x):
    return x if isinstance(x, Node) else constant(x)


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_finite(value, op):
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"non-finite value produced by {op}")


# elementwise and linear algebra


def add(a, b):
    a, b = _lift(a), _lift(b)
    return Node(a.value + b.value, (a, b),
                lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b):
    a, b = _lift(a), _lift(b)
    return Node(a.value - b.value, (a, b),
                lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)), "sub")


def mul(a, b):
    """Elementwise product with NumPy broadcasting (covers row/column scaling)."""
    a, b = _lift(a), _lift(b)
    return Node(a.value * b.value, (a, b),
                lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)),
                "mul")


def scale(a, c):
    c = float(c)
    return Node(a.value * c, (a,), lambda g: (g * c,), "scale")


def matmul(a, b):
    a, b = _lift(a), _lift(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise InvalidArgument(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return Node(a.value @ b.value, (a, b),
                lambda g: (g @ b.value.T, a.value.T @ g), "matmul")


def transpose(a):
    return Node(a.value.T.copy(), (a,), lambda g: (g.T,), "transpose")


def exp(a):
    y = np.exp(a.value)
    _check_finite(y, "exp")
    return Node(y, (a,), lambda g: (g * y,), "exp")


def log(a):
    if np.any(a.value <= 0):
        raise NumericalError("log of a non-positive value")
    return Node(np.log(a.value), (a,), lambda g: (g / a.value,), "log")


# activations (subgradient 0 at the kink for the ReLU family)


def relu(a):
    mask = a.value > 0
    return Node(np.where(mask, a.value, 0.0), (a,), lambda g: (g * mask,), "relu")


def elu(a, alpha=1.0):
    x = a.value
    pos = x > 0
    neg_exp = np.exp(np.minimum(x, 0.0))
    y = np.where(pos, x, alpha * (neg_exp - 1.0))
    return Node(y, (a,), lambda g: (g * np.where(pos, 1.0, alpha * neg_exp),), "elu")


def leaky_relu(a, slope=0.2):
    pos = a.value > 0
    return Node(np.where(pos, a.value, slope * a.value), (a,),
                lambda g: (g * np.where(pos, 1.0, slope),), "leaky_relu")


def prelu(a, slope):
    """Leaky ReLU whose negative-side slope is the learnable (1, 1) node ``slope``."""
    x = a.value
    pos = x > 0
    s = float(slope.value.reshape(-1)[0])

    def back(g):
        ga = g * np.where(pos, 1.0, s)
        gs = np.sum(g * np.where(pos, 0.0, x)).reshape(slope.shape)
        return ga, gs

    return Node(np.where(pos, x, s * x), (a, slope), back, "prelu")


def clip(a, lo, hi):
    inside = (a.value >= lo) & (a.value <= hi)
    return Node(np.clip(a.value, lo, hi), (a,), lambda g: (g * inside,), "clip")


# reductions and normalization


def sum(a, axis=None):  # noqa: A001 - mirrors numpy naming
    if axis is None:
        return Node(np.sum(a.value).reshape(1, 1), (a,),
                    lambda g: (np.broadcast_to(g.reshape(-1)[0], a.shape).copy(),), "sum")
    y = np.sum(a.value, axis=axis, keepdims=True)
    return Node(y, (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),), "sum")


def mean(a, axis=None):
    count = a.value.size if axis is None else a.shape[axis]
    return scale(sum(a, axis), 1.0 / count)


def _normalize(a, axis, op):
    norms = np.sqrt(np.sum(a.value * a.value, axis=axis, keepdims=True))
    if np.any(norms == 0):
        raise NumericalError(f"{op}: zero-norm vector")
    y = a.value / norms

    def back(g):
        return ((g - y * np.sum(g * y, axis=axis, keepdims=True)) / norms,)

    return Node(y, (a,), back, op)


def row_normalize(a):
    return _normalize(a, 1, "row_normalize")


def col_normalize(a):
    return _normalize(a, 0, "col_normalize")


# indexing and segment primitives


def gather_rows(a, index):
    """Rows ``a[index]``; adjoint scatter-adds back."""
    index = np.asarray(index, dtype=np.int64)
    n = a.shape[0]
    return Node(a.value[index], (a,),
                lambda g: (kernels.scatter_add_rows(g, index, n),), "gather_rows")


def slice_rows(a, start, stop):
    def back(g):
        out = np.zeros_like(a.value)
        out[start:stop] = g
        return (out,)

    return Node(a.value[start:stop].copy(), (a,), back, "slice_rows")


def segment_sum(a, indptr):
    """Sum rows of ``a`` over CSR segments; result has one row per segment."""
    indptr = np.asarray(indptr, dtype=np.int64)
    counts = np.diff(indptr)
    return Node(kernels.segment_sum(a.value, indptr), (a,),
                lambda g: (np.repeat(g, counts, axis=0),), "segment_sum")


def segment_softmax(a, indptr):
    """Softmax of the (E, 1) column ``a`` within each CSR segment."""
    if a.value.ndim != 2 or a.shape[1] != 1:
        raise InvalidArgument(f"segment_softmax expects an (E, 1) column, got {a.shape}")
    indptr = np.asarray(indptr, dtype=np.int64)
    alpha = kernels.segment_softmax(a.value[:, 0], indptr)

    def back(g):
        return (kernels.segment_softmax_backward(alpha, g[:, 0], indptr)[:, None],)

    return Node(alpha[:, None], (a,), back, "segment_softmax")


# reverse sweep


def _topological(output):
    order, seen = [], set()
    stack = [(output, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.id in seen:
            continue
        seen.add(node.id)
        stack.append((node, True))
        for p in node.parents:
            if p.id not in seen:
                stack.append((p, False))
    return order


def leaves(output):
    """Parameter leaves reachable from ``output``."""
    return [n for n in _topological(output) if n.is_param]


def _finite(a):
    # one reduction screens the common case; confirm before reporting
    return np.isfinite(a.sum()) or bool(np.all(np.isfinite(a)))


def grad(output, wrt=None):
    """Adjoints of ``output`` (a single-element node) w.r.t. leaves.

    Returns ``{node: adjoint}`` for every reachable parameter leaf, or for the
    nodes in ``wrt`` when given. Adjoints are reset on every call, so
    repeated sweeps return identical results.
    """
    if output.value.size != 1:
        raise InvalidArgument(f"grad needs a scalar output, got shape {output.shape}")
    order = _topological(output)
    for node in order:
        if not _finite(node.value):
            raise NumericalError(f"non-finite value at node {node.id} ({node.op})")
        node.adjoint = None
    output.adjoint = np.ones_like(output.value)
    for node in reversed(order):
        if node.backward is None or node.adjoint is None:
            continue
        contribs = node.backward(node.adjoint)
        for parent, c in zip(node.parents, contribs):
            if c is None:
                continue
            if not _finite(c):
                raise NumericalError(f"non-finite adjoint flowing from node {node.id} ({node.op}) "
                                     f"into node {parent.id} ({parent.op})")
            parent.adjoint = c if parent.adjoint is None else parent.adjoint + c
    for node in order:
        if node.adjoint is None:
            node.adjoint = np.zeros_like(node.value)
    targets = [n for n in order if n.is_param] if wrt is None else list(wrt)
    reached = {n.id for n in order}
    return {
        n: (n.adjoint.copy() if n.id in reached else np.zeros_like(n.value)) for n in targets
    }


def finite_diff_check(f, x0, h=1e-5, kink_guard=True):
    """Compare :func:`grad` of ``f`` at ``x0`` with central differences.

    ``f`` maps a node of ``x0``'s shape to a scalar node. Returns the max over
    coordinates of ``|numeric - analytic| / max(1, |analytic|)``. With
    ``kink_guard`` coordinates with ``|x0_i| < 10 h`` are skipped, since a
    central difference straddling a ReLU-type kink is meaningless.
    """
    if h <= 0:
        raise InvalidArgument("step h must be positive")
    x0 = np.array(x0, dtype=np.float64)
    leaf = parameter(x0.copy())
    analytic = grad(f(leaf), wrt=[leaf])[leaf]
    worst = 0.0
    for i in np.ndindex(x0.shape):
        if kink_guard and abs(x0[i]) < 10 * h:
            continue
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        fp = float(f(constant(xp)).value.reshape(-1)[0])
        fm = float(f(constant(xm)).value.reshape(-1)[0])
        numeric = (fp - fm) / (2 * h)
        worst = max(worst, abs(numeric - analytic[i]) / max(1.0, abs(analytic[i])))
    return worst
