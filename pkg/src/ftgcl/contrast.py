"""Channel-level contrastive objective and the node-level baseline.

Both losses share one template over a similarity matrix ``Phi`` between
the units of two views (columns for channels, rows for nodes):

    l_i = -( 2 Phi_ii / tau
             - log sum_{j != i} exp(Phi_ij / tau)
             - log sum_{j != i} exp(Phi_ji / tau) )

and return the mean of ``l_i``. The positive pair is not part of either
denominator.
"""
import numpy as np

from . import autodiff as ad
from .errors import InvalidArgument


class PairCounter:
    """Counts similarity evaluations performed by the losses."""

    def __init__(self):
        self.count = 0

    def add(self, k):
        self.count += int(k)


def _value(x):
    return x.value if isinstance(x, ad.Node) else np.asarray(x, dtype=np.float64)


def _validate(H, Ha, tau, axis, unit):
    if not tau > 0:
        raise InvalidArgument(f"temperature must be positive, got {tau}")
    h, ha = _value(H), _value(Ha)
    if h.shape != ha.shape or h.ndim != 2:
        raise InvalidArgument(f"views must be matrices of equal shape, got {h.shape} and {ha.shape}")
    if h.shape[1 - axis] < 2:
        raise InvalidArgument(f"need at least two {unit}s, got {h.shape[1 - axis]}")
    for name, m in (("H", h), ("H_a", ha)):
        norms = np.linalg.norm(m, axis=axis)
        if np.any(norms == 0):
            bad = np.flatnonzero(norms == 0)[:5].tolist()
            raise InvalidArgument(f"{name} has zero-norm {unit}(s) {bad}")


def _template(phi, tau):
    d = phi.shape[0]
    eye = np.eye(d)
    off = ad.constant(1.0 - eye)
    scaled = phi * (1.0 / tau)
    e = ad.exp(scaled) * off
    row_den = ad.sum(e, axis=1)  # (d, 1): sum_j exp(Phi_ij / tau)
    col_den = ad.sum(e, axis=0)  # (1, d): sum_j exp(Phi_ji / tau)
    pos = ad.sum(scaled * ad.constant(eye), axis=1)
    per_unit = ad.log(row_den) + ad.log(col_den).T - pos * 2.0
    return ad.mean(per_unit)


def channel_similarity(H, Ha):
    """d x d cosine similarities between columns of ``H`` and columns of ``Ha``."""
    return ad.col_normalize(ad._lift(H)).T @ ad.col_normalize(ad._lift(Ha))


def channel_loss(H, Ha, tau, counter=None):
    """Channel-level loss over the d columns of two N x d views."""
    _validate(H, Ha, tau, axis=0, unit="column")
    phi = channel_similarity(H, Ha)
    if counter is not None:
        counter.add(phi.value.size)
    return _template(phi, tau)


def node_level_loss(H, Ha, tau, counter=None):
    """Node-level counterpart: rows are the contrasted units, N^2 pairs."""
    _validate(H, Ha, tau, axis=1, unit="row")
    phi = ad.row_normalize(ad._lift(H)) @ ad.row_normalize(ad._lift(Ha)).T
    if counter is not None:
        counter.add(phi.value.size)
    return _template(phi, tau)


def expectation_form_check(H, Ha, tau):
    """Residual between the summed loss and its expectation rewrite.

    The rewrite takes uniform expectations over the ``d - 1`` negatives of
    each channel, which pulls out an additive constant ``2 log(d - 1)``.
    """
    _validate(H, Ha, tau, axis=0, unit="column")
    h, ha = _value(H), _value(Ha)
    d = h.shape[1]
    phi = (h / np.linalg.norm(h, axis=0)).T @ (ha / np.linalg.norm(ha, axis=0))
    s = phi / tau
    off = ~np.eye(d, dtype=bool)
    e = np.where(off, np.exp(s), 0.0)
    mean_row = e.sum(axis=1) / (d - 1)
    mean_col = e.sum(axis=0) / (d - 1)
    neg_loss_expect = (
        2.0 * np.mean(np.diag(s))
        - np.mean(np.log(mean_row))
        - np.mean(np.log(mean_col))
        - 2.0 * np.log(d - 1)
    )
    neg_loss_sum = -float(channel_loss(h, ha, tau).value.reshape(-1)[0])
    return abs(neg_loss_expect - neg_loss_sum)


def loss_bounds(d, tau):
    """Range implied by cosines in [-1, 1]."""
    c = np.log(d - 1)
    return -2.0 * (2.0 / tau - c), 2.0 * (2.0 / tau + c)
