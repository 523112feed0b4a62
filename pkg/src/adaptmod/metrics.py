"""Partition similarity (VI, NMI, F-measure, ARI) and modularity density.

All logarithms are natural, so VI is in nats. Similarity metrics are built
from one confusion table rather than pairwise node loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .graph import Graph
from .partition import Partition

__all__ = [
    "ConfusionTable",
    "confusion_table",
    "vi",
    "nmi",
    "f_measure",
    "ari",
    "modularity_density",
    "evaluate",
]


@dataclass
class ConfusionTable:
    """``counts[i, j] = |c_i ∩ g_j|`` with row and column marginals."""

    counts: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    n: int


def _labels(p):
    return p.labels if isinstance(p, Partition) else np.asarray(p).ravel()


def confusion_table(c, gn) -> ConfusionTable:
    a, b = _labels(c), _labels(gn)
    if a.shape != b.shape:
        raise DomainError("partitions cover different node sets")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    n = a.size
    counts = sp.coo_matrix(
        (np.ones(n), (ia, ib)), shape=(ia.max() + 1 if n else 0, ib.max() + 1 if n else 0)
    ).toarray()
    return ConfusionTable(counts, counts.sum(axis=1), counts.sum(axis=0), n)


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def _info(t: ConfusionTable):
    h_c = _entropy(t.rows, t.n)
    h_g = _entropy(t.cols, t.n)
    h_joint = _entropy(t.counts.ravel(), t.n)
    return h_c, h_g, h_c + h_g - h_joint


def vi(c, gn) -> float:
    """Variation of information ``H(C) + H(GN) - 2 I(C, GN)``."""
    t = confusion_table(c, gn)
    if t.n == 0:
        return 0.0
    h_c, h_g, mi = _info(t)
    # clamp rounding noise on identical partitions
    return max(h_c + h_g - 2.0 * mi, 0.0)


def nmi(c, gn) -> float:
    """``2 I / (H(C) + H(GN))``; defined as 1 when both partitions are trivial."""
    t = confusion_table(c, gn)
    if t.n == 0:
        raise DomainError("nmi of empty partitions")
    h_c, h_g, mi = _info(t)
    if h_c + h_g == 0.0:
        return 1.0
    return float(min(max(2.0 * mi / (h_c + h_g), 0.0), 1.0))


def f_measure(c, gn) -> float:
    """Size-weighted best-match Dice score of each detected community.

    Asymmetric: every community of ``c`` is matched against its best
    community of ``gn``; several may share a best match.
    """
    t = confusion_table(c, gn)
    if t.n == 0:
        raise DomainError("f_measure of empty partitions")
    dice = 2.0 * t.counts / (t.rows[:, None] + t.cols[None, :])
    return float(np.sum(t.rows * dice.max(axis=1)) / t.n)


def _pairs(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1.0) / 2.0


def ari(c, gn) -> float:
    """Adjusted Rand index (Hubert-Arabie).

    The denominator vanishes only when both partitions are all-singletons or
    both all-in-one; the index is then 1 if the partitions are equal, else 0.
    """
    t = confusion_table(c, gn)
    if t.n < 2:
        raise DomainError("ari needs at least two nodes")
    sum_ij = float(_pairs(t.counts).sum())
    sum_a = float(_pairs(t.rows).sum())
    sum_b = float(_pairs(t.cols).sum())
    expected = sum_a * sum_b / float(_pairs(t.n))
    denom = 0.5 * (sum_a + sum_b) - expected
    if denom == 0.0:
        return 1.0 if sum_ij == sum_a == sum_b else 0.0
    return float((sum_ij - expected) / denom)


def modularity_density(g: Graph, partition: Partition) -> float:
    """Modularity density ``Q_ds`` on the unweighted topology of ``g``.

    Singleton communities have internal density 0.
    """
    if partition.n_nodes != g.n_nodes:
        raise DomainError("partition does not cover the graph's nodes")
    m = g.n_edges
    if m == 0:
        return 0.0
    _, lab = np.unique(partition.labels, return_inverse=True)
    k = int(lab.max()) + 1
    size = np.bincount(lab, minlength=k).astype(float)
    cu, cv = lab[g.u], lab[g.v]
    same = cu == cv
    e_in = np.bincount(cu[same], minlength=k).astype(float)
    cross = sp.coo_matrix(
        (np.ones(int((~same).sum())), (cu[~same], cv[~same])), shape=(k, k)
    ).toarray()
    e_between = cross + cross.T
    e_out = e_between.sum(axis=1)

    dens = np.zeros(k)
    big = size > 1
    dens[big] = 2.0 * e_in[big] / (size[big] * (size[big] - 1.0))
    pair_dens = e_between / np.outer(size, size)

    two_m = 2.0 * m
    term_in = e_in / m * dens
    term_deg = ((2.0 * e_in + e_out) / two_m * dens) ** 2
    term_split = (e_between / two_m * pair_dens).sum(axis=1)
    return float(np.sum(term_in - term_deg - term_split))


def evaluate(c, gn, g: Graph | None = None) -> dict:
    """All similarity metrics of ``c`` against ``gn``; adds Q and Q_ds for
    ``c`` on the unweighted ``g`` when a graph is given."""
    from .community import modularity

    out = {
        "vi": vi(c, gn),
        "nmi": nmi(c, gn),
        "f_measure": f_measure(c, gn),
        "ari": ari(c, gn),
    }
    if g is not None:
        out["q"] = modularity(g, c, use_weights=False)
        out["q_ds"] = modularity_density(g, c)
    return out
