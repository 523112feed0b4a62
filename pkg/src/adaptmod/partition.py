"""Disjoint node partitions and their per-community aggregates."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Partition",
    "CommunityAggregates",
    "community_aggregates",
    "dump_partition",
    "load_partition",
]


class Partition:
    """Assignment of every node to exactly one community.

    ``labels[i]`` is the community id of node ``i``. Ids are arbitrary
    non-negative integers; :meth:`canonical` renumbers them ``0..k-1`` in
    order of first appearance.
    """

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.int64).ravel().copy()
        if labels.size and labels.min() < 0:
            raise DomainError("community ids must be non-negative")
        labels.setflags(write=False)
        self._labels = labels

    @classmethod
    def from_communities(cls, communities, n_nodes=None):
        """Build from an iterable of node collections."""
        communities = [list(c) for c in communities]
        if n_nodes is None:
            n_nodes = sum(len(c) for c in communities)
        labels = np.full(n_nodes, -1, dtype=np.int64)
        for cid, members in enumerate(communities):
            for node in members:
                if labels[node] != -1:
                    raise DomainError(f"node {node} assigned twice")
                labels[node] = cid
        if np.any(labels < 0):
            raise DomainError("every node must belong to a community")
        return cls(labels)

    @classmethod
    def singletons(cls, n_nodes):
        return cls(np.arange(n_nodes))

    @classmethod
    def single(cls, n_nodes):
        return cls(np.zeros(n_nodes, dtype=np.int64))

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def n_nodes(self) -> int:
        return int(self._labels.size)

    @property
    def n_communities(self) -> int:
        return int(np.unique(self._labels).size)

    def community_ids(self) -> np.ndarray:
        return np.unique(self._labels)

    def members(self, cid) -> np.ndarray:
        return np.flatnonzero(self._labels == cid)

    def communities(self) -> list:
        """Member arrays, ordered by community id."""
        order = np.argsort(self._labels, kind="stable")
        ids, starts = np.unique(self._labels[order], return_index=True)
        return np.split(order, starts[1:]) if ids.size else []

    def sizes(self) -> dict:
        ids, counts = np.unique(self._labels, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def canonical(self) -> "Partition":
        _, first, inverse = np.unique(self._labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first)] = np.arange(first.size)
        return Partition(rank[inverse])

    def merged(self, a, b) -> "Partition":
        """Copy with community ``b`` folded into ``a``."""
        labels = self._labels.copy()
        labels[labels == b] = a
        return Partition(labels)

    def __len__(self):
        return self.n_nodes

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.canonical().labels, other.canonical().labels)

    __hash__ = None

    def __repr__(self):
        return f"Partition(n_nodes={self.n_nodes}, n_communities={self.n_communities})"


@dataclass
class CommunityAggregates:
    """Per-community sums indexed by community id (dense up to max id).

    ``inner[c]`` is the weight (or count) of edges inside ``c``; ``outer[c]``
    that of edges with exactly one endpoint in ``c``; ``total[c]`` equals
    ``2 * inner[c] + outer[c]``, the (weighted) degree sum of ``c``.
    """

    inner: np.ndarray
    outer: np.ndarray
    total: np.ndarray
    total_weight: float


def community_aggregates(g, partition: Partition, use_weights=True) -> CommunityAggregates:
    if partition.n_nodes != g.n_nodes:
        raise DomainError("partition does not cover the graph's nodes")
    lab = partition.labels
    k = int(lab.max()) + 1 if lab.size else 0
    w = g.weights if use_weights else np.ones(g.n_edges)
    cu, cv = lab[g.u], lab[g.v]
    same = cu == cv
    inner = np.bincount(cu[same], weights=w[same], minlength=k)
    cross = ~same
    outer = np.bincount(cu[cross], weights=w[cross], minlength=k) + np.bincount(
        cv[cross], weights=w[cross], minlength=k
    )
    return CommunityAggregates(inner, outer, 2.0 * inner + outer, float(w.sum()))


def dump_partition(partition: Partition, node_labels=None) -> str:
    """``label<TAB>community_id`` per node, community ids canonicalised."""
    canon = partition.canonical().labels
    if node_labels is None:
        node_labels = range(partition.n_nodes)
    out = io.StringIO()
    for lab, cid in zip(node_labels, canon.tolist()):
        out.write(f"{lab}\t{cid}\n")
    return out.getvalue()


def load_partition(source, node_labels=None) -> Partition:
    """Parse the ``label<TAB>community_id`` format.

    When ``node_labels`` is given (the graph's original labels), rows are
    matched by label and every node must appear exactly once. Otherwise
    labels must be the dense ids ``0..n-1``.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    rows = {}
    for lineno, line in enumerate(io.StringIO(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError("expected 'label community_id'", lineno)
        try:
            cid = int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer community id {tokens[1]!r}", lineno) from None
        if tokens[0] in rows:
            raise ParseError(f"node {tokens[0]!r} listed twice", lineno)
        rows[tokens[0]] = cid

    if node_labels is None:
        try:
            keys = {int(k): c for k, c in rows.items()}
        except ValueError:
            raise ParseError("node labels must be integers without a graph") from None
        n = len(keys)
        if sorted(keys) != list(range(n)):
            raise DomainError("node ids must be dense 0..n-1")
        return Partition([keys[i] for i in range(n)])

    index = {str(lab): i for i, lab in enumerate(node_labels)}
    if set(rows) != set(index):
        missing = sorted(set(index) - set(rows))[:5]
        extra = sorted(set(rows) - set(index))[:5]
        raise DomainError(f"partition node set mismatch (missing {missing}, unknown {extra})")
    labels = np.empty(len(index), dtype=np.int64)
    for lab, cid in rows.items():
        labels[index[lab]] = cid
    return Partition(labels)
