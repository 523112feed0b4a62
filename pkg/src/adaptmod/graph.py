"""Undirected simple graphs with optional edge weights.

Nodes are dense integers ``0..n_nodes-1``; the original labels read from an
edge list are kept in :attr:`Graph.labels` so results can be written back in
the caller's vocabulary. Edges are stored once, canonically as ``u < v`` and
sorted lexicographically, which fixes the edge order every other module uses.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ParseError

__all__ = [
    "Graph",
    "NodeStats",
    "load_edge_list",
    "dump_edge_list",
    "clustering_coefficient",
    "clustering_coefficients",
    "node_stats",
    "average_degree",
    "average_clustering",
    "strip_nonpositive_edges",
]


class Graph:
    """Immutable undirected simple graph.

    Parameters
    ----------
    n_nodes : int
        Number of nodes.
    u, v : array_like of int
        Edge endpoints. Each unordered pair may appear once; self-loops are
        rejected.
    weights : array_like of float, optional
        Per-edge weights aligned with ``(u, v)``. Defaults to all ones.
    labels : sequence, optional
        Original node labels, ``labels[i]`` naming node ``i``. Defaults to
        ``range(n_nodes)``.
    """

    def __init__(self, n_nodes, u, v, weights=None, labels=None):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise DomainError("n_nodes must be non-negative")
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise DomainError("u and v must have the same length")
        if weights is None:
            w = np.ones(u.shape[0], dtype=float)
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != u.shape:
                raise DomainError("weights must align with edges")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n_nodes):
            raise DomainError("edge endpoint out of range")
        if np.any(u == v):
            raise DomainError("self-loops are not allowed")

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                i = int(np.flatnonzero(dup)[0])
                raise DomainError(f"parallel edge ({lo[i]}, {hi[i]})")

        self._n = n_nodes
        self._u = lo
        self._v = hi
        self._w = w
        for arr in (self._u, self._v, self._w):
            arr.setflags(write=False)
        if labels is None:
            self._labels = list(range(n_nodes))
        else:
            self._labels = list(labels)
            if len(self._labels) != n_nodes:
                raise DomainError("labels must name every node")
        self._build_adjacency()

    def _build_adjacency(self):
        n, m = self._n, self._u.size
        src = np.concatenate([self._u, self._v])
        dst = np.concatenate([self._v, self._u])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        self._nbr = dst[order]
        self._nbr_edge = eid[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._indptr[1:])
        self._degree = np.diff(self._indptr)
        self._wdegree = np.bincount(src, weights=np.concatenate([self._w, self._w]), minlength=n)
        for arr in (self._nbr, self._nbr_edge, self._indptr, self._degree, self._wdegree):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, edges, n_nodes=None, labels=None):
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples on dense node ids."""
        edges = list(edges)
        u = [e[0] for e in edges]
        v = [e[1] for e in edges]
        w = [e[2] if len(e) > 2 else 1.0 for e in edges]
        if n_nodes is None:
            n_nodes = max(max(u, default=-1), max(v, default=-1)) + 1
        return cls(n_nodes, u, v, w, labels=labels)

    # -- basic accessors -------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return int(self._u.size)

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def v(self) -> np.ndarray:
        return self._v

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def labels(self) -> list:
        return self._labels

    @property
    def degree(self) -> np.ndarray:
        """Unweighted degree ``|N(v)|`` of every node."""
        return self._degree

    @property
    def weighted_degree(self) -> np.ndarray:
        """Sum of incident edge weights of every node."""
        return self._wdegree

    @property
    def total_weight(self) -> float:
        return float(self._w.sum())

    def is_unit_weighted(self) -> bool:
        return bool(np.all(self._w == 1.0))

    def edges(self):
        """Iterate ``(u, v, w)`` in canonical edge order."""
        for a, b, w in zip(self._u.tolist(), self._v.tolist(), self._w.tolist()):
            yield a, b, w

    def neighbors(self, node) -> np.ndarray:
        """Sorted neighbor ids of ``node``."""
        return self._nbr[self._indptr[node]:self._indptr[node + 1]]

    def incident_edges(self, node) -> np.ndarray:
        """Edge indices aligned with :meth:`neighbors`."""
        return self._nbr_edge[self._indptr[node]:self._indptr[node + 1]]

    def edge_index(self, a, b) -> int:
        """Index of edge ``{a, b}``; raises :class:`DomainError` if absent."""
        nbrs = self.neighbors(a)
        pos = int(np.searchsorted(nbrs, b))
        if pos >= nbrs.size or nbrs[pos] != b:
            raise DomainError(f"edge ({a}, {b}) is not in the graph")
        return int(self.incident_edges(a)[pos])

    def has_edge(self, a, b) -> bool:
        nbrs = self.neighbors(a)
        pos = int(np.searchsorted(nbrs, b))
        return pos < nbrs.size and nbrs[pos] == b

    def adjacency(self, weighted=False) -> sp.csr_matrix:
        """Symmetric sparse adjacency matrix."""
        data = np.concatenate([self._w, self._w]) if weighted else np.ones(2 * self.n_edges)
        rows = np.concatenate([self._u, self._v])
        cols = np.concatenate([self._v, self._u])
        return sp.csr_matrix((data, (rows, cols)), shape=(self._n, self._n))

    def with_weights(self, weights) -> "Graph":
        """Copy with new per-edge weights (aligned with canonical edge order)."""
        return Graph(self._n, self._u, self._v, weights, labels=self._labels)

    def unweighted(self) -> "Graph":
        return Graph(self._n, self._u, self._v, None, labels=self._labels)

    def subgraph_edges(self, mask) -> "Graph":
        """Copy keeping only edges where ``mask`` is true; node set unchanged."""
        mask = np.asarray(mask, dtype=bool)
        return Graph(self._n, self._u[mask], self._v[mask], self._w[mask], labels=self._labels)

    def __repr__(self):
        return f"Graph(n_nodes={self._n}, n_edges={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._n == other._n
            and np.array_equal(self._u, other._u)
            and np.array_equal(self._v, other._v)
            and np.array_equal(self._w, other._w)
        )

    __hash__ = None


@dataclass(frozen=True)
class NodeStats:
    degree: int
    weighted_degree: float
    clustering_coefficient: float


def _parse_id(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"non-integer node id {token!r}", lineno) from None


def load_edge_list(source) -> Graph:
    """Parse a whitespace-separated edge list.

    ``source`` may be a ``str``, ``bytes`` or a readable text/binary stream.
    Each non-comment line holds ``u v`` or ``u v w``; lines starting with
    ``#`` and blank lines are ignored. Node ids must be integers and are
    remapped to dense ids in ascending numeric order. A repeated pair keeps
    the weight of its last occurrence.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")

    pairs = {}
    for lineno, line in enumerate(io.StringIO(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise ParseError(f"expected 2 or 3 fields, got {len(tokens)}", lineno)
        a = _parse_id(tokens[0], lineno)
        b = _parse_id(tokens[1], lineno)
        if a == b:
            raise ParseError(f"self-loop on node {a}", lineno)
        if len(tokens) == 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise ParseError(f"non-numeric weight {tokens[2]!r}", lineno) from None
        else:
            w = 1.0
        key = (a, b) if a < b else (b, a)
        pairs[key] = w

    labels = sorted({x for key in pairs for x in key})
    remap = {lab: i for i, lab in enumerate(labels)}
    u = [remap[a] for a, _ in pairs]
    v = [remap[b] for _, b in pairs]
    return Graph(len(labels), u, v, list(pairs.values()), labels=labels)


def dump_edge_list(g: Graph, weights=True) -> str:
    """Serialise ``g`` with original labels; weights written losslessly."""
    out = io.StringIO()
    lab = g.labels
    for a, b, w in g.edges():
        if weights:
            out.write(f"{lab[a]} {lab[b]} {w!r}\n")
        else:
            out.write(f"{lab[a]} {lab[b]}\n")
    return out.getvalue()


def _triangles_per_node(g: Graph) -> np.ndarray:
    if g.n_edges == 0:
        return np.zeros(g.n_nodes)
    a = g.adjacency()
    # (A @ A) restricted to edges counts common neighbours; each triangle at v
    # is seen from both incident edges.
    common = (a @ a).multiply(a)
    return np.asarray(common.sum(axis=1)).ravel() / 2.0


def clustering_coefficients(g: Graph) -> np.ndarray:
    """Local clustering coefficient of every node (weights ignored)."""
    tri = _triangles_per_node(g)
    deg = g.degree.astype(float)
    denom = deg * (deg - 1.0)
    out = np.zeros(g.n_nodes)
    ok = g.degree >= 2
    out[ok] = 2.0 * tri[ok] / denom[ok]
    return out


def clustering_coefficient(g: Graph, node) -> float:
    """``2 T(v) / (deg(v) (deg(v) - 1))``, or 0 when ``deg(v) < 2``."""
    nbrs = g.neighbors(node)
    k = nbrs.size
    if k < 2:
        return 0.0
    nbr_set = set(nbrs.tolist())
    links = sum(1 for x in nbrs.tolist() for y in g.neighbors(x).tolist() if y in nbr_set)
    return links / (k * (k - 1.0))


def node_stats(g: Graph, node) -> NodeStats:
    return NodeStats(
        degree=int(g.degree[node]),
        weighted_degree=float(g.weighted_degree[node]),
        clustering_coefficient=clustering_coefficient(g, node),
    )


def average_degree(g: Graph) -> float:
    if g.n_nodes == 0:
        raise DomainError("average degree of an empty graph")
    return 2.0 * g.n_edges / g.n_nodes


def average_clustering(g: Graph) -> float:
    if g.n_nodes == 0:
        raise DomainError("average clustering of an empty graph")
    return float(clustering_coefficients(g).mean())


def strip_nonpositive_edges(g: Graph) -> Graph:
    """Drop every edge with weight <= 0, keeping all nodes."""
    return g.subgraph_edges(g.weights > 0)
