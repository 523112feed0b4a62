"""Modularity and modularity-driven community detection.

Unweighted modularity uses edge counts and unweighted degrees; the weighted
variant replaces both with weight sums, so the two coincide on unit weights.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWeightsError, DomainError
from .graph import Graph
from .partition import Partition, community_aggregates

__all__ = [
    "modularity",
    "merge_delta",
    "MergeStep",
    "GreedyResult",
    "fast_greedy",
    "label_propagation",
]


def _edge_weights(g: Graph, use_weights):
    return g.weights if use_weights else np.ones(g.n_edges)


def modularity(g: Graph, partition: Partition, use_weights=False) -> float:
    """Newman modularity of ``partition`` on ``g``.

    With ``use_weights`` the weighted form is evaluated; the total weight must
    then be positive.
    """
    agg = community_aggregates(g, partition, use_weights)
    total = agg.total_weight
    if use_weights and total <= 0:
        raise DegenerateWeightsError("total edge weight must be positive")
    if total == 0:
        # edgeless graph: every term is 0/0; treat as zero modularity
        return 0.0
    return float(np.sum(agg.inner / total - (agg.total / (2.0 * total)) ** 2))


def merge_delta(g: Graph, partition: Partition, ci, cj, use_weights=False) -> float:
    """Change in modularity from joining communities ``ci`` and ``cj``."""
    if ci == cj:
        raise DomainError("cannot merge a community with itself")
    lab = partition.labels
    w = _edge_weights(g, use_weights)
    total = float(w.sum())
    if total <= 0:
        raise DegenerateWeightsError("total edge weight must be positive")
    cu, cv = lab[g.u], lab[g.v]
    between = ((cu == ci) & (cv == cj)) | ((cu == cj) & (cv == ci))
    w_ij = float(w[between].sum())
    deg = g.weighted_degree if use_weights else g.degree.astype(float)
    w_i = float(deg[lab == ci].sum())
    w_j = float(deg[lab == cj].sum())
    return w_ij / total - w_i * w_j / (2.0 * total * total)


@dataclass(frozen=True)
class MergeStep:
    """One agglomeration: ``absorbed`` folded into ``kept`` (``kept < absorbed``)."""

    kept: int
    absorbed: int
    delta: float
    q: float


@dataclass
class GreedyResult:
    partition: Partition
    q: float
    q_initial: float
    #: number of merges applied to reach ``partition``
    best_step: int = 0
    trace: list = field(default_factory=list)


def fast_greedy(g: Graph, use_weights=False) -> GreedyResult:
    """Greedy agglomerative modularity maximisation (Clauset-Newman-Moore).

    Starts from singletons and repeatedly merges the edge-adjacent pair of
    communities with the largest modularity gain, ties going to the smallest
    ``(min_id, max_id)`` pair. Merging stops when no adjacent pairs remain;
    the partition with the highest modularity along the trace is returned
    (earliest one on ties). The surviving community keeps the smaller id.

    Returns
    -------
    GreedyResult
        ``trace[k]`` records the merge applied at step ``k + 1`` and the
        modularity after it.
    """
    n = g.n_nodes
    if n == 0:
        raise DomainError("fast_greedy on an empty graph")
    w = _edge_weights(g, use_weights)
    if use_weights and np.any(w <= 0):
        raise DomainError("weighted fast_greedy needs strictly positive weights")
    total = float(w.sum())

    if total == 0:
        return GreedyResult(Partition.singletons(n), 0.0, 0.0)

    inv_w = 1.0 / total
    # a[c] = W_c / 2W ; dq(i, j) = W_ij / W - 2 a_i a_j
    deg = g.weighted_degree if use_weights else g.degree.astype(float)
    a = (deg / (2.0 * total)).tolist()
    links = [dict() for _ in range(n)]
    for x, y, wt in zip(g.u.tolist(), g.v.tolist(), w.tolist()):
        links[x][y] = links[x].get(y, 0.0) + wt
        links[y][x] = links[y].get(x, 0.0) + wt

    q = -sum(ai * ai for ai in a)
    q_initial = q
    alive = [True] * n
    version = [0] * n
    heap = []
    for i in range(n):
        ai = a[i]
        for j, wij in links[i].items():
            if i < j:
                heap.append((-(wij * inv_w - 2.0 * ai * a[j]), i, j, 0, 0))
    heapq.heapify(heap)

    trace = []
    best_q, best_step = q, 0
    while heap:
        neg, i, j, vi, vj = heapq.heappop(heap)
        if not (alive[i] and alive[j]) or version[i] != vi or version[j] != vj:
            continue
        delta = -neg
        # fold j into i (i < j)
        li, lj = links[i], links[j]
        del li[j]
        del lj[i]
        for k, wkj in lj.items():
            li[k] = li.get(k, 0.0) + wkj
            lk = links[k]
            del lk[j]
            lk[i] = lk.get(i, 0.0) + wkj
        links[j] = {}
        alive[j] = False
        a[i] += a[j]
        a[j] = 0.0
        version[i] += 1
        ai, vi = a[i], version[i]
        for k, wik in li.items():
            item = -(wik * inv_w - 2.0 * ai * a[k])
            if i < k:
                heapq.heappush(heap, (item, i, k, vi, version[k]))
            else:
                heapq.heappush(heap, (item, k, i, version[k], vi))
        q += delta
        trace.append(MergeStep(i, j, delta, q))
        if q > best_q:
            best_q, best_step = q, len(trace)

    parent = list(range(n))
    for step in trace[:best_step]:
        parent[step.absorbed] = step.kept

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    labels = np.array([find(x) for x in range(n)], dtype=np.int64)
    return GreedyResult(Partition(labels), best_q, q_initial, best_step, trace)


def label_propagation(g: Graph, use_weights=False, seed=0, max_passes=100) -> Partition:
    """Asynchronous label propagation.

    Nodes start with their own id as label and are visited in a fresh seeded
    random order each pass; a node adopts the label carrying the largest
    incident (weighted) frequency, the smallest such label on ties. Stops
    after a pass with no change or ``max_passes`` passes.
    """
    n = g.n_nodes
    w = _edge_weights(g, use_weights)
    if use_weights and np.any(w <= 0):
        raise DomainError("weighted label propagation needs strictly positive weights")
    rng = np.random.default_rng(seed)
    labels = list(range(n))
    nbrs = [g.neighbors(x).tolist() for x in range(n)]
    wts = [w[g.incident_edges(x)].tolist() for x in range(n)]
    for _ in range(max_passes):
        changed = False
        for x in rng.permutation(n).tolist():
            if not nbrs[x]:
                continue
            score = {}
            for y, wy in zip(nbrs[x], wts[x]):
                lab = labels[y]
                score[lab] = score.get(lab, 0.0) + wy
            best = max(score.values())
            new = min(lab for lab, s in score.items() if s == best)
            if new != labels[x]:
                labels[x] = new
                changed = True
        if not changed:
            break
    return Partition(labels)
