"""Balanced community enhancements and executable checks of their guarantees.

An enhancement of community ``c`` raises the weights of its internal edges by
a total of ``e_c > 0`` and lowers the weights of its cross edges so that the
community weight ``W_c = 2 W_c_in + W_c_out`` still equals the unweighted
degree sum ``d_c``. It is balanced when every lowered cross edge joins two
enhanced communities; the total weight then stays ``|E|``.

For balanced enhancements three properties hold:

* modularity of the partition never drops (``Q^w >= Q``);
* merging two enhanced communities gains no more than it did unweighted;
* an enhanced community with ``d_c <= sqrt(8|E|)`` that was stable against a
  split stays stable.

:func:`theorem_harness` evaluates all three on a concrete case.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear

from .community import modularity
from .errors import DomainError, InfeasibleEnhancementError
from .graph import Graph
from .partition import Partition

__all__ = [
    "EnhancementScheme",
    "build_balanced_enhancement",
    "validate_enhancement",
    "TheoremCheck",
    "TheoremReport",
    "theorem_harness",
    "random_balanced_case",
]


@dataclass
class EnhancementScheme:
    """Per-edge weights (aligned with the graph's edge order) plus the
    enhanced communities and their amounts ``e_c``."""

    weights: np.ndarray
    amounts: dict

    @property
    def enhanced(self) -> frozenset:
        return frozenset(self.amounts)

    @property
    def deltas(self) -> np.ndarray:
        return self.weights - 1.0

    def apply(self, g: Graph) -> Graph:
        return g.with_weights(self.weights)


def _edge_communities(g, partition):
    lab = partition.labels
    return lab[g.u], lab[g.v]


def build_balanced_enhancement(g: Graph, partition: Partition, targets, e_amounts) -> EnhancementScheme:
    """Construct a balanced enhancement of ``targets``.

    ``e_amounts`` maps each target to its added internal weight (a scalar is
    broadcast). The amount is spread uniformly over the target's internal
    edges. Each target must shed ``2 e_c`` of cross weight; the reduction
    carried by every adjacent pair of targets is found by bounded least
    squares and spread uniformly over the edges joining that pair.

    Raises
    ------
    InfeasibleEnhancementError
        When a target lacks internal edges or cross edges to other targets,
        or the requested amounts cannot be balanced.
    """
    if partition.n_nodes != g.n_nodes:
        raise DomainError("partition does not cover the graph's nodes")
    targets = sorted(int(t) for t in set(targets))
    if np.isscalar(e_amounts):
        e_amounts = {t: float(e_amounts) for t in targets}
    amounts = {t: float(e_amounts[t]) for t in targets}
    for t, e in amounts.items():
        if e < 0:
            raise DomainError(f"enhancement amount for community {t} is negative")

    cu, cv = _edge_communities(g, partition)
    weights = np.ones(g.n_edges)
    is_t_u = np.isin(cu, targets)
    is_t_v = np.isin(cv, targets)

    for t in targets:
        inside = (cu == t) & (cv == t)
        if not inside.any():
            raise InfeasibleEnhancementError(f"community {t} has no internal edges", t)
        weights[inside] += amounts[t] / inside.sum()

    shared = (cu != cv) & is_t_u & is_t_v
    pair_edges = {}
    for e in np.flatnonzero(shared).tolist():
        a, b = int(cu[e]), int(cv[e])
        pair_edges.setdefault((min(a, b), max(a, b)), []).append(e)
    pairs = sorted(pair_edges)
    for t in targets:
        if amounts[t] > 0 and not any(t in p for p in pairs):
            raise InfeasibleEnhancementError(
                f"community {t} has no cross edge to another enhanced community", t
            )
    if not pairs or not any(amounts.values()):
        return EnhancementScheme(weights, amounts)

    row = {t: i for i, t in enumerate(targets)}
    incidence = np.zeros((len(targets), len(pairs)))
    for j, (a, b) in enumerate(pairs):
        incidence[row[a], j] = 1.0
        incidence[row[b], j] = 1.0
    rhs = np.array([2.0 * amounts[t] for t in targets])
    sol = lsq_linear(incidence, rhs, bounds=(0.0, np.inf), method="bvls")
    residual = incidence @ sol.x - rhs
    if np.max(np.abs(residual)) > 1e-9 * max(1.0, float(np.abs(rhs).max())):
        worst = targets[int(np.argmax(np.abs(residual)))]
        raise InfeasibleEnhancementError(
            f"cannot balance the reduction required by community {worst}", worst
        )
    for j, p in enumerate(pairs):
        idx = pair_edges[p]
        weights[idx] -= max(sol.x[j], 0.0) / len(idx)
    return EnhancementScheme(weights, amounts)


def validate_enhancement(g: Graph, partition: Partition, scheme: EnhancementScheme, atol=1e-9):
    """Raise :class:`DomainError` unless ``scheme`` is a balanced enhancement."""
    w = np.asarray(scheme.weights, dtype=float)
    if w.shape != (g.n_edges,):
        raise DomainError("scheme weights do not align with the graph's edges")
    cu, cv = _edge_communities(g, partition)
    enhanced = np.array(sorted(scheme.enhanced), dtype=np.int64)
    eu, ev = np.isin(cu, enhanced), np.isin(cv, enhanced)
    inside = (cu == cv) & eu
    cross = cu != cv
    if np.any(w[inside] < 1.0 - atol):
        raise DomainError("an internal edge of an enhanced community lost weight")
    if np.any(w[cross & (eu | ev)] > 1.0 + atol):
        raise DomainError("a cross edge of an enhanced community gained weight")
    untouched = ~inside & ~(cross & (eu | ev))
    if np.any(np.abs(w[untouched] - 1.0) > atol):
        raise DomainError("an edge outside every enhanced community was reweighted")
    lowered = cross & (w < 1.0 - atol)
    if np.any(lowered & ~(eu & ev)):
        raise DomainError("unbalanced: a lowered cross edge touches a non-enhanced community")
    k = int(partition.labels.max()) + 1
    strength = np.bincount(cu, weights=w, minlength=k) + np.bincount(cv, weights=w, minlength=k)
    dsum = np.bincount(partition.labels, weights=g.degree.astype(float), minlength=k)
    for c in enhanced.tolist():
        if abs(strength[c] - dsum[c]) > atol * max(1.0, dsum[c]):
            raise DomainError(f"community {c} weight {strength[c]} != degree sum {dsum[c]}")
        gain = float(w[(cu == c) & (cv == c)].sum() - ((cu == c) & (cv == c)).sum())
        if abs(gain - scheme.amounts[c]) > atol * max(1.0, scheme.amounts[c]):
            raise DomainError(f"community {c} internal gain {gain} != {scheme.amounts[c]}")


@dataclass
class TheoremCheck:
    holds: bool
    n_checked: int
    margin: float
    witnesses: list = field(default_factory=list)


@dataclass
class TheoremReport:
    t1: TheoremCheck
    t2: TheoremCheck
    t3: TheoremCheck

    @property
    def holds(self) -> bool:
        return self.t1.holds and self.t2.holds and self.t3.holds


def _split_deltas(g, w, members, masks, total, strength):
    """Merge gain of (part, rest) for each boolean split row in ``masks``."""
    local = {node: i for i, node in enumerate(members.tolist())}
    mem = np.zeros(g.n_nodes, dtype=bool)
    mem[members] = True
    inside = mem[g.u] & mem[g.v]
    eu = np.array([local[x] for x in g.u[inside].tolist()], dtype=np.int64)
    ev = np.array([local[x] for x in g.v[inside].tolist()], dtype=np.int64)
    ew = w[inside]
    s = strength[members]
    side_u = masks[:, eu]
    side_v = masks[:, ev]
    between = ((side_u != side_v) * ew).sum(axis=1)
    w_a = masks @ s
    w_b = s.sum() - w_a
    return between / total - w_a * w_b / (2.0 * total * total)


def _splits(size, rng, max_exhaustive, n_random):
    if size <= max_exhaustive:
        rows = [
            [0] + list(bits)
            for bits in itertools.product((0, 1), repeat=size - 1)
            if any(bits)
        ]
        return np.array(rows, dtype=bool)
    masks = rng.random((n_random, size)) < 0.5
    masks[:, 0] = False
    masks[~masks.any(axis=1), 1] = True
    return masks


def theorem_harness(
    g: Graph,
    partition: Partition,
    scheme: EnhancementScheme,
    atol=1e-12,
    max_exhaustive=12,
    n_random_splits=256,
    seed=0,
) -> TheoremReport:
    """Check the three balanced-enhancement guarantees on one case.

    ``atol`` absorbs floating-point rounding only. Splits of an enhanced
    community are enumerated exhaustively up to ``max_exhaustive`` members,
    sampled otherwise.
    """
    validate_enhancement(g, partition, scheme)
    gw = scheme.apply(g)
    w = gw.weights
    m = float(g.n_edges)
    total_w = float(w.sum())

    gap = modularity(gw, partition, use_weights=True) - modularity(g, partition)
    t1 = TheoremCheck(gap >= -atol, 1, gap, [] if gap >= -atol else [("Q^w - Q", gap)])

    lab = partition.labels
    cu, cv = lab[g.u], lab[g.v]
    enhanced = sorted(scheme.enhanced)
    k = int(lab.max()) + 1
    dsum = np.bincount(lab, weights=g.degree.astype(float), minlength=k)
    wsum = np.bincount(cu, weights=w, minlength=k) + np.bincount(cv, weights=w, minlength=k)

    cross = cu != cv
    lo, hi = np.minimum(cu, cv)[cross], np.maximum(cu, cv)[cross]
    ones_between, w_between = {}, {}
    for a, b, wt in zip(lo.tolist(), hi.tolist(), w[cross].tolist()):
        ones_between[(a, b)] = ones_between.get((a, b), 0) + 1
        w_between[(a, b)] = w_between.get((a, b), 0.0) + wt
    eset = set(enhanced)
    t2_margin, t2_bad, t2_n = math.inf, [], 0
    for (a, b), cnt in sorted(ones_between.items()):
        if a not in eset or b not in eset:
            continue
        dq = cnt / m - dsum[a] * dsum[b] / (2.0 * m * m)
        dqw = w_between[(a, b)] / total_w - wsum[a] * wsum[b] / (2.0 * total_w * total_w)
        slack = float(dq - dqw)
        t2_n += 1
        t2_margin = min(t2_margin, slack)
        if slack < -atol:
            t2_bad.append(((a, b), dq, dqw))
    t2 = TheoremCheck(not t2_bad, t2_n, t2_margin if t2_n else 0.0, t2_bad)

    rng = np.random.default_rng(seed)
    bound = math.sqrt(8.0 * m)
    t3_margin, t3_bad, t3_n = math.inf, [], 0
    for c in enhanced:
        members = partition.members(c)
        if members.size < 2 or dsum[c] > bound:
            continue
        masks = _splits(members.size, rng, max_exhaustive, n_random_splits)
        dq = _split_deltas(g, np.ones(g.n_edges), members, masks, m, g.degree.astype(float))
        dqw = _split_deltas(g, w, members, masks, total_w, gw.weighted_degree)
        premise = dq >= 0
        t3_n += int(premise.sum())
        if premise.any():
            t3_margin = min(t3_margin, float(dqw[premise].min()))
            for i in np.flatnonzero(premise & (dqw < -atol)).tolist():
                t3_bad.append((c, members[masks[i]].tolist(), float(dq[i]), float(dqw[i])))
    t3 = TheoremCheck(not t3_bad, t3_n, t3_margin if t3_n else 0.0, t3_bad)
    return TheoremReport(t1, t2, t3)


def random_balanced_case(seed, max_nodes=60):
    """Random ``(graph, partition, scheme)`` with a valid balanced enhancement.

    Graph: planted blocks of 3-8 nodes with random densities. Partition: the
    blocks, with a few nodes occasionally reassigned. Targets are pruned until
    each one has internal edges and a cross edge to another target; random
    positive reductions on target-target edges define the amounts.
    """
    rng = np.random.default_rng(seed)
    while True:
        n_blocks = int(rng.integers(2, 9))
        sizes = rng.integers(3, 9, size=n_blocks)
        while sizes.sum() > max_nodes:
            sizes = sizes[:-1]
        block = np.repeat(np.arange(sizes.size), sizes)
        n = block.size
        p_in = rng.uniform(0.5, 1.0)
        p_out = rng.uniform(0.02, 0.2)
        iu, iv = np.triu_indices(n, k=1)
        prob = np.where(block[iu] == block[iv], p_in, p_out)
        keep = rng.random(iu.size) < prob
        g = Graph(n, iu[keep], iv[keep])
        labels = block.copy()
        if rng.random() < 0.3:
            movers = rng.choice(n, size=max(1, n // 10), replace=False)
            labels[movers] = rng.integers(0, sizes.size, size=movers.size)
        partition = Partition(labels)

        cu, cv = labels[g.u], labels[g.v]
        has_inner = set(cu[cu == cv].tolist())
        targets = {c for c in has_inner if rng.random() < 0.8}
        while True:
            is_t = np.isin(cu, list(targets)) & np.isin(cv, list(targets)) & (cu != cv)
            linked = set(cu[is_t].tolist()) | set(cv[is_t].tolist())
            pruned = targets & linked
            if pruned == targets:
                break
            targets = pruned
        if len(targets) < 2:
            continue

        reduction = np.zeros(g.n_edges)
        reduction[is_t] = rng.uniform(0.05, 1.5, size=int(is_t.sum()))
        amounts = {}
        for t in targets:
            amounts[t] = 0.5 * float(reduction[(cu == t) | (cv == t)].sum())
        scheme = build_balanced_enhancement(g, partition, targets, amounts)
        return g, partition, scheme
