"""Artificial labeled training graphs built from planted-block models.

Several block-model instances are drawn with dense blocks and a few random
cross-block edges, each is thinned to the input graph's average degree, and
the instance whose average clustering is closest to the input's is kept.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .graph import Graph, average_clustering, average_degree
from .partition import Partition

__all__ = [
    "SbmConfig",
    "LabeledGraph",
    "generate_sbm",
    "thin_to_degree",
    "build_training_graph",
    "sample_community_pairs",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SbmConfig:
    """Block-model parameters.

    ``inter_edges_per_pair_rate`` is the Poisson mean of the number of random
    cross edges drawn for each unordered block pair. ``inter_edges_fixed``,
    when set, replaces the Poisson draw by that exact count per pair.
    """

    n_blocks: int = 26
    block_size_range: tuple = (8, 30)
    p_intra: float = 0.9
    inter_edges_per_pair_rate: float = 0.5
    n_candidates: int = 10
    rng_seed: int = 0
    inter_edges_fixed: int | None = None

    def __post_init__(self):
        lo, hi = self.block_size_range
        if not 0.0 < self.p_intra <= 1.0:
            raise DomainError("p_intra must lie in (0, 1]")
        if lo < 3 or hi < lo:
            raise DomainError("block_size_range must satisfy 3 <= min <= max")
        if self.n_blocks < 1 or self.n_candidates < 1:
            raise DomainError("n_blocks and n_candidates must be positive")
        if self.inter_edges_per_pair_rate < 0:
            raise DomainError("inter_edges_per_pair_rate must be non-negative")
        object.__setattr__(self, "block_size_range", (int(lo), int(hi)))

    def to_dict(self):
        d = asdict(self)
        d["block_size_range"] = list(self.block_size_range)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "block_size_range" in d:
            d["block_size_range"] = tuple(d["block_size_range"])
        return cls(**d)


@dataclass
class LabeledGraph:
    graph: Graph
    ground_truth: Partition
    seed: int | None = None


def _stream(seed, tag):
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag]))


def generate_sbm(cfg: SbmConfig) -> LabeledGraph:
    """Draw one planted-block graph; fully determined by ``cfg.rng_seed``."""
    rng = _stream(cfg.rng_seed, 0)
    lo, hi = cfg.block_size_range
    sizes = rng.integers(lo, hi + 1, size=cfg.n_blocks)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n = int(starts[-1])
    block = np.repeat(np.arange(cfg.n_blocks), sizes)

    us, vs = [], []
    for b, size in enumerate(sizes.tolist()):
        iu, iv = np.triu_indices(size, k=1)
        keep = rng.random(iu.size) < cfg.p_intra
        us.append(iu[keep] + starts[b])
        vs.append(iv[keep] + starts[b])

    cross = set()
    for b1 in range(cfg.n_blocks):
        for b2 in range(b1 + 1, cfg.n_blocks):
            if cfg.inter_edges_fixed is not None:
                k = cfg.inter_edges_fixed
            else:
                k = int(rng.poisson(cfg.inter_edges_per_pair_rate))
            if k == 0:
                continue
            x = rng.integers(starts[b1], starts[b1 + 1], size=k)
            y = rng.integers(starts[b2], starts[b2 + 1], size=k)
            cross.update(zip(x.tolist(), y.tolist()))
    if cross:
        cu, cv = zip(*sorted(cross))
        us.append(np.array(cu))
        vs.append(np.array(cv))

    u = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    return LabeledGraph(Graph(n, u, v), Partition(block), cfg.rng_seed)


def thin_to_degree(lg: LabeledGraph, target_avg_degree: float, rng_seed: int) -> LabeledGraph:
    """Delete uniformly random edges until the average degree reaches the target.

    Each deletion lowers the average degree by ``2/n``. Deletion stops once the
    average is at or below the target, or earlier if the next deletion would
    undershoot the target by more than ``1/n``. The last internal edge of a
    block is never removed, so the result may stay above the target.
    """
    g = lg.graph
    n = g.n_nodes
    current = average_degree(g)
    if target_avg_degree > current + 1e-12:
        raise DomainError(
            f"target average degree {target_avg_degree} exceeds current {current}"
        )
    step = 2.0 / n
    lab = lg.ground_truth.labels
    cu, cv = lab[g.u], lab[g.v]
    intra = cu == cv
    remaining_intra = np.bincount(cu[intra], minlength=int(lab.max()) + 1)

    rng = _stream(rng_seed, 1)
    keep = np.ones(g.n_edges, dtype=bool)
    m = g.n_edges
    for e in rng.permutation(g.n_edges).tolist():
        avg = 2.0 * m / n
        if avg <= target_avg_degree + 1e-12:
            break
        if target_avg_degree - (avg - step) > 0.5 * step + 1e-12:
            break
        if intra[e]:
            b = cu[e]
            if remaining_intra[b] <= 1:
                continue
            remaining_intra[b] -= 1
        keep[e] = False
        m -= 1
    return LabeledGraph(g.subgraph_edges(keep), lg.ground_truth, lg.seed)


def build_training_graph(input_graph: Graph, cfg: SbmConfig) -> LabeledGraph:
    """Pick the thinned candidate whose average clustering best matches the input.

    Candidates use seeds ``cfg.rng_seed .. cfg.rng_seed + n_candidates - 1``;
    ties go to the lowest seed. A candidate sparser than the input is kept
    unthinned.
    """
    if input_graph.n_nodes == 0:
        raise DomainError("input graph is empty")
    target_deg = average_degree(input_graph)
    target_cc = average_clustering(input_graph)
    best, best_dist = None, math.inf
    for k in range(cfg.n_candidates):
        seed = cfg.rng_seed + k
        cand = generate_sbm(_with_seed(cfg, seed))
        deg = average_degree(cand.graph)
        if target_deg <= deg:
            cand = thin_to_degree(cand, target_deg, seed)
        else:
            log.warning("candidate %d is sparser (%.3f) than the input (%.3f)", seed, deg, target_deg)
        dist = abs(average_clustering(cand.graph) - target_cc)
        log.debug("candidate seed=%d avg_degree=%.3f distance=%.5f", seed, average_degree(cand.graph), dist)
        if dist < best_dist:
            best, best_dist = cand, dist
    return best


def _with_seed(cfg, seed):
    d = cfg.to_dict()
    d["rng_seed"] = seed
    return SbmConfig.from_dict(d)


def community_adjacency(g: Graph, partition: Partition) -> dict:
    """Map ``(ci, cj)`` with ``ci < cj`` to the number of edges between them."""
    lab = partition.labels
    cu, cv = lab[g.u], lab[g.v]
    cross = cu != cv
    lo = np.minimum(cu[cross], cv[cross])
    hi = np.maximum(cu[cross], cv[cross])
    pairs, counts = np.unique(np.stack([lo, hi], axis=1), axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(pairs, counts)}


def sample_community_pairs(lg: LabeledGraph, count: int, max_degree_sum=None, rng_seed: int = 0) -> list:
    """Sample distinct edge-adjacent ground-truth community pairs.

    Only communities whose degree sum is at most ``max_degree_sum`` (default
    ``sqrt(8 |E|)``) qualify. When fewer than ``count`` pairs qualify, all
    of them are returned, in sorted order.
    """
    g = lg.graph
    adj = community_adjacency(g, lg.ground_truth)
    if not adj:
        raise DomainError("no edge-adjacent community pairs")
    if max_degree_sum is None:
        max_degree_sum = math.sqrt(8.0 * g.n_edges)
    lab = lg.ground_truth.labels
    dsum = np.bincount(lab, weights=g.degree.astype(float), minlength=int(lab.max()) + 1)
    eligible = sorted(p for p in adj if dsum[p[0]] <= max_degree_sum and dsum[p[1]] <= max_degree_sum)
    if not eligible:
        log.warning("no adjacent pair satisfies the degree-sum cap %.2f", max_degree_sum)
    if len(eligible) <= count:
        return eligible
    rng = _stream(rng_seed, 2)
    idx = np.sort(rng.choice(len(eligible), size=count, replace=False))
    return [eligible[i] for i in idx.tolist()]
