"""Linear edge-weight regression trained against ground-truth community pairs.

An edge weight is ``w_e = p . x_e`` for the feature vector ``x_e``. The
parameters minimise

    F(p) = (mean(w) - 1)^2 + lambda1 * var(w) + lambda2 * sum_i h(dQ_i)

where ``dQ_i`` is the weighted modularity gain of merging the ``i``-th
sampled pair of adjacent ground-truth communities and ``h`` the logistic
sigmoid. Pushing every ``dQ_i`` down teaches the model to make those merges
unattractive.

Because the regression is linear, every weight sum the objective needs is an
inner product of ``p`` with a feature sum computed once up front (see
:class:`_Cache`). :func:`naive_aggregates` and the ``method="naive"`` paths
recompute everything from per-edge weights and exist as the reference the
fast path is checked against.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import expit

from .errors import DegenerateWeightsError, DomainError, ParseError
from .features import FEATURE_SET, N_FEATURES, FeatureMatrix, extract_all
from .graph import Graph
from .optimize import bfgs
from .sbm import LabeledGraph, community_adjacency, sample_community_pairs

__all__ = [
    "TrainingProblem",
    "WeightModel",
    "WeightAggregates",
    "incremental_aggregates",
    "naive_aggregates",
    "objective",
    "gradient",
    "merge_deltas",
    "train",
    "apply_weights",
    "save_model",
    "load_model",
    "model_to_json",
    "model_from_json",
    "PENALTY_BUDGET",
]

log = logging.getLogger(__name__)

MODEL_SCHEMA = 1

#: Default total penalty weight ``lambda2 * |I|``; ``lambda2=None`` resolves
#: to ``PENALTY_BUDGET / |I|``. Merge gains are O(1/|E|), so a small lambda2
#: barely moves the weights. Past roughly twice this budget the optimiser
#: prefers collapsing the mean weight towards 0, where the gains diverge to
#: -inf and the sigmoid penalties vanish.
PENALTY_BUDGET = 600.0


@dataclass
class WeightModel:
    p: np.ndarray
    lambda1: float = 1.0
    lambda2: float | None = None
    training_seed: int = 0
    iterations_used: int = 0
    final_gradient_norm: float = 0.0
    converged: bool = True
    feature_set: str = FEATURE_SET
    #: objective at every accepted training iterate; not persisted
    history: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.shape != (N_FEATURES,):
            raise DomainError(f"model needs {N_FEATURES} parameters, got {self.p.shape}")

    @classmethod
    def identity(cls):
        p = np.zeros(N_FEATURES)
        p[0] = 1.0
        return cls(p)


@dataclass
class WeightAggregates:
    """Weight sums for a parameter vector.

    ``communities`` maps each community touched by a training pair to
    ``(W_c, W_c_in, W_c_out)``; ``pairs`` holds ``W_{ci,cj}`` aligned with
    the problem's pair list.
    """

    W: float
    w_bar: float
    sigma2: float
    communities: dict
    pairs: np.ndarray


@dataclass
class TrainingProblem:
    """Labeled graph, its feature matrix and the sampled pair set.

    Build one with :meth:`from_labeled_graph` unless the pairs are chosen by
    hand.
    """

    graph: LabeledGraph
    features: FeatureMatrix
    pairs: list
    lambda1: float = 1.0
    lambda2: float | None = None
    tol: float = 1e-4
    max_iters: int = 500
    seed: int = 0
    loss: str = "sigmoid"

    def __post_init__(self):
        if self.tol <= 0:
            raise DomainError("tol must be positive")
        if self.loss != "sigmoid":
            raise DomainError(f"unknown loss {self.loss!r}")
        if len(self.features) != self.graph.graph.n_edges:
            raise DomainError("feature rows must align with the graph's edges")
        adj = community_adjacency(self.graph.graph, self.graph.ground_truth)
        norm = []
        for a, b in self.pairs:
            a, b = (int(a), int(b)) if a < b else (int(b), int(a))
            if (a, b) not in adj:
                raise DomainError(f"communities {a} and {b} are not edge-adjacent")
            norm.append((a, b))
        self.pairs = norm
        if self.lambda2 is None:
            self.lambda2 = PENALTY_BUDGET / max(len(norm), 1)

    @classmethod
    def from_labeled_graph(cls, lg: LabeledGraph, n_pairs=50, max_degree_sum=None, seed=0, **kw):
        pairs = sample_community_pairs(lg, n_pairs, max_degree_sum, rng_seed=seed)
        return cls(lg, extract_all(lg.graph), pairs, seed=seed, **kw)

    @cached_property
    def _cache(self):
        return _Cache(self)


class _Cache:
    """Feature sums reused by every objective/gradient evaluation."""

    def __init__(self, problem: TrainingProblem):
        g = problem.graph.graph
        x = problem.features.rows
        lab = problem.graph.ground_truth.labels
        cu, cv = lab[g.u], lab[g.v]
        self.x = x
        self.m = g.n_edges
        self.col_sums = problem.features.column_sums
        self.second_moment = x.T @ x

        comms = sorted({c for pair in problem.pairs for c in pair})
        self.communities = comms
        self.in_sum = {}
        self.out_sum = {}
        self.in_mask = {}
        self.out_mask = {}
        for c in comms:
            inside = (cu == c) & (cv == c)
            boundary = (cu == c) ^ (cv == c)
            self.in_mask[c] = inside
            self.out_mask[c] = boundary
            self.in_sum[c] = x[inside].sum(axis=0)
            self.out_sum[c] = x[boundary].sum(axis=0)

        k = len(problem.pairs)
        self.pair_masks = []
        self.x_between = np.zeros((k, N_FEATURES))
        self.x_first = np.zeros((k, N_FEATURES))
        self.x_second = np.zeros((k, N_FEATURES))
        for i, (a, b) in enumerate(problem.pairs):
            between = ((cu == a) & (cv == b)) | ((cu == b) & (cv == a))
            self.pair_masks.append((a, b, between))
            self.x_between[i] = x[between].sum(axis=0)
            self.x_first[i] = 2.0 * self.in_sum[a] + self.out_sum[a]
            self.x_second[i] = 2.0 * self.in_sum[b] + self.out_sum[b]

        touched = np.zeros(self.m, dtype=bool)
        for c in comms:
            touched |= self.in_mask[c] | self.out_mask[c]
        self.z = float(touched.sum()) / max(k, 1)


def _check_total(W):
    if W == 0.0:
        raise DegenerateWeightsError("edge weights sum to zero")


def incremental_aggregates(problem: TrainingProblem, p) -> WeightAggregates:
    """Aggregates as inner products of ``p`` with cached feature sums."""
    cache = problem._cache
    p = np.asarray(p, dtype=float)
    m = cache.m
    W = float(p @ cache.col_sums)
    w_bar = W / m
    sigma2 = float(p @ cache.second_moment @ p) / m - w_bar * w_bar
    comms = {}
    for c in cache.communities:
        w_in = float(p @ cache.in_sum[c])
        w_out = float(p @ cache.out_sum[c])
        comms[c] = (2.0 * w_in + w_out, w_in, w_out)
    return WeightAggregates(W, w_bar, sigma2, comms, cache.x_between @ p)


def naive_aggregates(problem: TrainingProblem, p) -> WeightAggregates:
    """Aggregates recomputed from every edge weight."""
    cache = problem._cache
    w = cache.x @ np.asarray(p, dtype=float)
    W = float(w.sum())
    w_bar = W / cache.m
    sigma2 = float(np.mean((w - w_bar) ** 2))
    comms = {}
    for c in cache.communities:
        w_in = float(w[cache.in_mask[c]].sum())
        w_out = float(w[cache.out_mask[c]].sum())
        comms[c] = (2.0 * w_in + w_out, w_in, w_out)
    pairs = np.array([w[mask].sum() for _, _, mask in cache.pair_masks])
    return WeightAggregates(W, w_bar, sigma2, comms, pairs)


def _objective_fast(problem, p):
    cache = problem._cache
    W = float(p @ cache.col_sums)
    _check_total(W)
    m = cache.m
    w_bar = W / m
    sigma2 = float(p @ cache.second_moment @ p) / m - w_bar * w_bar
    f = (w_bar - 1.0) ** 2 + problem.lambda1 * sigma2
    if problem.pairs:
        dq = cache.x_between @ p / W - (cache.x_first @ p) * (cache.x_second @ p) / (2.0 * W * W)
        f += problem.lambda2 * float(expit(dq).sum())
    return f


def _gradient_fast(problem, p):
    cache = problem._cache
    s = cache.col_sums
    W = float(p @ s)
    _check_total(W)
    m = cache.m
    w_bar = W / m
    mp = cache.second_moment @ p
    grad = 2.0 * (w_bar - 1.0) / m * s
    grad += problem.lambda1 * (2.0 / m * mp - 2.0 * w_bar / m * s)
    if problem.pairs:
        w_ij = cache.x_between @ p
        w_a = cache.x_first @ p
        w_b = cache.x_second @ p
        h = expit(w_ij / W - w_a * w_b / (2.0 * W * W))
        coef = problem.lambda2 * h * (1.0 - h)
        # d dQ / dp for every pair, stacked as rows
        d_dq = (
            cache.x_between / W
            - np.outer(w_ij / (W * W), s)
            - (cache.x_first * w_b[:, None] + cache.x_second * w_a[:, None]) / (2.0 * W * W)
            + np.outer(w_a * w_b / (W ** 3), s)
        )
        grad += coef @ d_dq
    return grad


def _objective_naive(problem, p):
    cache = problem._cache
    agg = naive_aggregates(problem, p)
    _check_total(agg.W)
    f = (agg.w_bar - 1.0) ** 2 + problem.lambda1 * agg.sigma2
    W = agg.W
    for i, (a, b) in enumerate(problem.pairs):
        dq = agg.pairs[i] / W - agg.communities[a][0] * agg.communities[b][0] / (2.0 * W * W)
        f += problem.lambda2 * float(expit(dq))
    return f


def _gradient_naive(problem, p):
    """Per-edge derivative dF/dw, then the chain rule through w = X p."""
    cache = problem._cache
    w = cache.x @ np.asarray(p, dtype=float)
    m = cache.m
    W = float(w.sum())
    _check_total(W)
    w_bar = W / m
    dfdw = np.full(m, 2.0 * (w_bar - 1.0) / m)
    dfdw += problem.lambda1 * 2.0 * (w - w_bar) / m
    for a, b, between in cache.pair_masks:
        w_ij = float(w[between].sum())
        # dW_c/dw_e: 2 inside c, 1 on its boundary, else 0
        dwa = 2.0 * cache.in_mask[a] + cache.out_mask[a]
        dwb = 2.0 * cache.in_mask[b] + cache.out_mask[b]
        w_a = float(dwa @ w)
        w_b = float(dwb @ w)
        dq = w_ij / W - w_a * w_b / (2.0 * W * W)
        h = float(expit(dq))
        d_dq = (
            between / W
            - w_ij / (W * W)
            - (dwa * w_b + w_a * dwb) / (2.0 * W * W)
            + w_a * w_b / W ** 3
        )
        dfdw += problem.lambda2 * h * (1.0 - h) * d_dq
    return cache.x.T @ dfdw


_METHODS = ("incremental", "naive")


def _check_args(p, method):
    if method not in _METHODS:
        raise DomainError(f"method must be one of {_METHODS}, got {method!r}")
    p = np.asarray(p, dtype=float)
    if p.shape != (N_FEATURES,):
        raise DomainError(f"p must have length {N_FEATURES}")
    return p


def objective(problem: TrainingProblem, p, method="incremental") -> float:
    """Penalised objective ``F(p)``; ``method`` is ``"incremental"`` or ``"naive"``."""
    p = _check_args(p, method)
    return (_objective_naive if method == "naive" else _objective_fast)(problem, p)


def gradient(problem: TrainingProblem, p, method="incremental") -> np.ndarray:
    """Analytic gradient of :func:`objective` with respect to ``p``."""
    p = _check_args(p, method)
    return (_gradient_naive if method == "naive" else _gradient_fast)(problem, p)


def merge_deltas(problem: TrainingProblem, p) -> np.ndarray:
    """Weighted modularity gain of every training pair under ``p``."""
    agg = incremental_aggregates(problem, p)
    W = agg.W
    _check_total(W)
    return np.array([
        agg.pairs[i] / W - agg.communities[a][0] * agg.communities[b][0] / (2.0 * W * W)
        for i, (a, b) in enumerate(problem.pairs)
    ])


def train(problem: TrainingProblem, method="incremental", max_step=None) -> WeightModel:
    """Fit ``p`` by BFGS starting from the unit-weight model ``(1, 0, ..., 0)``.

    A model is always returned; ``converged`` is False when the iteration
    cap was hit or the line search stalled.
    """
    p0 = WeightModel.identity().p
    log.info(
        "training on %d edges, %d pairs, Z=%.1f",
        problem._cache.m, len(problem.pairs), problem._cache.z,
    )
    res = bfgs(
        lambda p: objective(problem, p, method),
        lambda p: gradient(problem, p, method),
        p0,
        tol=problem.tol,
        max_iters=problem.max_iters,
        max_step=max_step,
    )
    if not res.converged:
        log.warning("training stopped without converging: %s", res.message)
    w_bar = float(res.x @ problem._cache.col_sums) / problem._cache.m
    if abs(w_bar - 1.0) > 0.5:
        log.warning("mean trained weight %.3f is far from 1; the penalty weight may be too large", w_bar)
    model = WeightModel(
        res.x,
        lambda1=problem.lambda1,
        lambda2=problem.lambda2,
        training_seed=problem.seed,
        iterations_used=res.iterations,
        final_gradient_norm=res.grad_norm,
        converged=res.converged,
        history=res.history,
    )
    return model


def apply_weights(g: Graph, model: WeightModel) -> Graph:
    """Copy of ``g`` weighted by the model on its own topology (may go negative)."""
    return g.with_weights(extract_all(g).rows @ model.p)


def model_to_json(model: WeightModel) -> str:
    doc = {
        "schema": MODEL_SCHEMA,
        "feature_set": model.feature_set,
        "p": [float(x) for x in model.p],
        "lambda1": float(model.lambda1),
        "lambda2": None if model.lambda2 is None else float(model.lambda2),
        "seed": int(model.training_seed),
        "iterations": int(model.iterations_used),
        "grad_norm": float(model.final_gradient_norm),
        "converged": bool(model.converged),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_json(text) -> WeightModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid model JSON: {exc}") from None
    if doc.get("feature_set") != FEATURE_SET:
        raise DomainError(f"unsupported feature_set {doc.get('feature_set')!r}")
    try:
        return WeightModel(
            np.array(doc["p"], dtype=float),
            lambda1=float(doc.get("lambda1", 0.0)),
            lambda2=None if doc.get("lambda2") is None else float(doc["lambda2"]),
            training_seed=int(doc.get("seed", 0)),
            iterations_used=int(doc.get("iterations", 0)),
            final_gradient_norm=float(doc.get("grad_norm", 0.0)),
            converged=bool(doc.get("converged", True)),
        )
    except KeyError as exc:
        raise ParseError(f"model JSON lacks {exc}") from None


def save_model(model: WeightModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> WeightModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
