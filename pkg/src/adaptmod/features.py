"""Local topological edge features.

Every edge ``(u, v)`` is described by the 7-vector

    (1, sqrt(cn), |c(u) - c(v)|, jaccard, resource allocation,
     adamic-adar, min(deg)/max(deg))

where ``cn`` is the number of common neighbours and ``c`` the local
clustering coefficient. The leading 1 is the regression intercept slot.
Weights of the input graph are ignored: features depend on topology only.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .graph import Graph, clustering_coefficient, clustering_coefficients

__all__ = [
    "FEATURE_NAMES",
    "FEATURE_SET",
    "N_FEATURES",
    "FeatureMatrix",
    "extract_features",
    "extract_all",
]

FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5", "f6")
FEATURE_SET = "f1-f6-v1"
N_FEATURES = len(FEATURE_NAMES) + 1


@dataclass
class FeatureMatrix:
    """Per-edge feature rows aligned with the graph's canonical edge order."""

    rows: np.ndarray
    column_sums: np.ndarray

    @classmethod
    def from_rows(cls, rows):
        rows = np.asarray(rows, dtype=float).reshape(-1, N_FEATURES)
        return cls(rows, rows.sum(axis=0))

    def __len__(self):
        return self.rows.shape[0]

    def to_csv(self, g: Graph) -> str:
        out = io.StringIO()
        out.write("edge_u,edge_v," + ",".join(FEATURE_NAMES) + "\n")
        lab = g.labels
        for a, b, row in zip(g.u.tolist(), g.v.tolist(), self.rows[:, 1:].tolist()):
            out.write(f"{lab[a]},{lab[b]}," + ",".join(repr(x) for x in row) + "\n")
        return out.getvalue()


def extract_features(g: Graph, u, v) -> np.ndarray:
    """Feature vector of the single edge ``(u, v)``.

    Works directly on neighbour sets; :func:`extract_all` is the vectorised
    path for whole graphs.
    """
    if not g.has_edge(u, v):
        raise DomainError(f"edge ({u}, {v}) is not in the graph")
    nu = set(g.neighbors(u).tolist())
    nv = set(g.neighbors(v).tolist())
    common = nu & nv
    union = nu | nv
    cn = len(common)
    ra = sum(1.0 / g.degree[w] for w in common)
    # degree-1 common neighbours cannot exist in a simple graph; guard anyway
    aa = sum(1.0 / math.log(g.degree[w]) for w in common if g.degree[w] >= 2)
    du, dv = int(g.degree[u]), int(g.degree[v])
    return np.array([
        1.0,
        math.sqrt(cn),
        abs(clustering_coefficient(g, u) - clustering_coefficient(g, v)),
        cn / len(union),
        ra,
        aa,
        min(du, dv) / max(du, dv),
    ])


def extract_all(g: Graph) -> FeatureMatrix:
    """Feature rows for every edge of ``g``."""
    m = g.n_edges
    if m == 0:
        return FeatureMatrix(np.zeros((0, N_FEATURES)), np.zeros(N_FEATURES))

    a = g.adjacency()
    deg = g.degree.astype(float)
    u, v = g.u, g.v

    inv_deg = np.zeros_like(deg)
    nz = deg > 0
    inv_deg[nz] = 1.0 / deg[nz]
    inv_log = np.zeros_like(deg)
    big = deg >= 2
    inv_log[big] = 1.0 / np.log(deg[big])

    # sum over common neighbours w of s(w) is (A diag(s) A)[u, v]
    def common_sum(scale):
        if scale is None:
            prod = a @ a
        else:
            prod = a @ a.multiply(scale[:, None]).tocsr()
        return np.asarray(prod[u, v]).ravel()

    cn = common_sum(None)
    ra = common_sum(inv_deg)
    aa = common_sum(inv_log)
    cc = clustering_coefficients(g)
    du, dv = deg[u], deg[v]

    rows = np.empty((m, N_FEATURES))
    rows[:, 0] = 1.0
    rows[:, 1] = np.sqrt(cn)
    rows[:, 2] = np.abs(cc[u] - cc[v])
    rows[:, 3] = cn / (du + dv - cn)
    rows[:, 4] = ra
    rows[:, 5] = aa
    rows[:, 6] = np.minimum(du, dv) / np.maximum(du, dv)
    return FeatureMatrix(rows, rows.sum(axis=0))
