"""File-based stages of the weighting pipeline and their composition.

Every stage reads and writes files, so :func:`run_pipeline` is literally the
stage functions called in sequence on one output directory. The run
manifest records every parameter and seed; replaying it reproduces the
artifacts byte for byte. Wall-clock timings change between runs and are
kept in ``timings.json`` outside the manifest.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .community import fast_greedy, label_propagation, modularity
from .errors import ConvergenceError, DomainError, StageError
from .graph import Graph, dump_edge_list, load_edge_list, strip_nonpositive_edges
from .metrics import evaluate, modularity_density
from .partition import Partition, dump_partition, load_partition
from .regression import TrainingProblem, apply_weights, load_model, model_to_json, train
from .sbm import LabeledGraph, SbmConfig, build_training_graph, generate_sbm

__all__ = [
    "TrainingSettings",
    "PipelineConfig",
    "ARTIFACTS",
    "read_text",
    "write_text",
    "stage_generate",
    "stage_train",
    "stage_weight",
    "stage_detect",
    "stage_eval",
    "run_pipeline",
    "load_manifest",
]

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = 1
METRICS_SCHEMA = 1
DETECTORS = ("fastgreedy", "labelprop")

#: file names written by :func:`run_pipeline`, in stage order
ARTIFACTS = (
    "training.edges",
    "training.tsv",
    "model.json",
    "weighted.edges",
    "partition.tsv",
    "metrics.json",
    "run-manifest.json",
)
TIMINGS = "timings.json"


@dataclass
class TrainingSettings:
    lambda1: float = 1.0
    lambda2: float | None = None
    n_pairs: int = 50
    max_degree_sum: float | None = None
    tol: float = 1e-4
    max_iters: int = 500
    seed: int = 0
    require_convergence: bool = False


@dataclass
class PipelineConfig:
    input_path: str
    out_dir: str
    truth_path: str | None = None
    sbm: SbmConfig = field(default_factory=SbmConfig)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    detector: str = "fastgreedy"
    detector_seed: int = 0

    def validate(self):
        if not Path(self.input_path).is_file():
            raise DomainError(f"input {self.input_path!r} does not exist")
        if self.truth_path is not None and not Path(self.truth_path).is_file():
            raise DomainError(f"ground truth {self.truth_path!r} does not exist")
        if self.detector not in DETECTORS:
            raise DomainError(f"unknown detector {self.detector!r}")

    def to_manifest(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "input_path": self.input_path,
            "truth_path": self.truth_path,
            "sbm": self.sbm.to_dict(),
            "training": asdict(self.training),
            "detector": self.detector,
            "detector_seed": self.detector_seed,
        }

    @classmethod
    def from_manifest(cls, doc: dict, out_dir) -> "PipelineConfig":
        if doc.get("schema") != MANIFEST_SCHEMA:
            raise DomainError(f"unsupported manifest schema {doc.get('schema')!r}")
        return cls(
            input_path=doc["input_path"],
            out_dir=str(out_dir),
            truth_path=doc.get("truth_path"),
            sbm=SbmConfig.from_dict(doc["sbm"]),
            training=TrainingSettings(**doc["training"]),
            detector=doc["detector"],
            detector_seed=int(doc["detector_seed"]),
        )


def load_manifest(path, out_dir) -> PipelineConfig:
    return PipelineConfig.from_manifest(json.loads(read_text(path)), out_dir)


# -- file helpers: "-" means stdin / stdout --------------------------------
def read_text(path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path, text):
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _labels_in(text):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line.split()[0])
    return out


def _drop_isolated(lg: LabeledGraph) -> LabeledGraph:
    g = lg.graph
    keep = g.degree > 0
    if keep.all():
        return lg
    new_id = np.cumsum(keep) - 1
    labels = [lab for lab, k in zip(g.labels, keep.tolist()) if k]
    h = Graph(int(keep.sum()), new_id[g.u], new_id[g.v], g.weights, labels=labels)
    return LabeledGraph(h, Partition(lg.ground_truth.labels[keep]), lg.seed)


# -- stages ------------------------------------------------------------------
def stage_generate(sbm: SbmConfig, out_edges, out_truth, match_path=None) -> LabeledGraph:
    """Write a labeled block-model graph; with ``match_path``, the training
    graph matched to that input's degree and clustering.

    Nodes left without edges are dropped so the edge list and the
    ground-truth file cover the same node set.
    """
    if match_path is not None:
        lg = build_training_graph(load_edge_list(read_text(match_path)), sbm)
    else:
        lg = generate_sbm(sbm)
    lg = _drop_isolated(lg)
    write_text(out_edges, dump_edge_list(lg.graph, weights=False))
    write_text(out_truth, dump_partition(lg.ground_truth, lg.graph.labels))
    return lg


def stage_train(edges_path, truth_path, out_model, settings: TrainingSettings):
    """Fit a weight model on a labeled training graph and write its JSON.

    Raises :class:`ConvergenceError` after writing the model when
    ``settings.require_convergence`` is set and training did not converge.
    """
    g = load_edge_list(read_text(edges_path))
    truth = load_partition(read_text(truth_path), g.labels)
    problem = TrainingProblem.from_labeled_graph(
        LabeledGraph(g, truth, settings.seed),
        n_pairs=settings.n_pairs,
        max_degree_sum=settings.max_degree_sum,
        seed=settings.seed,
        lambda1=settings.lambda1,
        lambda2=settings.lambda2,
        tol=settings.tol,
        max_iters=settings.max_iters,
    )
    model = train(problem)
    write_text(out_model, model_to_json(model))
    if settings.require_convergence and not model.converged:
        raise ConvergenceError(
            f"no convergence after {model.iterations_used} iterations "
            f"(gradient norm {model.final_gradient_norm:.3g})"
        )
    return model


def stage_weight(input_path, model_path, out_path) -> Graph:
    """Weight the input's edges with a trained model; weights may be <= 0."""
    g = load_edge_list(read_text(input_path))
    gw = apply_weights(g, load_model(model_path))
    write_text(out_path, dump_edge_list(gw))
    return gw


def stage_detect(
    input_path, out_path, detector="fastgreedy", weighted=False, seed=0, metrics_path=None
) -> Partition:
    """Detect communities; in weighted mode edges with weight <= 0 are dropped
    first (their nodes stay).

    ``metrics_path`` optionally receives a JSON sidecar with Q on the
    unweighted topology, the community count and the merge-trace length.
    """
    if detector not in DETECTORS:
        raise DomainError(f"unknown detector {detector!r}")
    g = load_edge_list(read_text(input_path))
    work = strip_nonpositive_edges(g) if weighted else g
    trace_length = None
    if detector == "fastgreedy":
        res = fast_greedy(work, use_weights=weighted)
        part, trace_length = res.partition, len(res.trace)
    else:
        part = label_propagation(work, use_weights=weighted, seed=seed)
    write_text(out_path, dump_partition(part, g.labels))
    if metrics_path is not None:
        doc = {
            "schema": METRICS_SCHEMA,
            "detector": detector,
            "weighted": bool(weighted),
            "q": modularity(g.unweighted(), part),
            "n_communities": part.n_communities,
            "trace_length": trace_length,
        }
        write_text(metrics_path, _dump_json(doc))
    return part


def stage_eval(partition_path, out_path, truth_path=None, graph_path=None) -> dict:
    """Metrics JSON for a partition: similarity to ``truth_path`` and Q and
    Q_ds on the unweighted topology of ``graph_path``, whichever are given."""
    if truth_path is None and graph_path is None:
        raise DomainError("eval needs a ground truth, a graph, or both")
    text = read_text(partition_path)
    if graph_path is not None:
        g = load_edge_list(read_text(graph_path)).unweighted()
        labels = g.labels
    else:
        g, labels = None, _labels_in(text)
    part = load_partition(text, labels)
    doc = {"schema": METRICS_SCHEMA, "n_nodes": part.n_nodes, "n_communities": part.n_communities}
    if truth_path is not None:
        truth = load_partition(read_text(truth_path), labels)
        doc.update(evaluate(part, truth, g))
    else:
        doc["q"] = modularity(g, part)
        doc["q_ds"] = modularity_density(g, part)
    write_text(out_path, _dump_json(doc))
    return doc


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage into ``cfg.out_dir`` and return the manifest.

    On failure the artifacts of this run are removed and a
    :class:`StageError` naming the failing stage is raised.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = {name: out / name for name in ARTIFACTS}
    timings = {}

    def run(stage, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            result = fn(*args, **kw)
        except Exception as exc:
            raise StageError(stage, exc) from exc
        timings[stage] = time.perf_counter() - t0
        log.info("%s finished in %.3f s", stage, timings[stage])
        return result

    try:
        run("generate-sbm", stage_generate, cfg.sbm, p["training.edges"], p["training.tsv"], cfg.input_path)
        model = run("train", stage_train, p["training.edges"], p["training.tsv"], p["model.json"], cfg.training)
        run("weight", stage_weight, cfg.input_path, p["model.json"], p["weighted.edges"])
        run(
            "detect", stage_detect, p["weighted.edges"], p["partition.tsv"],
            cfg.detector, True, cfg.detector_seed,
        )
        run("eval", stage_eval, p["partition.tsv"], p["metrics.json"], cfg.truth_path, cfg.input_path)
        manifest = cfg.to_manifest()
        manifest["input_sha256"] = _sha256(cfg.input_path)
        manifest["converged"] = bool(model.converged)
        manifest["artifacts"] = {n: _sha256(p[n]) for n in ARTIFACTS[:-1]}
        write_text(p["run-manifest.json"], _dump_json(manifest))
        write_text(out / TIMINGS, _dump_json({"schema": MANIFEST_SCHEMA, "seconds": timings}))
    except BaseException:
        for name in (*ARTIFACTS, TIMINGS):
            try:
                os.remove(out / name)
            except FileNotFoundError:
                pass
        raise
    return manifest
