"""Acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line; the lines are also collected and
repeated in the pytest terminal summary. Run standalone with
``python -m tests.test_acceptance`` for the lines alone.
"""

import itertools
import json
import tempfile
import time
import timeit
from pathlib import Path

import numpy as np
import pytest

from adaptmod import (
    Graph,
    Partition,
    SbmConfig,
    TrainingProblem,
    ari,
    dump_edge_list,
    dump_partition,
    extract_all,
    f_measure,
    fast_greedy,
    generate_sbm,
    gradient,
    load_partition,
    modularity,
    modularity_density,
    nmi,
    objective,
    random_balanced_case,
    run_pipeline,
    theorem_harness,
    train,
    vi,
)
from adaptmod.pipeline import ARTIFACTS, PipelineConfig, TrainingSettings
from adaptmod.regression import incremental_aggregates, naive_aggregates

from . import oracles
from .conftest import load_football, football_paths, random_graph

RESULTS = []


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _pipeline_nmi(input_path, truth_path, out_dir, seed=0):
    cfg = PipelineConfig(
        str(input_path),
        str(out_dir),
        truth_path=str(truth_path),
        sbm=SbmConfig(rng_seed=seed),
        training=TrainingSettings(seed=seed),
    )
    run_pipeline(cfg)
    return json.loads((Path(out_dir) / "metrics.json").read_text())


def _write_labeled(lg, root, name):
    edges, truth = Path(root) / f"{name}.edges", Path(root) / f"{name}.truth"
    edges.write_text(dump_edge_list(lg.graph, weights=False))
    truth.write_text(dump_partition(lg.ground_truth, lg.graph.labels))
    return edges, truth


def test_criterion_1_theorem_suite():
    n_cases, t3_cases = 250, 0
    failures = []
    t0 = time.perf_counter()
    for seed in range(n_cases):
        g, part, scheme = random_balanced_case(seed)
        rep = theorem_harness(g, part, scheme)
        t3_cases += rep.t3.n_checked > 0
        if not rep.holds:
            failures.append(seed)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 10.0
    report(1, ok, f"{n_cases} cases, {t3_cases} with T3 checks, violations at seeds {failures}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_football_baseline():
    data = load_football()
    if data is None:
        report(2, False, "football fixture not found (tests/data or $ADAPTMOD_FOOTBALL_DIR)")
        pytest.fail("football fixture missing: criterion 2 cannot be evaluated")
    g, truth = data
    t0 = time.perf_counter()
    res = fast_greedy(g)
    elapsed = time.perf_counter() - t0
    q, score, k = modularity(g, res.partition), nmi(res.partition, truth), res.partition.n_communities
    ok = abs(q - 0.5686) <= 0.01 and abs(score - 0.585) <= 0.02 and k == 6 and elapsed < 1.0
    report(2, ok, f"Q={q:.4f} NMI={score:.3f} communities={k} {elapsed:.3f} s")
    assert ok


def test_criterion_3_football_weighted(tmp_path):
    paths = football_paths()
    if paths is None:
        report(3, False, "football fixture not found (tests/data or $ADAPTMOD_FOOTBALL_DIR)")
        pytest.fail("football fixture missing: criterion 3 cannot be evaluated")
    edges, truth_path = paths
    g, truth = load_football()
    base = fast_greedy(g).partition
    base_qds = modularity_density(g, base)
    t0 = time.perf_counter()
    runs = []
    for seed in range(5):
        doc = _pipeline_nmi(edges, truth_path, tmp_path / f"s{seed}", seed)
        runs.append((doc["nmi"], doc["ari"], doc["q_ds"]))
    elapsed = time.perf_counter() - t0
    med = np.median(np.array(runs), axis=0)
    ok = med[0] >= 0.80 and med[1] >= 0.80 and med[2] > base_qds and elapsed < 60.0
    report(
        3, ok,
        f"median NMI={med[0]:.3f} ARI={med[1]:.3f} Q_ds={med[2]:.3f} (unweighted {base_qds:.3f}) {elapsed:.1f} s",
    )
    assert ok


def test_criterion_4_planted_partition_gain(tmp_path):
    t0 = time.perf_counter()
    gains = []
    for seed in range(10):
        lg = generate_sbm(SbmConfig(
            n_blocks=50, block_size_range=(15, 25), p_intra=0.5,
            inter_edges_per_pair_rate=3.2, rng_seed=1000 + seed,
        ))
        edges, truth = _write_labeled(lg, tmp_path, f"g{seed}")
        base = nmi(fast_greedy(lg.graph).partition, lg.ground_truth)
        weighted = _pipeline_nmi(edges, truth, tmp_path / f"run{seed}")["nmi"]
        gains.append(weighted - base)
    elapsed = time.perf_counter() - t0
    med = float(np.median(gains))
    ok = med >= 0.10 and elapsed < 300.0
    report(4, ok, f"median NMI gain {med:+.3f} over 10 graphs (min {min(gains):+.3f}), {elapsed:.1f} s")
    assert ok


def _problem(seed):
    lg = generate_sbm(SbmConfig(
        n_blocks=int(5 + seed % 4), block_size_range=(5, 12), p_intra=0.6,
        inter_edges_per_pair_rate=2.0, rng_seed=seed,
    ))
    return TrainingProblem.from_labeled_graph(lg, n_pairs=12, max_degree_sum=1e9, seed=seed)


def test_criterion_5_gradient_check():
    h, worst, checked = 1e-6, 0.0, 0
    for ps in range(5):
        problem = _problem(ps)
        rng = np.random.default_rng(100 + ps)
        for _ in range(20):
            p = np.eye(7)[0] + rng.normal(0, 0.3, size=7)
            fd = np.empty(7)
            for k in range(7):
                e = np.eye(7)[k] * h
                fd[k] = (objective(problem, p + e) - objective(problem, p - e)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(gradient(problem, p) - fd))))
            checked += 1
    ok = worst <= 1e-5
    report(5, ok, f"{checked} points, max |analytic - central difference| = {worst:.2e}")
    assert ok


def test_criterion_6_incremental_equivalence_and_speed():
    worst = 0.0
    for ps in range(5):
        problem = _problem(ps)
        rng = np.random.default_rng(ps)
        for _ in range(20):
            p = np.eye(7)[0] + rng.normal(0, 0.5, size=7)
            a, b = incremental_aggregates(problem, p), naive_aggregates(problem, p)
            diffs = [abs(a.W - b.W), abs(a.w_bar - b.w_bar), abs(a.sigma2 - b.sigma2)]
            diffs.append(float(np.max(np.abs(a.pairs - b.pairs))))
            for c in a.communities:
                diffs.append(float(np.max(np.abs(np.subtract(a.communities[c], b.communities[c])))))
            worst = max(worst, max(diffs))

    lg = generate_sbm(SbmConfig(
        n_blocks=50, block_size_range=(15, 25), p_intra=0.5, inter_edges_per_pair_rate=3.2, rng_seed=7,
    ))
    problem = TrainingProblem.from_labeled_graph(lg, n_pairs=50, tol=1e-12, max_iters=30)
    problem._cache  # shared setup, excluded from both timings
    times = {
        m: min(timeit.repeat(lambda m=m: train(problem, method=m), number=3, repeat=5)) / 3
        for m in ("incremental", "naive")
    }
    speedup = times["naive"] / times["incremental"]
    ok = worst <= 1e-9 and speedup >= 5.0
    report(
        6, ok,
        f"max aggregate difference {worst:.1e}; {lg.graph.n_nodes}-node training graph, "
        f"30 BFGS iterations: {speedup:.1f}x speedup",
    )
    assert ok


def _metric_mismatch(x, y):
    a, b = Partition(x), Partition(y)
    ref_vi, ref_nmi = oracles.vi_nmi(x, y)
    return max(
        abs(vi(a, b) - ref_vi),
        abs(nmi(a, b) - ref_nmi),
        abs(f_measure(a, b) - oracles.f_measure(x, y)),
        abs(ari(a, b) - oracles.ari(x, y)),
    )


def _graph_mismatch(g, x):
    part = Partition(x)
    return max(
        abs(modularity(g, part) - oracles.modularity(g, x)),
        abs(modularity_density(g, part) - oracles.modularity_density(g, x)),
    )


def test_criterion_7_metric_oracles():
    rng = np.random.default_rng(0)
    worst, n_pairs, n_graph = 0.0, 0, 0
    # ARI is undefined on a single node, so enumeration starts at two
    for n in range(2, 7):
        parts = list(oracles.set_partitions(range(n)))
        for x, y in itertools.product(parts, repeat=2):
            worst = max(worst, _metric_mismatch(x, y))
            n_pairs += 1
        graphs = [Graph.from_edges(list(itertools.combinations(range(n), 2)))]
        graphs += [g for g in (random_graph(rng, n, 0.5) for _ in range(6)) if g.n_edges]
        for g in graphs:
            for x in parts:
                worst = max(worst, _graph_mismatch(g, x))
                n_graph += 1
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        x = rng.integers(0, rng.integers(1, n + 1), size=n).tolist()
        y = rng.integers(0, rng.integers(1, n + 1), size=n).tolist()
        worst = max(worst, _metric_mismatch(x, y))
        g = random_graph(rng, n, rng.uniform(0.2, 0.9))
        if g.n_edges == 0:
            g = Graph(n, [0], [1])
        worst = max(worst, _graph_mismatch(g, x))
        n_pairs += 1
        n_graph += 1
    ok = worst <= 1e-9
    report(7, ok, f"{n_pairs} partition pairs, {n_graph} graph cases, max deviation {worst:.1e}")
    assert ok


def test_criterion_8_determinism_replay(tmp_path):
    lg = generate_sbm(SbmConfig(n_blocks=10, block_size_range=(8, 14), inter_edges_per_pair_rate=1.5, rng_seed=11))
    edges, truth = _write_labeled(lg, tmp_path, "input")
    cfg = PipelineConfig(str(edges), str(tmp_path / "first"), truth_path=str(truth))
    run_pipeline(cfg)
    manifest = json.loads((tmp_path / "first" / "run-manifest.json").read_text())
    for name in ("second", "third"):
        run_pipeline(PipelineConfig.from_manifest(manifest, tmp_path / name))
    differing = [
        a for a in ARTIFACTS for run in ("second", "third")
        if (tmp_path / "first" / a).read_bytes() != (tmp_path / run / a).read_bytes()
    ]
    ok = not differing
    report(8, ok, f"{len(ARTIFACTS)} artifacts compared over 3 runs, differing: {differing}")
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for fn in tests:
        with tempfile.TemporaryDirectory() as tmp:
            args = [Path(tmp)] if fn.__code__.co_argcount else []
            try:
                fn(*args)
            except (AssertionError, pytest.fail.Exception):
                pass
