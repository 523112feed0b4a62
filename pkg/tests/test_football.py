"""Examples on the college-football network; skipped when the fixture is absent.

See :func:`tests.conftest.football_paths` for where the files are looked up.
"""

import json

import numpy as np
import pytest

from adaptmod import (
    SbmConfig,
    ari,
    average_degree,
    build_training_graph,
    extract_all,
    fast_greedy,
    label_propagation,
    modularity,
    modularity_density,
    nmi,
)
from adaptmod.pipeline import PipelineConfig, TrainingSettings, run_pipeline

from .conftest import football_paths, load_football

pytestmark = pytest.mark.skipif(football_paths() is None, reason="football fixture not available")


@pytest.fixture(scope="module")
def football():
    return load_football()


def test_size(football):
    g, truth = football
    assert (g.n_nodes, g.n_edges) == (115, 613)
    assert truth.n_nodes == 115


def test_features_in_range(football):
    fm = extract_all(football[0])
    assert len(fm) == 613
    f3 = fm.rows[:, 3]
    assert np.all((f3 >= 0) & (f3 <= 1))


def test_training_graph_degree(football):
    lg = build_training_graph(football[0], SbmConfig())
    assert average_degree(lg.graph) == pytest.approx(2 * 613 / 115, rel=0.05)


def test_ground_truth_modularity(football):
    g, truth = football
    assert 0.5 < modularity(g, truth) < 0.6


def test_fast_greedy_baseline(football):
    g, truth = football
    part = fast_greedy(g).partition
    assert modularity(g, part) == pytest.approx(0.5686, abs=0.01)
    assert part.n_communities == 6
    assert nmi(part, truth) == pytest.approx(0.585, abs=0.02)
    assert ari(part, truth) == pytest.approx(0.493, abs=0.03)
    assert modularity_density(g, truth) > modularity_density(g, part)


def test_weighted_label_propagation_is_no_worse(football, tmp_path):
    g, truth = football
    edges, truth_path = football_paths()
    weighted, plain = [], []
    for seed in range(10):
        cfg = PipelineConfig(
            str(edges), str(tmp_path / f"r{seed}"), truth_path=str(truth_path),
            sbm=SbmConfig(rng_seed=seed), training=TrainingSettings(seed=seed),
            detector="labelprop", detector_seed=seed,
        )
        run_pipeline(cfg)
        weighted.append(json.loads((tmp_path / f"r{seed}" / "metrics.json").read_text())["nmi"])
        plain.append(nmi(label_propagation(g, seed=seed), truth))
    assert np.median(weighted) >= np.median(plain)


def test_pipeline_artifacts_and_replay(tmp_path):
    edges, truth = football_paths()
    run_pipeline(PipelineConfig(str(edges), str(tmp_path / "a"), truth_path=str(truth)))
    manifest = (tmp_path / "a" / "run-manifest.json").read_text()
    cfg = PipelineConfig.from_manifest(json.loads(manifest), tmp_path / "b")
    run_pipeline(cfg)
    for name in ("training.edges", "model.json", "weighted.edges", "partition.tsv", "metrics.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
