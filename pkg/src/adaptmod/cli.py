"""Command-line front end: one subcommand per pipeline stage plus ``pipeline``.

Exit codes: 0 success, 2 parse errors (including bad arguments), 3 domain
errors and missing files, 4 training did not converge (only when
``--require-convergence`` is given), 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import AdaptmodError, ConvergenceError, DomainError, ParseError, StageError
from .pipeline import (
    DETECTORS,
    PipelineConfig,
    TrainingSettings,
    load_manifest,
    run_pipeline,
    stage_detect,
    stage_eval,
    stage_generate,
    stage_train,
    stage_weight,
)
from .sbm import SbmConfig

EXIT_PARSE, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_OTHER = 2, 3, 4, 1


def _add_sbm_args(p):
    d = SbmConfig()
    g = p.add_argument_group("block model")
    g.add_argument("--n-blocks", type=int, default=d.n_blocks)
    g.add_argument("--block-size-min", type=int, default=d.block_size_range[0])
    g.add_argument("--block-size-max", type=int, default=d.block_size_range[1])
    g.add_argument("--p-intra", type=float, default=d.p_intra)
    g.add_argument("--inter-rate", type=float, default=d.inter_edges_per_pair_rate,
                   help="Poisson mean of cross edges per block pair")
    g.add_argument("--inter-fixed", type=int, default=None,
                   help="exact number of cross edges per block pair")
    g.add_argument("--n-candidates", type=int, default=d.n_candidates)
    g.add_argument("--sbm-seed", type=int, default=d.rng_seed)


def _sbm_config(a) -> SbmConfig:
    return SbmConfig(
        n_blocks=a.n_blocks,
        block_size_range=(a.block_size_min, a.block_size_max),
        p_intra=a.p_intra,
        inter_edges_per_pair_rate=a.inter_rate,
        n_candidates=a.n_candidates,
        rng_seed=a.sbm_seed,
        inter_edges_fixed=a.inter_fixed,
    )


def _add_training_args(p):
    d = TrainingSettings()
    g = p.add_argument_group("training")
    g.add_argument("--lambda1", type=float, default=d.lambda1)
    g.add_argument("--lambda2", type=float, default=None,
                   help="penalty weight per pair (default 600 / number of pairs)")
    g.add_argument("--n-pairs", type=int, default=d.n_pairs)
    g.add_argument("--max-degree-sum", type=float, default=None,
                   help="degree-sum cap for training communities (default sqrt(8|E|))")
    g.add_argument("--tol", type=float, default=d.tol)
    g.add_argument("--max-iters", type=int, default=d.max_iters)
    g.add_argument("--train-seed", type=int, default=d.seed)
    g.add_argument("--require-convergence", action="store_true")


def _training(a) -> TrainingSettings:
    return TrainingSettings(
        lambda1=a.lambda1,
        lambda2=a.lambda2,
        n_pairs=a.n_pairs,
        max_degree_sum=a.max_degree_sum,
        tol=a.tol,
        max_iters=a.max_iters,
        seed=a.train_seed,
        require_convergence=a.require_convergence,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptmod", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-sbm", help="write a labeled block-model graph")
    _add_sbm_args(p)
    p.add_argument("--match", metavar="EDGES",
                   help="build the training graph matched to this input graph")
    p.add_argument("--out-edges", default="-")
    p.add_argument("--out-truth", required=True)

    p = sub.add_parser("train", help="fit edge-weight parameters")
    p.add_argument("--graph", required=True, help="training edge list")
    p.add_argument("--truth", required=True, help="training ground truth")
    p.add_argument("--out", default="-")
    _add_training_args(p)

    p = sub.add_parser("weight", help="weight an edge list with a model")
    p.add_argument("--input", default="-")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="-")

    p = sub.add_parser("detect", help="detect communities")
    p.add_argument("--input", default="-")
    p.add_argument("--out", default="-")
    p.add_argument("--detector", choices=DETECTORS, default="fastgreedy")
    p.add_argument("--weighted", action="store_true",
                   help="use edge weights, dropping edges with weight <= 0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics-out", help="JSON sidecar: Q, community count, trace length")

    p = sub.add_parser("eval", help="score a partition")
    p.add_argument("--partition", required=True)
    p.add_argument("--truth")
    p.add_argument("--graph", help="graph for Q and Q_ds (weights ignored)")
    p.add_argument("--out", default="-")

    p = sub.add_parser("pipeline", help="run every stage into one directory")
    p.add_argument("--input", help="input edge list")
    p.add_argument("--truth", help="ground truth of the input, for metrics")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--manifest", help="replay a run manifest; other options are ignored")
    p.add_argument("--detector", choices=DETECTORS, default="fastgreedy")
    p.add_argument("--detector-seed", type=int, default=0)
    _add_sbm_args(p)
    _add_training_args(p)
    return parser


def _dispatch(a):
    if a.command == "generate-sbm":
        stage_generate(_sbm_config(a), a.out_edges, a.out_truth, a.match)
    elif a.command == "train":
        stage_train(a.graph, a.truth, a.out, _training(a))
    elif a.command == "weight":
        stage_weight(a.input, a.model, a.out)
    elif a.command == "detect":
        stage_detect(a.input, a.out, a.detector, a.weighted, a.seed, a.metrics_out)
    elif a.command == "eval":
        stage_eval(a.partition, a.out, a.truth, a.graph)
    elif a.command == "pipeline":
        if a.manifest:
            cfg = load_manifest(a.manifest, a.out_dir)
        else:
            if not a.input:
                raise DomainError("pipeline needs --input or --manifest")
            cfg = PipelineConfig(
                input_path=a.input,
                out_dir=a.out_dir,
                truth_path=a.truth,
                sbm=_sbm_config(a),
                training=_training(a),
                detector=a.detector,
                detector_seed=a.detector_seed,
            )
        run_pipeline(cfg)


def exit_code(exc) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(exc, (DomainError, OSError)):
        return EXIT_DOMAIN
    return EXIT_OTHER


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(a.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        _dispatch(a)
    except (AdaptmodError, OSError) as exc:
        print(f"adaptmod {a.command}: {exc}", file=sys.stderr)
        return exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
