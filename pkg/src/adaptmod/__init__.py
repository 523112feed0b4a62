"""Community detection by modularity maximisation on learned edge weights.

A linear model maps link-prediction features of each edge to a weight. It
is fitted on an artificial labeled graph so that merging adjacent
ground-truth communities becomes unattractive, then applied to the input
graph before running a modularity maximiser.
"""

from .community import GreedyResult, MergeStep, fast_greedy, label_propagation, merge_delta, modularity
from .enhancement import (
    EnhancementScheme,
    TheoremReport,
    build_balanced_enhancement,
    random_balanced_case,
    theorem_harness,
    validate_enhancement,
)
from .errors import (
    AdaptmodError,
    ConvergenceError,
    DegenerateWeightsError,
    DomainError,
    InfeasibleEnhancementError,
    ParseError,
    StageError,
)
from .features import FEATURE_NAMES, FEATURE_SET, FeatureMatrix, extract_all, extract_features
from .graph import (
    Graph,
    average_clustering,
    average_degree,
    clustering_coefficient,
    clustering_coefficients,
    dump_edge_list,
    load_edge_list,
    node_stats,
    strip_nonpositive_edges,
)
from .metrics import ari, evaluate, f_measure, modularity_density, nmi, vi
from .optimize import BfgsResult, bfgs
from .partition import Partition, community_aggregates, dump_partition, load_partition
from .pipeline import PipelineConfig, TrainingSettings, run_pipeline
from .regression import (
    PENALTY_BUDGET,
    TrainingProblem,
    WeightModel,
    apply_weights,
    gradient,
    load_model,
    objective,
    save_model,
    train,
)
from .sbm import LabeledGraph, SbmConfig, build_training_graph, generate_sbm, sample_community_pairs, thin_to_degree

__version__ = "0.1.0"
