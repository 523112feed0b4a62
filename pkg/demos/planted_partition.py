"""
Learned weights on a planted-partition graph
============================================

Fast greedy on a noisy block model merges small blocks. Weighting the edges
with a model trained on an artificial graph of the same degree separates
them again.
"""

import tempfile
from pathlib import Path

import numpy as np

from adaptmod import (
    SbmConfig,
    apply_weights,
    build_training_graph,
    fast_greedy,
    generate_sbm,
    nmi,
    strip_nonpositive_edges,
    TrainingProblem,
    train,
)

# an input graph of about 1000 nodes in 50 blocks, roughly 45% of edges crossing
lg = generate_sbm(SbmConfig(n_blocks=50, block_size_range=(15, 25), p_intra=0.5,
                            inter_edges_per_pair_rate=3.2, rng_seed=1))
g, truth = lg.graph, lg.ground_truth
print(g)

# unweighted baseline: too few communities
base = fast_greedy(g).partition
print("unweighted:", base.n_communities, "communities, NMI %.3f" % nmi(base, truth))

# training graph: block model thinned to the input's average degree
tg = build_training_graph(g, SbmConfig())
print("training graph:", tg.graph)

# fit the weight model; pairs of adjacent training communities get penalised
problem = TrainingProblem.from_labeled_graph(tg, n_pairs=50)
model = train(problem)
print("model:", np.round(model.p, 4), "converged:", model.converged)

# weight the input, drop non-positive edges, detect again
gw = strip_nonpositive_edges(apply_weights(g, model))
res = fast_greedy(gw, use_weights=True)
print("weighted:", res.partition.n_communities, "communities, NMI %.3f" % nmi(res.partition, truth))
