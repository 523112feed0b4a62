"""
Why the penalty weight scales with the number of pairs
======================================================

Merge gains do not change when every weight is multiplied by the same
constant, so the merge penalty alone can be lowered by shrinking all
weights toward zero. Only the mean-weight term resists. When the total
penalty weight lambda2 * |I| is large, training slides into that basin and
the weights collapse. The default holds lambda2 * |I| at a fixed budget.
"""

import numpy as np

from adaptmod import PENALTY_BUDGET, SbmConfig, TrainingProblem, build_training_graph, generate_sbm, train

# training graph matched to a football-sized input
lg = generate_sbm(SbmConfig(n_blocks=12, block_size_range=(8, 12), p_intra=0.75,
                            inter_edges_per_pair_rate=0.9, rng_seed=0))
tg = build_training_graph(lg.graph, SbmConfig())
pairs = TrainingProblem.from_labeled_graph(tg, n_pairs=50).pairs
print(len(pairs), "pairs; default budget", PENALTY_BUDGET)

# mean trained weight against the total penalty weight
for budget in (150, 300, 600, 1200, 2400, 4800):
    problem = TrainingProblem.from_labeled_graph(tg, n_pairs=50, lambda2=budget / len(pairs))
    model = train(problem)
    w = problem.features.rows @ model.p
    print("lambda2*|I| = %5d   mean weight %.3f   share <= 0: %.2f" % (budget, w.mean(), np.mean(w <= 0)))
