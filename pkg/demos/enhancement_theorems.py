"""
Balanced enhancement never lowers modularity
============================================

Raise the weight inside some communities by e_c and take 2 e_c off the
edges between them. Modularity of the partition cannot drop, merging two
enhanced neighbours becomes less attractive, and small communities that
should not be split stay unsplit.
"""

import itertools

from adaptmod import (
    Graph,
    Partition,
    build_balanced_enhancement,
    merge_delta,
    modularity,
    random_balanced_case,
    theorem_harness,
)

# two 4-cliques joined by one bridge
edges = list(itertools.combinations(range(4), 2)) + list(itertools.combinations(range(4, 8), 2)) + [(3, 4)]
g = Graph.from_edges(edges)
part = Partition([0] * 4 + [1] * 4)

# enhance both sides by the bridge's half weight
scheme = build_balanced_enhancement(g, part, [0, 1], 0.5)
gw = scheme.apply(g)
print("weights:", gw.weights.round(4))

print("Q   = %.4f" % modularity(g, part))
print("Q^w = %.4f" % modularity(gw, part, use_weights=True))
print("merge gain unweighted %.4f, weighted %.4f"
      % (merge_delta(g, part, 0, 1), merge_delta(gw, part, 0, 1, use_weights=True)))

# the same checks over random graphs, partitions and schemes
bad = 0
for seed in range(200):
    rep = theorem_harness(*random_balanced_case(seed))
    bad += not rep.holds
print("violations over 200 random cases:", bad)
