"""Parse a small SteinLib instance and solve it two independent ways.

Dreyfus-Wagner runs a subset dynamic program; brute force tries every
vertex superset of the terminals. Both must agree.
"""

from steinertd import brute_force_steiner, dreyfus_wagner, parse_stp
from steinertd.graph import format_weight

STP = """33D32945 STP File, STP Format Version 1.0
SECTION Graph
Nodes 6
E 1 2 1
E 2 3 1
E 3 4 1
E 4 5 1
E 5 6 1
E 6 1 1
E 1 4 3
E 2 5 1.5
END
SECTION Terminals
T 1
T 3
T 5
END
EOF
"""

g, terminals = parse_stp(STP)
# 1.5 forces every weight to be doubled; format_weight undoes that for display
print(f"{g.n} vertices, {g.num_edges} edges, weights scaled by {g.scale}")

tree, table = dreyfus_wagner(g, terminals)
brute = brute_force_steiner(g, terminals)
labels = g.labels
print("dreyfus-wagner:", format_weight(g, tree.weight),
      [(labels[u], labels[v]) for u, v in tree.edge_pairs()])
print("brute force:   ", format_weight(g, brute.weight))
assert tree.weight == brute.weight

# the table keeps every subset, so smaller queries come for free
for pair in [(0, 2), (2, 4), (0, 4)]:
    print(f"pair {labels[pair[0]]},{labels[pair[1]]}:",
          format_weight(g, table.steiner_tree(pair).weight))
