"""Tree-decompose a grid, convert it to nice form and check the result."""

import random

from steinertd import corpus
from steinertd.decomposition import (decompose, induced_roots, is_separator, to_nice,
                                     validate_decomposition, validate_nice)

g = corpus.grid(random.Random(0), 4)
for heuristic in ("min-degree", "min-fill"):
    td = decompose(g, heuristic)
    print(f"{heuristic}: width {td.width}, {len(td)} bags")

td = decompose(g, "min-fill")
nice = to_nice(td)
print(f"nice form: {len(nice)} nodes, height {nice.height}")
print("violations:", validate_decomposition(g, nice) + validate_nice(nice))

kinds = {}
for k in nice.kind:
    kinds[k.value] = kinds.get(k.value, 0) + 1
print("node kinds:", kinds)

# every bag on the path between two induced roots separates the two vertices
roots = induced_roots(nice, g.n)
u, v = 0, 15
path = nice.path(roots[u], roots[v])
for x in path:
    bag = nice.bags[x]
    if u not in bag and v not in bag:
        assert is_separator(g, bag, u, v)
print(f"checked {len(path)} bags between the roots of {u} and {v}")
