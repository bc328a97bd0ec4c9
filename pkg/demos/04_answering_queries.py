"""Answer Steiner tree queries from the index and compare with Dreyfus-Wagner."""

import random

from steinertd import corpus, dreyfus_wagner, query
from steinertd.decomposition import decompose, to_nice
from steinertd.index import build_index

rng = random.Random(3)
g = corpus.random_sparse(rng, 25)
idx = build_index(g, to_nice(decompose(g)), 5)
print(f"index: width {idx.width}, height {idx.height}, {len(idx.ntd)} nodes")

for k in (2, 3, 4, 5):
    terms = rng.sample(range(g.n), k)
    res = query(idx, g, terms, debug=True)
    dw = dreyfus_wagner(g, terms)[0].weight
    s = res.stats
    print(f"terminals {sorted(terms)}: weight {res.weight} (dw {dw}), "
          f"visited {s.nodes_visited} nodes, {s.stvs_calls} recombinations")
    assert res.weight == dw

# scaling every weight scales the answer
g7 = g.scaled(7)
idx7 = build_index(g7, to_nice(decompose(g7)), 5)
print("scaled by 7:", query(idx7, g7, terms).weight, "=", 7 * res.weight)
