"""Build the offline bag-table index, save it and load it back."""

import math
import random

from steinertd import corpus
from steinertd.decomposition import decompose, to_nice
from steinertd.index import build_index, load_index, save_index

g = corpus.random_sparse(random.Random(7), 20)
nice = to_nice(decompose(g))

for l in (2, 3, 4, 5):
    idx = build_index(g, nice, l)
    data = save_index(idx)
    print(f"l={l}: {idx.entry_count} entries, {len(data)} bytes")

# one entry per bag subset with 2..l vertices
bound = sum(math.comb(len(b), k) for b in nice.bags for k in range(2, 6))
assert idx.entry_count == bound

again = load_index(data, g)
assert again == idx and save_index(again) == data
print("round trip ok, graph hash", g.hexdigest[:16])

# nodes with equal bags share one table object
shared = len(idx.tables) - len({id(t.entries) for t in idx.tables})
print(f"{shared} of {len(idx.tables)} node tables are shared")
