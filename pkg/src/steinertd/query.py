"""Online Steiner tree queries over a :class:`~steinertd.index.SteinerIndex`.

A query walks the nice decomposition bottom-up from the nodes where the
terminals first appear (their induced roots) to the lowest common ancestor of
those nodes. At each node it keeps a *working set*: the optimal tree for every
subset, of at most ``|S|`` vertices, of the node's bag plus the terminals that
already left the bag below. Trees for subsets that mix vertices from the two
sides of a bag are obtained by separator recombination (:func:`stvs`).

Inside the walk, subsets are int bitmasks over a per-query :class:`KeySpace`
and trees are materialised only for the final answer.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from itertools import combinations

from .decomposition import NodeKind, is_separator, lca
from .exceptions import (CapacityError, DecompositionError, GraphHashMismatch,
                         IndexInvariantError, InfeasibleError)
from .graph import INF, SteinerTree, graph_union, prune_to_tree


class KeySpace:
    """Bit assignment for vertices seen during one query."""

    def __init__(self):
        self.bit_of = {}
        self.vertex_of = []

    def bit(self, v):
        b = self.bit_of.get(v)
        if b is None:
            b = self.bit_of[v] = 1 << len(self.vertex_of)
            self.vertex_of.append(v)
        return b

    def mask(self, vertices):
        m = 0
        for v in vertices:
            m |= self.bit(v)
        return m

    def vertices(self, mask):
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.vertex_of[i])
            mask >>= 1
            i += 1
        return tuple(sorted(out))


class Entry:
    """Weight of an optimal tree plus how to rebuild it."""

    __slots__ = ("weight", "mask", "space", "parts", "_tree")

    def __init__(self, weight, mask, space, tree=None, parts=None):
        self.weight = weight
        self.mask = mask
        self.space = space
        self.parts = parts
        self._tree = tree

    @property
    def tree(self):
        if self._tree is None:
            key = self.space.vertices(self.mask)
            if self.weight == INF:
                self._tree = SteinerTree.infeasible(key)
            else:
                a, b = self.parts
                self._tree = prune_to_tree(graph_union(a.tree, b.tree), key)
        return self._tree


@dataclass
class QueryStats:
    nodes_visited: int = 0
    stvs_calls: int = 0
    candidates: int = 0
    wall_time: float = 0.0
    height: int = 0
    width: int = 0
    lca: int = -1
    visited: frozenset = field(default_factory=frozenset)

    def to_json(self):
        doc = asdict(self)
        doc["visited"] = sorted(self.visited)
        return json.dumps(doc, sort_keys=True)


@dataclass
class QueryResult:
    tree: SteinerTree
    stats: QueryStats

    @property
    def weight(self):
        return self.tree.weight


class WorkingSet:
    """Optimal trees keyed by subsets of ``bag | terminals``.

    ``terminals`` are the query terminals already forgotten below this node.
    """

    def __init__(self, bag, terminals, entries, space, cap, node_id=-1):
        self.bag = frozenset(bag)
        self.terminals = frozenset(terminals)
        self.entries = entries
        self.space = space
        self.cap = cap
        self.node_id = node_id

    @classmethod
    def from_table(cls, table, cap, space=None):
        space = KeySpace() if space is None else space
        entries = {}
        for v in table.bag:
            b = space.bit(v)
            entries[b] = Entry(0, b, space, tree=SteinerTree((v,)))
        for key, tree in table.entries.items():
            if len(key) <= cap:
                m = space.mask(key)
                entries[m] = Entry(tree.weight, m, space, tree=tree)
        return cls(table.bag, (), entries, space, cap, table.node_id)

    @property
    def ground(self):
        return self.bag | self.terminals

    def keys(self):
        """Stored subsets with at least two vertices, as sorted tuples."""
        return sorted(self.space.vertices(m) for m in self.entries if m & (m - 1))

    def entry(self, vertices):
        return self.entries.get(self.space.mask(vertices))

    def tree(self, vertices):
        e = self.entry(vertices)
        if e is None:
            raise KeyError(tuple(sorted(vertices)))
        return e.tree

    def __len__(self):
        return sum(1 for m in self.entries if m & (m - 1))


def _submasks(mask):
    out = []
    s = mask
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    out.reverse()
    return out


def _recombine(vb, v0b, smask, cbits, get, stats):
    """Best split over separator bits ``cbits`` and subsets of ``smask``.

    Returns ``(weight, (entry_a, entry_b))`` or ``(INF, None)``.
    """
    subs = _submasks(smask)
    best_w = INF
    best = None
    try:
        for wb in cbits:
            a_base = wb | vb
            b_base = wb | v0b
            for sub in subs:
                ea = get(sub | a_base)
                wa = ea.weight
                if wa >= best_w:
                    continue
                eb = get((smask ^ sub) | b_base)
                total = wa + eb.weight
                if total < best_w:
                    best_w = total
                    best = (ea, eb)
    except KeyError as exc:
        raise IndexInvariantError(f"sub-tree for mask {exc.args[0]:#x} is missing") from None
    if stats is not None:
        stats.stvs_calls += 1
        stats.candidates += len(cbits) * len(subs)
    return best_w, best


def stvs(v, v0, s, c, lookup):
    """Minimum Steiner tree for ``s | {v, v0}`` given a ``(v, v0)``-separator ``c``.

    Minimises, over every ``w`` in ``c`` and every split of ``s`` into disjoint
    ``s1`` and ``s2``, the union of the optimal trees for ``s1 | {w, v}`` and
    ``s2 | {w, v0}``. ``lookup(frozenset)`` must return the optimal tree for
    any such set with two or more vertices; smaller sets are handled here.
    """
    space = KeySpace()
    vb, v0b = space.bit(v), space.bit(v0)
    smask = space.mask(sorted(s))
    cbits = [space.bit(w) for w in sorted(c)]
    cache = {}

    def get(mask):
        e = cache.get(mask)
        if e is None:
            if mask & (mask - 1) == 0:
                e = Entry(0, mask, space, tree=SteinerTree(space.vertices(mask)))
            else:
                tree = lookup(frozenset(space.vertices(mask)))
                if tree is None:
                    raise KeyError(mask)
                e = Entry(tree.weight, mask, space, tree=tree)
            cache[mask] = e
        return e

    target = smask | vb | v0b
    if target & (target - 1) == 0:
        return SteinerTree(space.vertices(target))
    weight, parts = _recombine(vb, v0b, smask, cbits, get, None)
    return Entry(weight, target, space, parts=parts).tree


# -- traversal cases --------------------------------------------------------

def handle_forget(ws, removed, is_terminal):
    """Forget node: the bag loses ``removed``.

    A forgotten terminal stays in the ground set; any other vertex takes its
    subsets with it.
    """
    bag = ws.bag - {removed}
    if is_terminal:
        return WorkingSet(bag, ws.terminals | {removed}, ws.entries, ws.space, ws.cap)
    rb = ws.space.bit(removed)
    entries = {m: e for m, e in ws.entries.items() if not m & rb}
    return WorkingSet(bag, ws.terminals, entries, ws.space, ws.cap)


def handle_introduce(ws, added, child_bag, table, stats=None, check=None):
    """Introduce node: the bag gains ``added``.

    Subsets inside the bag are copied from ``table`` (the node's bag table).
    Subsets that also hold forgotten terminals are built one terminal at a
    time, in ascending order, with the child bag as separator between the
    terminal and ``added``.
    """
    space, cap = ws.space, ws.cap
    child = sorted(child_bag)
    vb = space.bit(added)
    entries = dict(ws.entries)
    entries[vb] = Entry(0, vb, space, tree=SteinerTree((added,)))
    for size in range(1, min(cap - 1, len(child)) + 1):
        for combo in combinations(child, size):
            key = tuple(sorted(combo + (added,)))
            tree = table.entries.get(key)
            if tree is None:
                raise IndexInvariantError(f"bag table of node {table.node_id} lacks {key}")
            m = space.mask(key)
            entries[m] = Entry(tree.weight, m, space, tree=tree)
    cbits = [space.bit(x) for x in child]
    pool = list(cbits)
    get = entries.__getitem__
    for a in sorted(ws.terminals):
        if check is not None:
            check(child, a, added)
        ab = space.bit(a)
        for size in range(0, min(cap - 2, len(pool)) + 1):
            for combo in combinations(pool, size):
                y = sum(combo)
                weight, parts = _recombine(ab, vb, y, cbits, get, stats)
                m = y | ab | vb
                entries[m] = Entry(weight, m, space, parts=parts)
        pool.append(ab)
    return WorkingSet(ws.bag | {added}, ws.terminals, entries, space, cap)


def handle_join(left, right, bag, stats=None, check=None):
    """Join node: merge the working sets of two children with equal bags.

    Starting from ``left``, the terminals forgotten under ``right`` are
    inserted one at a time with ``bag`` as separator. Within one insertion,
    subsets are built in order of how many ``left`` terminals they hold, so
    every sub-tree a recombination needs is already present.
    """
    bag = frozenset(bag)
    if left.bag != bag or right.bag != bag:
        raise DecompositionError("join children must have the bag of the join node")
    if left.terminals & right.terminals:
        raise DecompositionError("join children share forgotten terminals")
    if left.space is not right.space:
        raise ValueError("working sets of one query must share a key space")
    space, cap = left.space, left.cap
    entries = dict(right.entries)
    entries.update(left.entries)
    get = entries.__getitem__
    bag_bits = [space.bit(x) for x in sorted(bag)]
    s1 = sorted(left.terminals)
    s1_bits = [space.bit(x) for x in s1]
    s1_mask = sum(s1_bits)
    s2 = sorted(right.terminals)
    done = []
    for t in s2:
        tb = space.bit(t)
        pool = bag_bits + s1_bits + done
        todo = []
        for size in range(1, min(cap - 1, len(pool)) + 1):
            for combo in combinations(pool, size):
                y = sum(combo)
                if y & s1_mask:
                    todo.append((bin(y & s1_mask).count("1"), y))
        todo.sort(key=lambda p: p[0])
        for _, y in todo:
            sb = next(b for b in s1_bits if b & y)
            if check is not None:
                check(bag, t, space.vertex_of[sb.bit_length() - 1])
            weight, parts = _recombine(tb, sb, y ^ sb, bag_bits, get, stats)
            m = y | tb
            entries[m] = Entry(weight, m, space, parts=parts)
        done.append(tb)
    return WorkingSet(bag, left.terminals | right.terminals, entries, space, cap)


# -- queries ----------------------------------------------------------------

def traversal_nodes(idx, terminals):
    """Nodes on the paths from the terminals' induced roots up to their LCA."""
    ntd = idx.ntd
    starts = sorted({idx.roots[t] for t in terminals})
    top = lca(ntd, starts)
    visited = set()
    for x in starts:
        while x not in visited:
            visited.add(x)
            if x == top:
                break
            x = ntd.parent[x]
    return top, visited


def query(idx, g, terminals, debug=False, trace=None):
    """Exact minimum Steiner tree for ``terminals``.

    ``debug`` asserts at every recombination that the separator really
    separates in ``g``. ``trace(node, working_set)`` is called after each node.
    """
    start = time.perf_counter()
    if g.digest != idx.graph_hash:
        raise GraphHashMismatch(idx.graph_hash.hex(), g.hexdigest)
    terms = sorted(set(terminals))
    for t in terms:
        if not 0 <= t < g.n:
            raise ValueError(f"terminal {t} is not a vertex of the graph")
    if len(terms) < 2:
        raise ValueError("a query needs at least two distinct terminals")
    if len(terms) > idx.l:
        raise CapacityError(
            f"{len(terms)} terminals but the index supports at most l={idx.l}; "
            f"rebuild the index with a larger l or use the Dreyfus-Wagner fallback")
    comp = g.components()
    if len({comp[t] for t in terms}) > 1:
        raise InfeasibleError(f"terminals {terms} span several components")

    ntd = idx.ntd
    top, visited = traversal_nodes(idx, terms)
    stats = QueryStats(height=ntd.height, width=ntd.width, lca=top,
                       visited=frozenset(visited))
    check = None
    if debug:
        def check(c, u, v):
            assert is_separator(g, c, u, v), f"{sorted(c)} does not separate {u} and {v}"

    cap = len(terms)
    termset = set(terms)
    space = KeySpace()
    live = {}
    depth = ntd.depth
    for x in sorted(visited, key=lambda y: (-depth[y], y)):
        kids = [c for c in ntd.children[x] if c in visited]
        if not kids:
            ws = WorkingSet.from_table(idx.tables[x], cap, space)
        elif len(kids) == 1:
            child = live.pop(kids[0])
            kind = ntd.kind[x]
            if kind is NodeKind.JOIN:
                ws = child
            elif kind is NodeKind.FORGET:
                v = ntd.vertex[x]
                ws = handle_forget(child, v, v in termset)
            else:
                ws = handle_introduce(child, ntd.vertex[x], ntd.bags[kids[0]], idx.tables[x],
                                      stats, check)
        else:
            ws = handle_join(live.pop(kids[0]), live.pop(kids[1]), ntd.bags[x], stats, check)
        ws.node_id = x
        live[x] = ws
        stats.nodes_visited += 1
        if trace is not None:
            trace(x, ws)

    entry = live[top].entries.get(space.mask(terms))
    if entry is None:
        raise IndexInvariantError(f"no entry for {terms} at the LCA node {top}")
    if entry.weight == INF:
        raise InfeasibleError(f"terminals {terms} cannot be connected")
    tree = entry.tree
    stats.wall_time = time.perf_counter() - start
    return QueryResult(tree, stats)
