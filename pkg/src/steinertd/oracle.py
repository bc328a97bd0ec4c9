"""Exact Steiner tree solvers used as ground truth and as the bag-table engine.

``dreyfus_wagner`` is the classical subset dynamic program: ``dp[D][v]`` is the
weight of a minimum tree spanning the terminal subset ``D`` plus vertex ``v``.
Each subset is first closed under merging two complementary sub-subsets at a
common vertex, then relaxed along all-pairs shortest paths. Back-pointers are
kept for both steps so trees, not only weights, can be read for every subset.
"""

from __future__ import annotations

import numpy as np

from .exceptions import CapacityError, InfeasibleError
from .graph import INF, UNREACHABLE, SteinerTree, UnionFind, prune_to_tree

DW_TERMINAL_CAP = 16
BRUTE_FORCE_VERTEX_CAP = 16


def _popcount(x):
    return bin(x).count("1")


class DWTable:
    """Dreyfus-Wagner table over a fixed terminal list.

    Subsets are bitmasks over ``terminals`` (bit ``i`` is ``terminals[i]``).
    Rows exist for subsets of up to ``max_size`` terminals.
    """

    def __init__(self, g, terminals, max_size=None):
        self.graph = g
        self.terminals = tuple(terminals)
        k = len(self.terminals)
        if k > DW_TERMINAL_CAP:
            raise CapacityError(
                f"{k} terminals exceed the Dreyfus-Wagner cap of {DW_TERMINAL_CAP}")
        self.max_size = k if max_size is None else min(max_size, k)
        dist, _ = g.all_pairs
        n = g.n
        self.dp = np.full((1 << k, n), UNREACHABLE, dtype=np.int64)
        self.attach = np.full((1 << k, n), -1, dtype=np.int64)
        self.split = {}
        for i, t in enumerate(self.terminals):
            self.dp[1 << i] = dist[t]
        cols = np.arange(n)
        by_size = sorted((m for m in range(1, 1 << k) if 2 <= _popcount(m) <= self.max_size),
                         key=lambda m: (_popcount(m), m))
        for d in by_size:
            low = d & -d
            rest = d ^ low
            # proper submasks holding the lowest bit, each unordered split once
            subs = []
            s = rest
            while True:
                e = s | low
                if e != d:
                    subs.append(e)
                if s == 0:
                    break
                s = (s - 1) & rest
            subs = np.asarray(subs[::-1], dtype=np.int64)
            merged = self.dp[subs] + self.dp[d ^ subs]
            pick = merged.argmin(axis=0)
            best = np.minimum(merged[pick, cols], UNREACHABLE)
            self.split[d] = subs[pick]
            grown = best[:, None] + dist
            via = grown.argmin(axis=0)
            reach = np.minimum(grown[via, cols], UNREACHABLE)
            at_home = best <= reach
            via[at_home] = cols[at_home]
            self.dp[d] = reach
            self.attach[d] = via
        self._trees = {}
        self._answers = {}
        self._index = {t: i for i, t in enumerate(self.terminals)}

    def mask(self, subset):
        m = 0
        for t in subset:
            m |= 1 << self._index[t]
        return m

    def weight(self, mask, v):
        w = int(self.dp[mask, v])
        return INF if w >= UNREACHABLE else w

    def tree_edges(self, mask, v):
        """Edges of the minimum tree spanning subset ``mask`` plus ``v``."""
        key = (mask, v)
        hit = self._trees.get(key)
        if hit is not None:
            return hit
        if self.dp[mask, v] >= UNREACHABLE:
            raise InfeasibleError("subset is not connected to the attachment vertex")
        if mask & (mask - 1) == 0:
            t = self.terminals[mask.bit_length() - 1]
            edges = frozenset(self.graph.path_edges(t, v)) if t != v else frozenset()
        else:
            u = int(self.attach[mask, v])
            e = int(self.split[mask][u])
            edges = self.tree_edges(e, u) | self.tree_edges(mask ^ e, u)
            if u != v:
                edges = edges | frozenset(self.graph.path_edges(u, v))
        self._trees[key] = edges
        return edges

    def steiner_tree(self, subset):
        """Minimum Steiner tree for ``subset`` of the terminal list.

        Infeasible subsets give the ``INF`` marker tree.
        """
        subset = tuple(sorted(set(subset)))
        tree = self._answers.get(subset)
        if tree is not None:
            return tree
        if len(subset) <= 1:
            return SteinerTree(subset)
        if len(subset) - 1 > self.max_size:
            raise CapacityError(f"table holds subsets of at most {self.max_size + 1} terminals")
        anchor = subset[0]
        m = self.mask(subset[1:])
        if self.dp[m, anchor] >= UNREACHABLE:
            tree = SteinerTree.infeasible(subset)
        else:
            tree = SteinerTree.from_edges(subset, self.tree_edges(m, anchor))
            if len(tree.edges) != len(tree.vertices()) - 1:
                tree = prune_to_tree(tree)
        self._answers[subset] = tree
        return tree


def dreyfus_wagner(g, terminals, cap=DW_TERMINAL_CAP):
    """Minimum Steiner tree for ``terminals``; returns ``(tree, table)``."""
    terminals = sorted(set(terminals))
    if not terminals:
        raise ValueError("at least one terminal required")
    if len(terminals) > cap:
        raise CapacityError(f"{len(terminals)} terminals exceed the cap of {cap}")
    for t in terminals:
        if not 0 <= t < g.n:
            raise ValueError(f"terminal {t} not in graph")
    table = DWTable(g, terminals, max_size=len(terminals) - 1)
    tree = table.steiner_tree(terminals)
    if not tree.feasible:
        raise InfeasibleError(f"terminals {terminals} span several components")
    return tree, table


def brute_force_steiner(g, terminals, cap=BRUTE_FORCE_VERTEX_CAP):
    """Exact optimum by trying every vertex superset of the terminals.

    For each superset whose induced subgraph is connected, its minimum
    spanning tree is a candidate; the best candidate is pruned of
    non-terminal leaves.
    """
    if g.n > cap:
        raise CapacityError(f"brute force is limited to {cap} vertices, graph has {g.n}")
    terminals = sorted(set(terminals))
    if len(terminals) <= 1:
        return SteinerTree(tuple(terminals))
    comp = g.components()
    if len({comp[t] for t in terminals}) > 1:
        raise InfeasibleError(f"terminals {terminals} span several components")
    others = [v for v in range(g.n) if v not in set(terminals)]
    base = 0
    for t in terminals:
        base |= 1 << t
    edges = sorted(g.edges(), key=lambda e: (e[2], e[0], e[1]))
    best = None
    for sub in range(1 << len(others)):
        inside = base
        for i, v in enumerate(others):
            if sub >> i & 1:
                inside |= 1 << v
        size = _popcount(inside)
        uf = UnionFind()
        chosen = []
        total = 0
        for e in edges:
            if inside >> e[0] & 1 and inside >> e[1] & 1 and uf.union(e[0], e[1]):
                chosen.append(e)
                total += e[2]
                if len(chosen) == size - 1:
                    break
        if len(chosen) != size - 1:
            continue
        cand = (total, sorted(chosen))
        if best is None or cand < best:
            best = cand
    return prune_to_tree(SteinerTree.from_edges(terminals, best[1]))
