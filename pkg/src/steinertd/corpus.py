"""Seeded generators for connected test instances."""

from __future__ import annotations

import random
from pathlib import Path

from .graph import Graph, write_stp

FAMILIES = ("random-sparse", "grid", "tree-plus-chords")


def _rng(seed, *salt):
    # str seeds hash through SHA-512, stable across runs and platforms
    return random.Random("-".join(str(s) for s in (seed, *salt)))


def _random_tree(rng, n, max_weight):
    return [(v, rng.randrange(v), rng.randint(1, max_weight)) for v in range(1, n)]


def random_sparse(rng, n, extra=None, max_weight=10):
    """Random spanning tree plus ``extra`` random edges (default ``n // 2``)."""
    edges = _random_tree(rng, n, max_weight)
    extra = n // 2 if extra is None else extra
    have = {(min(u, v), max(u, v)) for u, v, _ in edges}
    tries = 0
    while extra > 0 and n > 2 and tries < 20 * n:
        tries += 1
        u, v = rng.sample(range(n), 2)
        key = (min(u, v), max(u, v))
        if key in have:
            continue
        have.add(key)
        edges.append((u, v, rng.randint(1, max_weight)))
        extra -= 1
    return Graph(n, edges)


def grid(rng, rows, cols=None, max_weight=10):
    cols = rows if cols is None else cols
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, rng.randint(1, max_weight)))
            if r + 1 < rows:
                edges.append((v, v + cols, rng.randint(1, max_weight)))
    return Graph(rows * cols, edges)


def tree_plus_chords(rng, n, chords=3, max_weight=10):
    return random_sparse(rng, n, extra=chords, max_weight=max_weight)


def make_graph(family, size, rng, max_weight=10):
    """``size`` is the vertex count, or the side length for ``grid``."""
    if family == "random-sparse":
        return random_sparse(rng, size, max_weight=max_weight)
    if family == "grid":
        return grid(rng, size, max_weight=max_weight)
    if family == "tree-plus-chords":
        return tree_plus_chords(rng, size, max_weight=max_weight)
    raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def instances(seed, family, sizes, count=1, terminals=0):
    """Yield ``(name, graph, terminal_list)`` deterministically."""
    for size in sizes:
        for i in range(count):
            rng = _rng(seed, family, size, i)
            g = make_graph(family, size, rng)
            k = min(terminals, g.n)
            ts = sorted(rng.sample(range(g.n), k)) if k else []
            yield f"{family}-{size:03d}-{i:03d}", g, ts


def gen_corpus(seed, family, sizes, out_dir, count=1, terminals=0):
    """Write one ``.stp`` file per instance; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, g, ts in instances(seed, family, sizes, count, terminals):
        path = out_dir / f"{name}.stp"
        path.write_text(write_stp(g, ts, name=f"{name} seed={seed}"), encoding="utf-8")
        paths.append(path)
    return paths
