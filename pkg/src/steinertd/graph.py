"""Weighted undirected graphs, Steiner trees and the small algebra over them.

Edge weights are exact integers. Rational input weights are brought to a
common denominator at parse time; ``Graph.scale`` records the factor so that
results can be reported in the original units.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .exceptions import InfeasibleError, StpSyntaxError

INF = math.inf
# Sentinel for "no path" inside int64 arrays. Two of them still add without overflow.
UNREACHABLE = 2 ** 60
_MAX_TOTAL_WEIGHT = 2 ** 52


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def find(self, x):
        parent = self.parent
        root = parent.setdefault(x, x)
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


class Graph:
    """Undirected simple graph on vertices ``0..n-1`` with positive integer weights.

    Duplicate edges keep the smallest weight. ``labels[v]`` is the name the
    vertex had in the input file (1-based for STP files).
    """

    def __init__(self, n, edges=(), labels=None, scale=1):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = int(n)
        self.scale = int(scale)
        self.labels = list(labels) if labels is not None else list(range(n))
        if len(self.labels) != self.n:
            raise ValueError("one label per vertex required")
        weights = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), int(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if w <= 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            old = weights.get(key)
            if old is None or w < old:
                weights[key] = w
        self._weights = dict(sorted(weights.items()))
        adj = [[] for _ in range(self.n)]
        for (u, v), w in self._weights.items():
            adj[u].append((v, w))
            adj[v].append((u, w))
        for row in adj:
            row.sort()
        self.adj = [tuple(row) for row in adj]

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges}, scale={self.scale})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.scale, self._weights) == (other.n, other.scale, other._weights)

    def __hash__(self):
        return hash(self.digest)

    @property
    def num_edges(self):
        return len(self._weights)

    def edges(self):
        """Edges as ``(u, v, w)`` with ``u < v``, sorted."""
        return [(u, v, w) for (u, v), w in self._weights.items()]

    def weight(self, u, v):
        return self._weights[(u, v) if u < v else (v, u)]

    def has_edge(self, u, v):
        return ((u, v) if u < v else (v, u)) in self._weights

    def neighbors(self, v):
        return [u for u, _ in self.adj[v]]

    def total_weight(self):
        return sum(self._weights.values())

    def scaled(self, factor):
        """Copy with every weight multiplied by the positive integer ``factor``."""
        if factor <= 0 or int(factor) != factor:
            raise ValueError("scale factor must be a positive integer")
        return Graph(self.n, [(u, v, w * factor) for u, v, w in self.edges()],
                     self.labels, self.scale)

    def components(self):
        """Component index per vertex."""
        uf = UnionFind(range(self.n))
        for u, v in self._weights:
            uf.union(u, v)
        return [uf.find(v) for v in range(self.n)]

    def is_connected(self):
        return self.n <= 1 or len(set(self.components())) == 1

    @cached_property
    def digest(self):
        """SHA-256 over the canonical edge list; 32 bytes."""
        h = hashlib.sha256()
        h.update(f"steinertd-graph n={self.n} scale={self.scale}\n".encode())
        for (u, v), w in self._weights.items():
            h.update(f"{u} {v} {w}\n".encode())
        return h.digest()

    @property
    def hexdigest(self):
        return self.digest.hex()

    @cached_property
    def all_pairs(self):
        """``(dist, pred)`` int64 matrices; ``pred[s, v]`` is the predecessor of
        ``v`` on the chosen shortest ``s``-``v`` path (smallest id among ties),
        ``-1`` on the diagonal or when unreachable."""
        n = self.n
        if self.total_weight() >= _MAX_TOTAL_WEIGHT:
            raise OverflowError("total edge weight too large for exact dense shortest paths")
        edges = self.edges()
        if edges:
            rows, cols, vals = zip(*edges)
        else:
            rows, cols, vals = (), (), ()
        mat = csr_matrix((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(n, n))
        raw = dijkstra(mat, directed=False)
        finite = np.isfinite(raw)
        dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
        dist[finite] = raw[finite].astype(np.int64)
        pred = np.full((n, n), n, dtype=np.int64)
        if edges:
            e = np.asarray(edges, dtype=np.int64)
            tails = np.concatenate([e[:, 0], e[:, 1]])
            heads = np.concatenate([e[:, 1], e[:, 0]])
            ws = np.concatenate([e[:, 2], e[:, 2]])
            # arc tail->head is tight for source s when dist[s,tail] + w == dist[s,head]
            tight = (dist[:, tails] + ws == dist[:, heads]) & (dist[:, heads] < UNREACHABLE)
            src, arc = np.nonzero(tight)
            np.minimum.at(pred, (src, heads[arc]), tails[arc])
        pred[pred == n] = -1
        np.fill_diagonal(pred, -1)
        dist.setflags(write=False)
        pred.setflags(write=False)
        return dist, pred

    def path_edges(self, s, t):
        """Edges of the canonical shortest ``s``-``t`` path (via ``all_pairs``)."""
        dist, pred = self.all_pairs
        if dist[s, t] >= UNREACHABLE:
            raise InfeasibleError(f"vertices {s} and {t} are not connected")
        out = []
        v = t
        while v != s:
            u = int(pred[s, v])
            out.append(_edge(u, v, self.weight(u, v)))
            v = u
        return out


def _edge(u, v, w):
    return (u, v, w) if u < v else (v, u, w)


@dataclass(frozen=True)
class SteinerTree:
    """A tree spanning ``terminals``. ``weight`` is ``INF`` for the infeasible marker."""

    terminals: tuple
    edges: tuple = ()
    weight: float = 0

    @classmethod
    def from_edges(cls, terminals, edges):
        edges = tuple(sorted(set(edges)))
        return cls(tuple(sorted(set(terminals))), edges, sum(e[2] for e in edges))

    @classmethod
    def infeasible(cls, terminals):
        return cls(tuple(sorted(set(terminals))), (), INF)

    @property
    def feasible(self):
        return self.weight != INF

    def vertices(self):
        out = set(self.terminals)
        for u, v, _ in self.edges:
            out.add(u)
            out.add(v)
        return out

    def edge_pairs(self):
        return [(u, v) for u, v, _ in self.edges]

    def problems(self):
        """Reasons this is not a valid tree spanning its terminals; empty if valid."""
        if not self.feasible:
            return ["infeasible marker"]
        found = []
        if self.weight != sum(e[2] for e in self.edges):
            found.append("weight differs from edge sum")
        verts = self.vertices()
        if len(self.terminals) <= 1 and not self.edges:
            return found
        if len(self.edges) != len(verts) - 1:
            found.append(f"{len(self.edges)} edges on {len(verts)} vertices")
        uf = UnionFind(verts)
        for u, v, _ in self.edges:
            if not uf.union(u, v):
                found.append(f"cycle through ({u}, {v})")
                break
        if len({uf.find(v) for v in verts}) > 1:
            found.append("disconnected")
        return found

    def is_valid(self):
        return not self.problems()


@dataclass(frozen=True)
class Subgraph:
    """Union of trees; may contain cycles, or be disconnected (``disconnected``)."""

    terminals: tuple
    edges: tuple
    weight: float
    disconnected: bool = field(default=False)

    def vertices(self):
        out = set(self.terminals)
        for u, v, _ in self.edges:
            out.add(u)
            out.add(v)
        return out


def graph_union(t1, t2):
    shared = bool(t1.vertices() & t2.vertices())
    edges = tuple(sorted(set(t1.edges) | set(t2.edges)))
    terminals = tuple(sorted(set(t1.terminals) | set(t2.terminals)))
    return Subgraph(terminals, edges, sum(e[2] for e in edges), disconnected=not shared)


def prune_to_tree(sub, terminals=None):
    """Minimum spanning tree of ``sub`` with non-terminal leaves stripped.

    ``terminals`` defaults to ``sub.terminals``; passing a subset lets the
    caller drop vertices the union picked up only as connectors.
    """
    terminals = tuple(sorted(set(sub.terminals if terminals is None else terminals)))
    if len(terminals) <= 1:
        return SteinerTree(terminals)
    uf = UnionFind()
    kept = []
    for e in sorted(sub.edges, key=lambda e: (e[2], e[0], e[1])):
        if uf.union(e[0], e[1]):
            kept.append(e)
    root = uf.find(terminals[0])
    if any(uf.find(t) != root for t in terminals[1:]):
        raise InfeasibleError(f"candidate does not connect terminals {terminals}")
    kept = [e for e in kept if uf.find(e[0]) == root]

    keep_set = set(terminals)
    degree = {}
    incident = {}
    for e in kept:
        for x in e[:2]:
            degree[x] = degree.get(x, 0) + 1
            incident.setdefault(x, []).append(e)
    alive = set(kept)
    stack = [x for x, d in degree.items() if d == 1 and x not in keep_set]
    while stack:
        x = stack.pop()
        if degree[x] != 1:
            continue
        for e in incident[x]:
            if e in alive:
                alive.discard(e)
                degree[x] -= 1
                y = e[1] if e[0] == x else e[0]
                degree[y] -= 1
                if degree[y] == 1 and y not in keep_set:
                    stack.append(y)
                break
    return SteinerTree.from_edges(terminals, alive)


def _dijkstra(g, source):
    dist = [INF] * g.n
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in g.adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def shortest_path(g, u, v):
    """Minimum-weight ``u``-``v`` path as a two-terminal SteinerTree.

    Among equal-weight paths, each vertex is reached from its smallest tight
    predecessor, walking back from ``v``.
    """
    if u == v:
        raise ValueError("shortest_path needs two distinct vertices")
    dist = _dijkstra(g, u)
    if dist[v] == INF:
        raise InfeasibleError(f"vertices {u} and {v} are not connected")
    edges = []
    x = v
    while x != u:
        p = min(y for y, w in g.adj[x] if dist[y] + w == dist[x])
        edges.append(_edge(p, x, g.weight(p, x)))
        x = p
    return SteinerTree.from_edges((u, v), edges)


# -- file formats -----------------------------------------------------------

def _parse_weight(token, lineno):
    try:
        w = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise StpSyntaxError(f"bad weight {token!r}", lineno) from None
    if w <= 0:
        raise StpSyntaxError(f"non-positive weight {token}", lineno)
    return w


def _scale_weights(raw):
    scale = 1
    for _, _, w in raw:
        scale = math.lcm(scale, w.denominator)
    return [(u, v, int(w * scale)) for u, v, w in raw], scale


def parse_stp(text):
    """Parse SteinLib STP text. Returns ``(graph, terminals)``.

    File node ``i`` becomes vertex ``i - 1``; terminals keep their file order.
    """
    section = None
    n = None
    declared_edges = None
    declared_terminals = None
    raw = []
    terminals = []
    seen_eof = False
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        head = tokens[0].upper()
        if seen_eof:
            break
        if section is None:
            if head == "SECTION":
                if len(tokens) < 2:
                    raise StpSyntaxError("SECTION without a name", lineno)
                section = tokens[1].upper()
            elif head == "EOF":
                seen_eof = True
            elif lineno == 1 and "STP" in line.upper():
                continue
            else:
                raise StpSyntaxError(f"unexpected {tokens[0]!r} outside a section", lineno)
            continue
        if head == "END":
            section = None
            continue
        if section == "GRAPH":
            try:
                if head == "NODES":
                    n = int(tokens[1])
                elif head == "EDGES":
                    declared_edges = int(tokens[1])
                elif head == "E":
                    if n is None:
                        raise StpSyntaxError("edge before Nodes declaration", lineno)
                    u, v = int(tokens[1]), int(tokens[2])
                    if not (1 <= u <= n and 1 <= v <= n):
                        raise StpSyntaxError(f"node index out of range 1..{n}", lineno)
                    if u == v:
                        raise StpSyntaxError(f"self-loop on node {u}", lineno)
                    raw.append((u - 1, v - 1, _parse_weight(tokens[3], lineno)))
                elif head in ("A", "ARCS"):
                    raise StpSyntaxError("directed arcs are not supported", lineno)
                else:
                    raise StpSyntaxError(f"unknown graph keyword {tokens[0]!r}", lineno)
            except (IndexError, ValueError) as exc:
                if isinstance(exc, StpSyntaxError):
                    raise
                raise StpSyntaxError(f"malformed line {line.strip()!r}", lineno) from None
        elif section == "TERMINALS":
            try:
                if head == "TERMINALS":
                    declared_terminals = int(tokens[1])
                elif head == "T":
                    t = int(tokens[1])
                    if n is None or not 1 <= t <= n:
                        raise StpSyntaxError(f"terminal {t} out of range", lineno)
                    terminals.append(t - 1)
                elif head == "ROOT":
                    continue
                else:
                    raise StpSyntaxError(f"unknown terminals keyword {tokens[0]!r}", lineno)
            except (IndexError, ValueError) as exc:
                if isinstance(exc, StpSyntaxError):
                    raise
                raise StpSyntaxError(f"malformed line {line.strip()!r}", lineno) from None
        # other sections (Comment, Coordinates, Presolve, ...) are skipped
    if section is not None:
        raise StpSyntaxError(f"section {section} not closed with END")
    if n is None:
        raise StpSyntaxError("missing Nodes declaration")
    if declared_edges is not None and declared_edges != len(raw):
        raise StpSyntaxError(f"declared {declared_edges} edges, found {len(raw)}")
    if declared_terminals is not None and declared_terminals != len(terminals):
        raise StpSyntaxError(f"declared {declared_terminals} terminals, found {len(terminals)}")
    edges, scale = _scale_weights(raw)
    return Graph(n, edges, labels=range(1, n + 1), scale=scale), terminals


def parse_edges(text):
    """Parse ``u v w`` lines (``#`` comments). Vertex labels are integers,
    renumbered densely in ascending order."""
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise StpSyntaxError(f"expected 'u v w', got {line!r}", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise StpSyntaxError(f"bad vertex label in {line!r}", lineno) from None
        if u == v:
            raise StpSyntaxError(f"self-loop on vertex {u}", lineno)
        raw.append((u, v, _parse_weight(tokens[2], lineno)))
    labels = sorted({x for u, v, _ in raw for x in (u, v)})
    index = {lab: i for i, lab in enumerate(labels)}
    edges, scale = _scale_weights([(index[u], index[v], w) for u, v, w in raw])
    return Graph(len(labels), edges, labels=labels, scale=scale)


def load_graph(path):
    """Read ``.stp`` or ``.edges``; returns ``(graph, terminals)``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix == ".stp":
        return parse_stp(text)
    if suffix == ".edges":
        return parse_edges(text), []
    raise ValueError(f"unknown graph format {path.suffix!r} (expected .stp or .edges)")


def format_weight(g, weight):
    """Weight in original input units, exact."""
    if weight == INF:
        return "inf"
    return str(Fraction(weight, g.scale))


def write_stp(g, terminals=(), name=None):
    if g.scale != 1:
        weight = lambda w: str(Fraction(w, g.scale))  # noqa: E731
    else:
        weight = str
    lines = ["33D32945 STP File, STP Format Version 1.0", ""]
    if name:
        lines += ["SECTION Comment", f'Name "{name}"', "END", ""]
    lines += ["SECTION Graph", f"Nodes {g.n}", f"Edges {g.num_edges}"]
    lines += [f"E {u + 1} {v + 1} {weight(w)}" for u, v, w in g.edges()]
    lines += ["END", ""]
    if terminals:
        lines += ["SECTION Terminals", f"Terminals {len(terminals)}"]
        lines += [f"T {t + 1}" for t in terminals]
        lines += ["END", ""]
    lines.append("EOF")
    return "\n".join(lines) + "\n"
