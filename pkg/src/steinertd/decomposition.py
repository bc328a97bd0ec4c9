"""Tree decompositions: construction, validation, nice normal form and queries.

Decompositions are rooted. Nodes are dense integers; ``parent[root] == -1``.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .exceptions import DecompositionError

FORMAT_VERSION = 1


class NodeKind(str, enum.Enum):
    LEAF = "leaf"
    INTRODUCE = "introduce"
    FORGET = "forget"
    JOIN = "join"


class TreeDecomposition:
    def __init__(self, bags, parent):
        if len(bags) != len(parent):
            raise DecompositionError("bags and parent links differ in length")
        self.bags = [tuple(sorted(set(b))) for b in bags]
        self.parent = [int(p) for p in parent]
        self.children = [[] for _ in self.bags]
        roots = []
        for x, p in enumerate(self.parent):
            if p == -1:
                roots.append(x)
            elif 0 <= p < len(self.bags) and p != x:
                self.children[p].append(x)
            else:
                raise DecompositionError(f"node {x} has invalid parent {p}")
        if len(roots) != 1:
            raise DecompositionError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        if len(self.preorder()) != len(self.bags):
            raise DecompositionError("parent links contain a cycle")

    def __len__(self):
        return len(self.bags)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.bags == other.bags and self.parent == other.parent

    @property
    def width(self):
        return max((len(b) for b in self.bags), default=0) - 1

    def preorder(self):
        out = []
        stack = [self.root]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
            if len(out) > len(self.bags):
                break
        return out

    @cached_property
    def depth(self):
        depth = [0] * len(self.bags)
        for x in self.preorder():
            if self.parent[x] != -1:
                depth[x] = depth[self.parent[x]] + 1
        return depth

    @property
    def height(self):
        """Longest root-to-leaf path, in edges."""
        return max(self.depth, default=0)

    def tree_edges(self):
        return [(p, x) for x, p in enumerate(self.parent) if p != -1]

    def path(self, a, b):
        """Nodes on the tree path from ``a`` to ``b``, both included."""
        depth = self.depth
        up_a, up_b = [], []
        while depth[a] > depth[b]:
            up_a.append(a)
            a = self.parent[a]
        while depth[b] > depth[a]:
            up_b.append(b)
            b = self.parent[b]
        while a != b:
            up_a.append(a)
            up_b.append(b)
            a, b = self.parent[a], self.parent[b]
        return up_a + [a] + up_b[::-1]


class NiceTreeDecomposition(TreeDecomposition):
    """Tree decomposition whose nodes are leaf, introduce, forget or join.

    ``vertex[x]`` is the introduced or forgotten vertex (``-1`` otherwise).
    """

    def __init__(self, bags, parent):
        super().__init__(bags, parent)
        self.kind = []
        self.vertex = []
        for x, bag in enumerate(self.bags):
            kids = self.children[x]
            if not kids:
                self.kind.append(NodeKind.LEAF)
                self.vertex.append(-1)
            elif len(kids) == 2:
                self.kind.append(NodeKind.JOIN)
                self.vertex.append(-1)
            elif len(kids) == 1:
                mine, theirs = set(bag), set(self.bags[kids[0]])
                if len(mine - theirs) == 1 and theirs <= mine:
                    self.kind.append(NodeKind.INTRODUCE)
                    self.vertex.append((mine - theirs).pop())
                elif len(theirs - mine) == 1 and mine <= theirs:
                    self.kind.append(NodeKind.FORGET)
                    self.vertex.append((theirs - mine).pop())
                else:
                    raise DecompositionError(
                        f"node {x} differs from its child by more than one vertex")
            else:
                raise DecompositionError(f"node {x} has {len(kids)} children")


@dataclass(frozen=True)
class Violation:
    condition: str
    witness: tuple
    message: str


def validate_decomposition(g, td):
    """All failures of vertex coverage (1), edge coverage (2) and
    connectedness (3). Empty list means ``td`` is a tree decomposition of ``g``."""
    found = []
    holders = [[] for _ in range(g.n)]
    for x, bag in enumerate(td.bags):
        for v in bag:
            if not 0 <= v < g.n:
                found.append(Violation("bag", (x, v), f"bag {x} holds unknown vertex {v}"))
            else:
                holders[v].append(x)
    for v in range(g.n):
        if not holders[v]:
            found.append(Violation("1", (v,), f"vertex {v} is in no bag"))
    bag_sets = [set(b) for b in td.bags]
    for u, v, _ in g.edges():
        if not any(v in bag_sets[x] for x in holders[u]):
            found.append(Violation("2", (u, v), f"edge ({u}, {v}) is in no bag"))
    for v in range(g.n):
        nodes = holders[v]
        if len(nodes) <= 1:
            continue
        inside = set(nodes)
        # each holder except one must have its parent inside too
        tops = [x for x in nodes if td.parent[x] not in inside]
        if len(tops) > 1:
            found.append(Violation(
                "3", (v, tops[0], tops[1]),
                f"bags holding vertex {v} are disconnected (nodes {tops[0]} and {tops[1]})"))
    return found


def validate_nice(ntd):
    """Structural equations of every nice node."""
    found = []
    for x in range(len(ntd)):
        kids = ntd.children[x]
        bag = set(ntd.bags[x])
        kind = ntd.kind[x]
        if kind is NodeKind.JOIN:
            if len(kids) != 2 or any(set(ntd.bags[c]) != bag for c in kids):
                found.append(Violation("nice", (x,), f"join node {x} children bags differ"))
        elif kind is NodeKind.INTRODUCE:
            if len(kids) != 1 or bag != set(ntd.bags[kids[0]]) | {ntd.vertex[x]} \
                    or ntd.vertex[x] in ntd.bags[kids[0]]:
                found.append(Violation("nice", (x,), f"introduce node {x} malformed"))
        elif kind is NodeKind.FORGET:
            if len(kids) != 1 or bag | {ntd.vertex[x]} != set(ntd.bags[kids[0]]) \
                    or ntd.vertex[x] in bag:
                found.append(Violation("nice", (x,), f"forget node {x} malformed"))
        elif kids:
            found.append(Violation("nice", (x,), f"leaf node {x} has children"))
    return found


# -- construction -----------------------------------------------------------

def elimination_order(g, heuristic="min-degree"):
    """Greedy elimination ordering; ties go to the smallest vertex id."""
    if heuristic not in ("min-degree", "min-fill"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    remaining = set(range(g.n))
    order = []
    later = []

    def fill(v):
        nb = sorted(adj[v])
        return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])

    score = (lambda v: len(adj[v])) if heuristic == "min-degree" else fill
    while remaining:
        v = min(remaining, key=lambda x: (score(x), x))
        nb = adj[v]
        later.append(set(nb))
        for a in nb:
            adj[a].update(nb)
            adj[a].discard(a)
            adj[a].discard(v)
        remaining.discard(v)
        order.append(v)
    return order, later


def decompose(g, heuristic="min-degree"):
    """Heuristic tree decomposition from a greedy elimination ordering.

    Bags that are subsets of a neighbouring bag are contracted away; the result
    is rooted at the first node whose bag holds vertex 0.
    """
    if g.n < 1:
        raise ValueError("cannot decompose an empty graph")
    order, later = elimination_order(g, heuristic)
    pos = {v: i for i, v in enumerate(order)}
    bags = {v: frozenset(later[i]) | {v} for i, v in enumerate(order)}
    nbrs = {v: set() for v in order}
    roots = []
    for i, v in enumerate(order):
        if later[i]:
            p = min(later[i], key=pos.__getitem__)
            nbrs[v].add(p)
            nbrs[p].add(v)
        else:
            roots.append(v)
    for r in roots[:-1]:
        nbrs[r].add(roots[-1])
        nbrs[roots[-1]].add(r)

    changed = True
    while changed:
        changed = False
        for a in order:
            if a not in nbrs:
                continue
            host = min((b for b in nbrs[a] if bags[a] <= bags[b]), key=pos.__getitem__,
                       default=None)
            if host is None:
                continue
            for c in nbrs.pop(a):
                nbrs[c].discard(a)
                if c != host:
                    nbrs[c].add(host)
                    nbrs[host].add(c)
            changed = True

    alive = sorted(nbrs, key=pos.__getitem__)
    root = next(a for a in alive if 0 in bags[a])
    ids = {root: 0}
    parent = [-1]
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in sorted(nbrs[a], key=pos.__getitem__):
            if b not in ids:
                ids[b] = len(parent)
                parent.append(ids[a])
                queue.append(b)
    ordered = sorted(ids, key=ids.__getitem__)
    return TreeDecomposition([bags[a] for a in ordered], parent)


def to_nice(td):
    """Equivalent nice tree decomposition of the same width.

    Leaves keep their bags. Between a parent bag and a child bag a chain is
    inserted; walking down from the parent, vertices only the parent holds are
    dropped first, then the child's own vertices are added, each in ascending
    order. A node with k > 2 children becomes a left-deep chain of joins.
    """
    bags = []
    parent = []

    def new(bag, p):
        bags.append(frozenset(bag))
        parent.append(p)
        return len(bags) - 1

    def bridge(top, above, below):
        cur = set(above)
        for v in sorted(above - below):
            cur.discard(v)
            top = new(cur, top)
        for v in sorted(below - above):
            cur.add(v)
            top = new(cur, top)
        return top

    root = new(td.bags[td.root], -1)
    work = [(td.root, root)]
    while work:
        x, nid = work.pop()
        here = frozenset(td.bags[x])
        kids = td.children[x]
        while len(kids) == 1 and frozenset(td.bags[kids[0]]) == here:
            x = kids[0]
            kids = td.children[x]
        if not kids:
            continue
        if len(kids) == 1:
            slots = [nid]
        else:
            slots = []
            join = nid
            for i in range(len(kids) - 1):
                slots.append(new(here, join))
                if i < len(kids) - 2:
                    join = new(here, join)
                else:
                    slots.append(new(here, join))
        pending = []
        for slot, kid in zip(slots, kids):
            below = frozenset(td.bags[kid])
            if below == here:
                pending.append((kid, slot))
            else:
                pending.append((kid, bridge(slot, here, below)))
        work.extend(reversed(pending))
    return NiceTreeDecomposition(bags, parent)


# -- queries ----------------------------------------------------------------

def induced_roots(ntd, n=None):
    """For every vertex, the node nearest the root whose bag holds it."""
    best = {}
    depth = ntd.depth
    for x, bag in enumerate(ntd.bags):
        for v in bag:
            if v not in best or depth[x] < depth[best[v]]:
                best[v] = x
    if n is None:
        n = max(best, default=-1) + 1
    missing = [v for v in range(n) if v not in best]
    if missing:
        raise DecompositionError(f"vertices {missing[:5]} appear in no bag")
    return [best[v] for v in range(n)]


def lca(ntd, nodes):
    nodes = list(nodes)
    if not nodes:
        raise ValueError("lca of an empty node set")
    depth, parent = ntd.depth, ntd.parent
    a = nodes[0]
    for b in nodes[1:]:
        while depth[a] > depth[b]:
            a = parent[a]
        while depth[b] > depth[a]:
            b = parent[b]
        while a != b:
            a, b = parent[a], parent[b]
    return a


def is_separator(g, c, u, v):
    """True when every ``u``-``v`` path in ``g`` meets ``c``.

    An endpoint inside ``c`` counts as separated.
    """
    c = set(c)
    if u in c or v in c:
        return True
    if u == v:
        return False
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y, _ in g.adj[x]:
            if y == v:
                return False
            if y not in seen and y not in c:
                seen.add(y)
                queue.append(y)
    return True


# -- text format ------------------------------------------------------------

def write_td(td, n_vertices):
    """PACE-style ``.td`` text; 1-based node ids and vertices.

    Nice decompositions get one ``k`` line per node with its kind.
    """
    lines = [f"c steinertd-td version {FORMAT_VERSION}",
             f"s td {len(td)} {td.width + 1} {n_vertices}",
             f"r {td.root + 1}"]
    for x, bag in enumerate(td.bags):
        lines.append(" ".join(["b", str(x + 1), *(str(v + 1) for v in bag)]))
    for p, x in sorted(td.tree_edges()):
        lines.append(f"e {p + 1} {x + 1}")
    if isinstance(td, NiceTreeDecomposition):
        for x in range(len(td)):
            kind = td.kind[x]
            if kind in (NodeKind.INTRODUCE, NodeKind.FORGET):
                lines.append(f"k {x + 1} {kind.value} {td.vertex[x] + 1}")
            else:
                lines.append(f"k {x + 1} {kind.value}")
    return "\n".join(lines) + "\n"


def read_td(text):
    """Parse :func:`write_td` output. Returns ``(td, n_vertices)``.

    Plain PACE files (no ``r`` line, unrooted ``u v`` edges) are rooted at node 1.
    """
    header = None
    root = 0
    bags = {}
    edges = []
    kinds = False
    version = None
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.split()
        if not tok:
            continue
        try:
            if tok[0] == "c":
                if len(tok) >= 4 and tok[1] == "steinertd-td":
                    version = int(tok[3])
                    if version != FORMAT_VERSION:
                        raise DecompositionError(f"unsupported td version {version}")
            elif tok[0] == "s":
                header = (int(tok[2]), int(tok[3]), int(tok[4]))
            elif tok[0] == "r":
                root = int(tok[1]) - 1
            elif tok[0] == "b":
                bags[int(tok[1]) - 1] = [int(v) - 1 for v in tok[2:]]
            elif tok[0] == "e":
                edges.append((int(tok[1]) - 1, int(tok[2]) - 1))
            elif tok[0] == "k":
                kinds = True
            elif len(tok) == 2:
                edges.append((int(tok[0]) - 1, int(tok[1]) - 1))
            else:
                raise DecompositionError(f"line {lineno}: unrecognised {line!r}")
        except (ValueError, IndexError):
            raise DecompositionError(f"line {lineno}: malformed {line!r}") from None
    if header is None:
        raise DecompositionError("missing 's td' header")
    count, _, n_vertices = header
    if sorted(bags) != list(range(count)):
        raise DecompositionError("bag ids are not 1..N")
    nbrs = [[] for _ in range(count)]
    for a, b in edges:
        nbrs[a].append(b)
        nbrs[b].append(a)
    parent = [None] * count
    parent[root] = -1
    queue = deque([root])
    while queue:
        a = queue.popleft()
        for b in sorted(nbrs[a]):
            if parent[b] is None:
                parent[b] = a
                queue.append(b)
    if any(p is None for p in parent) or len(edges) != count - 1:
        raise DecompositionError("tree edges do not form a spanning tree")
    bag_list = [bags[x] for x in range(count)]
    cls = NiceTreeDecomposition if kinds else TreeDecomposition
    return cls(bag_list, parent), n_vertices
