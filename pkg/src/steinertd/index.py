"""Offline index: per-bag tables of optimal Steiner trees and their file format.

Every node of a nice tree decomposition gets a table mapping each subset of
its bag with 2..l vertices to the minimum Steiner tree *in the whole graph*.
Nodes with identical bags share one table. Tables are read off Dreyfus-Wagner
runs; each run is made on a bag that is maximal among its neighbours, so the
many intermediate bags of introduce/forget chains cost nothing extra.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .decomposition import NiceTreeDecomposition, NodeKind, induced_roots
from .exceptions import CapacityError, GraphHashMismatch, IndexFormatError
from .graph import INF, SteinerTree
from .oracle import DW_TERMINAL_CAP, DWTable

MAGIC = b"STDX"
VERSION = 1

_KIND_CODE = {NodeKind.LEAF: 0, NodeKind.INTRODUCE: 1, NodeKind.FORGET: 2, NodeKind.JOIN: 3}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


@dataclass
class BagTable:
    node_id: int
    bag: tuple
    entries: dict = field(repr=False)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key):
        return self.entries[tuple(sorted(key))]


def build_bag_table(g, bag, l, node_id=-1, dw=None):
    """Optimal trees for all subsets of ``bag`` with 2..l vertices.

    ``dw`` may be a :class:`DWTable` over any superset of ``bag`` holding
    subsets of at least ``l - 1`` terminals; by default one is built.
    """
    if l < 2:
        raise ValueError("l must be at least 2")
    bag = tuple(sorted(set(bag)))
    for v in bag:
        if not 0 <= v < g.n:
            raise ValueError(f"bag vertex {v} not in graph")
    if dw is None:
        if len(bag) > DW_TERMINAL_CAP:
            raise CapacityError(
                f"bag of {len(bag)} vertices exceeds the Dreyfus-Wagner cap of "
                f"{DW_TERMINAL_CAP}; use a narrower decomposition")
        dw = DWTable(g, bag, max_size=l - 1)
    entries = {}
    for k in range(2, min(l, len(bag)) + 1):
        for key in combinations(bag, k):
            entries[key] = dw.steiner_tree(key)
    return BagTable(node_id, bag, entries)


def _owners(ntd):
    """For each node, a node with a bag containing its bag and no strictly
    larger bag next to it along introduce/forget links."""
    owner = [None] * len(ntd)
    for x in range(len(ntd)):
        chain = []
        y = x
        while owner[y] is None:
            chain.append(y)
            p = ntd.parent[y]
            if ntd.kind[y] is NodeKind.FORGET:
                y = ntd.children[y][0]
            elif p != -1 and ntd.kind[p] is NodeKind.INTRODUCE:
                y = p
            else:
                owner[y] = y
                chain.pop()
                break
        for z in chain:
            owner[z] = owner[y]
    return owner


@dataclass(eq=False)
class SteinerIndex:
    graph_hash: bytes
    ntd: NiceTreeDecomposition
    roots: list
    l: int
    tables: list
    n_vertices: int

    @property
    def width(self):
        return self.ntd.width

    @property
    def height(self):
        return self.ntd.height

    @property
    def entry_count(self):
        return sum(len(t) for t in self.tables)

    def entry_bound(self):
        """Number of subsets with 2..l vertices summed over all bags."""
        return sum(comb(len(b), k) for b in self.ntd.bags for k in range(2, self.l + 1))

    def infeasible_count(self):
        return sum(1 for t in self.tables for tree in t.entries.values() if not tree.feasible)

    def __eq__(self, other):
        if not isinstance(other, SteinerIndex):
            return NotImplemented
        return (self.graph_hash == other.graph_hash and self.l == other.l
                and self.n_vertices == other.n_vertices and self.ntd == other.ntd
                and self.roots == other.roots
                and all(a.bag == b.bag and a.entries == b.entries
                        for a, b in zip(self.tables, other.tables)))


def build_index(g, ntd, l):
    if l < 2:
        raise ValueError("l must be at least 2")
    owner = _owners(ntd)
    by_bag = {}
    dw_cache = {}
    tables = []
    for x, bag in enumerate(ntd.bags):
        entries = by_bag.get(bag)
        if entries is None:
            top = ntd.bags[owner[x]]
            dw = dw_cache.get(top)
            if dw is None:
                if len(top) > DW_TERMINAL_CAP:
                    raise CapacityError(
                        f"bag of {len(top)} vertices exceeds the Dreyfus-Wagner cap of "
                        f"{DW_TERMINAL_CAP}; use a narrower decomposition")
                dw = dw_cache[top] = DWTable(g, top, max_size=l - 1)
            entries = by_bag[bag] = build_bag_table(g, bag, l, dw=dw).entries
        tables.append(BagTable(x, bag, entries))
    return SteinerIndex(g.digest, ntd, induced_roots(ntd, g.n), l, tables, g.n)


# -- binary format ----------------------------------------------------------
#
# header : "STDX" u16 version, 32-byte graph hash, u32 l, u32 width, u32 height,
#          u32 node count, u32 vertex count, u32 root
# node   : i32 parent, u8 kind, i32 kind vertex, u32 bag size, u32 * bag,
#          u8 mode (0 inline / 1 same table as an earlier node)
#          mode 1 : u32 node id
#          mode 0 : u32 record count, then per record u32 byte length + payload
# record : u8 key size, u32 * key, u8 feasible, i64 weight, u32 edge count,
#          (u32 u, u32 v, i64 w) * edge count
# all little-endian

_HEADER = struct.Struct("<4sH32sIIIIII")


def _pack_record(key, tree):
    out = [struct.pack("<B", len(key)), struct.pack(f"<{len(key)}I", *key)]
    feasible = tree.feasible
    out.append(struct.pack("<Bq", int(feasible), tree.weight if feasible else 0))
    out.append(struct.pack("<I", len(tree.edges)))
    for u, v, w in tree.edges:
        out.append(struct.pack("<IIq", u, v, w))
    return b"".join(out)


def save_index(idx):
    buf = io.BytesIO()
    ntd = idx.ntd
    buf.write(_HEADER.pack(MAGIC, VERSION, idx.graph_hash, idx.l, idx.width, idx.height,
                           len(ntd), idx.n_vertices, ntd.root))
    first_with = {}
    for x, table in enumerate(idx.tables):
        bag = ntd.bags[x]
        buf.write(struct.pack("<iBiI", ntd.parent[x], _KIND_CODE[ntd.kind[x]],
                              ntd.vertex[x], len(bag)))
        buf.write(struct.pack(f"<{len(bag)}I", *bag))
        ref = first_with.get(id(table.entries))
        if ref is not None:
            buf.write(struct.pack("<BI", 1, ref))
            continue
        first_with[id(table.entries)] = x
        buf.write(struct.pack("<BI", 0, len(table.entries)))
        for key in sorted(table.entries):
            rec = _pack_record(key, table.entries[key])
            buf.write(struct.pack("<I", len(rec)))
            buf.write(rec)
    return buf.getvalue()


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IndexFormatError(f"index truncated at byte {self.pos}")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def count(self, fmt, unit):
        (n,) = self.take(fmt)
        if n * unit > len(self.data) - self.pos:
            raise IndexFormatError(f"length field {n} at byte {self.pos} exceeds the data")
        return n


def _unpack_record(payload):
    r = _Reader(payload)
    k = r.count("<B", 4)
    key = r.take(f"<{k}I")
    feasible, weight = r.take("<Bq")
    m = r.count("<I", 16)
    edges = tuple(r.take("<IIq") for _ in range(m))
    if r.pos != len(payload):
        raise IndexFormatError("record length does not match its contents")
    if feasible:
        tree = SteinerTree(tuple(key), edges, weight)
    else:
        tree = SteinerTree(tuple(key), (), INF)
    return tuple(key), tree


def load_index(data, g):
    """Parse :func:`save_index` output and check it belongs to ``g``."""
    r = _Reader(data)
    magic, version, digest, l, width, height, count, n_vertices, root = r.take(_HEADER.format)
    if magic != MAGIC:
        raise IndexFormatError(f"not an index file (magic {magic!r})")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version} (expected {VERSION})")
    if digest != g.digest:
        raise GraphHashMismatch(digest.hex(), g.hexdigest)
    if count > len(data):
        raise IndexFormatError(f"node count {count} exceeds the data")
    bags, parents, kinds, entry_maps = [], [], [], []
    for x in range(count):
        parent, kind, vertex, size = r.take("<iBiI")
        if kind not in _CODE_KIND:
            raise IndexFormatError(f"node {x}: bad kind code {kind}")
        if size * 4 > len(data) - r.pos:
            raise IndexFormatError(f"node {x}: bag size {size} exceeds the data")
        bags.append(r.take(f"<{size}I"))
        parents.append(parent)
        kinds.append((_CODE_KIND[kind], vertex))
        (mode,) = r.take("<B")
        if mode == 1:
            (ref,) = r.take("<I")
            if ref >= x:
                raise IndexFormatError(f"node {x}: table reference {ref} is not earlier")
            entry_maps.append(entry_maps[ref])
        elif mode == 0:
            n_rec = r.count("<I", 4)
            entries = {}
            for _ in range(n_rec):
                size = r.count("<I", 1)
                payload = bytes(r.data[r.pos:r.pos + size])
                r.pos += size
                key, tree = _unpack_record(payload)
                entries[key] = tree
            entry_maps.append(entries)
        else:
            raise IndexFormatError(f"node {x}: bad table mode {mode}")
    if r.pos != len(r.data):
        raise IndexFormatError(f"{len(r.data) - r.pos} trailing bytes after the last node")
    try:
        ntd = NiceTreeDecomposition(bags, parents)
    except Exception as exc:
        raise IndexFormatError(f"stored decomposition is invalid: {exc}") from None
    if ntd.root != root or ntd.width != width or ntd.height != height:
        raise IndexFormatError("header metadata disagrees with the stored decomposition")
    if [(ntd.kind[x], ntd.vertex[x]) for x in range(count)] != kinds:
        raise IndexFormatError("stored node kinds disagree with the bags")
    tables = [BagTable(x, ntd.bags[x], entry_maps[x]) for x in range(count)]
    return SteinerIndex(digest, ntd, induced_roots(ntd, n_vertices), l, tables, n_vertices)


def dump_json(idx, indent=None):
    """The index content as JSON text, for debugging."""
    ntd = idx.ntd
    nodes = []
    for x, table in enumerate(idx.tables):
        nodes.append({
            "id": x,
            "parent": ntd.parent[x],
            "kind": ntd.kind[x].value,
            "vertex": ntd.vertex[x],
            "bag": list(ntd.bags[x]),
            "table": [
                {"key": list(key),
                 "weight": tree.weight if tree.feasible else None,
                 "edges": [list(e) for e in tree.edges]}
                for key, tree in sorted(table.entries.items())
            ],
        })
    doc = {
        "format": "steinertd-index", "version": VERSION,
        "graph_hash": idx.graph_hash.hex(), "l": idx.l, "width": idx.width,
        "height": idx.height, "nodes": len(ntd), "vertices": idx.n_vertices,
        "root": ntd.root, "entries": idx.entry_count, "tables": nodes,
    }
    return json.dumps(doc, indent=indent)
