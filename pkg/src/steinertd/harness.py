"""Verification and benchmark runs over instance collections."""

from __future__ import annotations

import csv
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, field, fields

from .decomposition import decompose, to_nice
from .index import build_index, save_index
from .oracle import BRUTE_FORCE_VERTEX_CAP, brute_force_steiner, dreyfus_wagner
from .query import query


@dataclass
class BenchRecord:
    instance: str
    n_vertices: int
    n_edges: int
    width: int
    height: int
    n_terminals: int
    build_ms: float
    index_bytes: int
    query_ms: float
    stvs_calls: int
    oracle_ms: float
    engine_weight: int
    oracle_weight: int


BENCH_FIELDS = [f.name for f in fields(BenchRecord)]


@dataclass
class Check:
    instance: str
    terminals: tuple
    engine: int
    dw: int
    brute: int | None = None

    @property
    def ok(self):
        return self.engine == self.dw and (self.brute is None or self.brute == self.dw)


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def mismatches(self):
        return [c for c in self.checks if not c.ok]

    @property
    def instances(self):
        return len({c.instance for c in self.checks})

    def summary(self):
        brute = sum(1 for c in self.checks if c.brute is not None)
        return (f"{self.instances} instances, {len(self.checks)} queries "
                f"({brute} also brute-forced), {len(self.mismatches)} mismatches")


def terminal_sets(g, seed, name, queries, sizes):
    rng = random.Random(f"{seed}-{name}-queries")
    sizes = [k for k in sizes if 2 <= k <= g.n]
    out = []
    for _ in range(queries if sizes else 0):
        k = rng.choice(sizes)
        out.append(tuple(sorted(rng.sample(range(g.n), k))))
    return out


def _prepare(g, l, heuristic):
    start = time.perf_counter()
    idx = build_index(g, to_nice(decompose(g, heuristic)), l)
    return idx, (time.perf_counter() - start) * 1000


def verify_instance(name, g, sets, l=5, heuristic="min-degree"):
    idx, _ = _prepare(g, l, heuristic)
    checks = []
    for ts in sets:
        engine = query(idx, g, ts).weight
        dw = dreyfus_wagner(g, ts)[0].weight
        brute = brute_force_steiner(g, ts).weight if g.n <= BRUTE_FORCE_VERTEX_CAP else None
        checks.append(Check(name, ts, engine, dw, brute))
    return checks


def bench_instance(name, g, sets, l=5, heuristic="min-degree"):
    idx, build_ms = _prepare(g, l, heuristic)
    size = len(save_index(idx))
    rows = []
    for ts in sets:
        res = query(idx, g, ts)
        start = time.perf_counter()
        oracle = dreyfus_wagner(g, ts)[0]
        oracle_ms = (time.perf_counter() - start) * 1000
        rows.append(BenchRecord(
            name, g.n, g.num_edges, idx.width, idx.height, len(ts), round(build_ms, 3), size,
            round(res.stats.wall_time * 1000, 3), res.stats.stvs_calls, round(oracle_ms, 3),
            res.weight, oracle.weight))
    return rows


def _star(args):
    fn, rest = args
    return fn(*rest)


def _run(fn, jobs, items, seed, queries, sizes, l, heuristic):
    tasks = [(fn, (name, g, terminal_sets(g, seed, name, queries, sizes), l, heuristic))
             for name, g in items]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_star, tasks))
    else:
        results = [_star(t) for t in tasks]
    return [r for batch in results for r in batch]


def run_verify(items, seed=0, queries=3, sizes=(2, 3, 4, 5), l=5, heuristic="min-degree",
               jobs=1):
    """``items`` is an iterable of ``(name, graph)``."""
    checks = _run(verify_instance, jobs, items, seed, queries, sizes, l, heuristic)
    return VerifyReport(sorted(checks, key=lambda c: (c.instance, c.terminals)))


def run_bench(items, seed=0, queries=3, sizes=(2, 3, 4, 5), l=5, heuristic="min-degree",
              jobs=1):
    rows = _run(bench_instance, jobs, items, seed, queries, sizes, l, heuristic)
    return sorted(rows, key=lambda r: r.instance)


def write_csv(records, fh):
    writer = csv.writer(fh)
    writer.writerow(BENCH_FIELDS)
    for rec in records:
        writer.writerow(astuple(rec))
