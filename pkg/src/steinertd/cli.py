"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch or invalid decomposition,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import corpus, harness
from .decomposition import (read_td, to_nice, decompose, validate_decomposition,
                            validate_nice, write_td, NiceTreeDecomposition)
from .exceptions import SteinerError
from .graph import format_weight, load_graph
from .index import build_index, dump_json, load_index, save_index
from .oracle import brute_force_steiner, dreyfus_wagner
from .query import query

log = logging.getLogger("steinertd")


class UsageError(Exception):
    pass


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load(path):
    try:
        return load_graph(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _terminals(g, labels, fallback):
    if labels is None:
        if not fallback:
            raise UsageError("no terminals given and the graph file lists none")
        return sorted(set(fallback))
    index = {lab: v for v, lab in enumerate(g.labels)}
    missing = [lab for lab in labels if lab not in index]
    if missing:
        raise UsageError(f"terminals {missing} are not vertices of the graph")
    return sorted({index[lab] for lab in labels})


def _describe(g, tree):
    edges = ",".join(f"{g.labels[u]}-{g.labels[v]}" for u, v, _ in tree.edges)
    terms = ",".join(str(g.labels[t]) for t in tree.terminals)
    return f"weight={format_weight(g, tree.weight)} terminals={terms} edges={edges}"


def _nice_for(g, args):
    if getattr(args, "td", None):
        td, _ = read_td(Path(args.td).read_text(encoding="utf-8"))
        if not isinstance(td, NiceTreeDecomposition):
            td = to_nice(td)
        return td
    return to_nice(decompose(g, args.heuristic))


def cmd_gen(args):
    paths = corpus.gen_corpus(args.seed, args.family, args.sizes, args.out, args.count,
                              args.terminals)
    for p in paths:
        print(p)
    log.info("seed=%s wrote %d instances", args.seed, len(paths))
    return 0


def cmd_decompose(args):
    g, _ = _load(args.graph)
    td = decompose(g, args.heuristic)
    out = td if args.plain else to_nice(td)
    problems = validate_decomposition(g, out)
    if not args.plain:
        problems += validate_nice(out)
    text = write_td(out, g.n)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for p in problems:
        print(f"violation {p.condition}: {p.message}", file=sys.stderr)
    print(f"width={out.width} height={out.height} nodes={len(out)} "
          f"heuristic={args.heuristic} violations={len(problems)}",
          file=sys.stderr if not args.out else sys.stdout)
    return 1 if problems else 0


def cmd_index(args):
    g, _ = _load(args.graph)
    ntd = _nice_for(g, args)
    problems = validate_decomposition(g, ntd)
    if problems:
        for p in problems:
            print(f"violation {p.condition}: {p.message}", file=sys.stderr)
        return 1
    idx = build_index(g, ntd, args.l)
    data = save_index(idx)
    Path(args.out).write_bytes(data)
    if args.dump_json:
        text = dump_json(idx, indent=1)
        if args.dump_json == "-":
            print(text)
        else:
            Path(args.dump_json).write_text(text, encoding="utf-8")
    print(f"l={idx.l} width={idx.width} height={idx.height} nodes={len(ntd)} "
          f"entries={idx.entry_count} bytes={len(data)}")
    return 0


def cmd_query(args):
    g, listed = _load(args.graph)
    try:
        data = Path(args.index).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.index}: {exc.strerror or exc}") from None
    idx = load_index(data, g)
    terms = _terminals(g, args.terminals, listed)
    if len(terms) > idx.l and args.fallback != "dw":
        raise UsageError(
            f"{len(terms)} terminals exceed the index capacity l={idx.l}; rebuild with "
            f"'index --l {len(terms)}' or pass '--fallback dw'")
    if len(terms) > idx.l:
        tree, _ = dreyfus_wagner(g, terms)
        print(_describe(g, tree) + " engine=dw")
        return 0
    res = query(idx, g, terms)
    print(_describe(g, res.tree))
    status = 0
    if args.verify:
        oracle, _ = dreyfus_wagner(g, terms)
        same = oracle.weight == res.weight
        print(f"verify dw={format_weight(g, oracle.weight)} {'ok' if same else 'MISMATCH'}")
        status = 0 if same else 1
    if args.stats:
        print(res.stats.to_json())
    return status


def cmd_oracle(args):
    g, listed = _load(args.graph)
    terms = _terminals(g, args.terminals, listed)
    if args.engine == "dw":
        tree, _ = dreyfus_wagner(g, terms)
    else:
        tree = brute_force_steiner(g, terms)
    print(_describe(g, tree) + f" engine={args.engine}")
    return 0


def _items(args):
    if args.graphs:
        out = []
        for path in args.graphs:
            g, _ = _load(path)
            out.append((Path(path).stem, g))
        return out
    return [(name, g) for name, g, _ in
            corpus.instances(args.seed, args.family, args.sizes, args.count)]


def cmd_verify(args):
    report = harness.run_verify(_items(args), seed=args.seed, queries=args.queries,
                                sizes=args.terminal_sizes, l=args.l,
                                heuristic=args.heuristic, jobs=args.jobs)
    for c in report.mismatches:
        print(f"MISMATCH {c.instance} terminals={list(c.terminals)} engine={c.engine} "
              f"dw={c.dw} brute={c.brute}")
    print(f"seed={args.seed} {report.summary()}")
    return 1 if report.mismatches else 0


def cmd_bench(args):
    rows = harness.run_bench(_items(args), seed=args.seed, queries=args.queries,
                             sizes=args.terminal_sizes, l=args.l,
                             heuristic=args.heuristic, jobs=args.jobs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            harness.write_csv(rows, fh)
    else:
        harness.write_csv(rows, sys.stdout)
    log.info("seed=%s %d rows", args.seed, len(rows))
    return 1 if any(r.engine_weight != r.oracle_weight for r in rows) else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="steinertd",
                                     description="Exact Steiner trees over a tree-decomposition index.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def heuristic(p):
        p.add_argument("--heuristic", choices=["min-degree", "min-fill"], default="min-degree")

    p = sub.add_parser("gen", help="write a seeded corpus of .stp instances")
    p.add_argument("--family", choices=corpus.FAMILIES, default="random-sparse")
    p.add_argument("--sizes", type=_ints, default=[10, 15, 20])
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--terminals", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="tree-decompose a graph into a .td file")
    p.add_argument("graph")
    heuristic(p)
    p.add_argument("--out")
    p.add_argument("--plain", action="store_true", help="skip the nice normal form")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("index", help="build the bag-table index")
    p.add_argument("graph")
    heuristic(p)
    p.add_argument("--td", help="use this decomposition instead of computing one")
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-json", metavar="FILE", help="also write the index as JSON ('-' for stdout)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="answer one Steiner tree query from an index")
    p.add_argument("--index", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--terminals", type=_ints)
    p.add_argument("--fallback", choices=["dw"])
    p.add_argument("--verify", action="store_true")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle", help="solve one instance with an exact oracle")
    p.add_argument("graph")
    p.add_argument("--engine", choices=["dw", "brute"], default="dw")
    p.add_argument("--terminals", type=_ints)
    p.set_defaults(func=cmd_oracle)

    for name, func, text in (("verify", cmd_verify, "compare engine against oracles"),
                             ("bench", cmd_bench, "time index builds and queries (CSV)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("graphs", nargs="*")
        p.add_argument("--family", choices=corpus.FAMILIES, default="random-sparse")
        p.add_argument("--sizes", type=_ints, default=[8, 12, 16, 20, 25])
        p.add_argument("--count", type=int, default=10)
        p.add_argument("--queries", type=int, default=3)
        p.add_argument("--terminal-sizes", type=_ints, default=[2, 3, 4, 5])
        p.add_argument("--l", type=int, default=5)
        heuristic(p)
        if name == "bench":
            p.add_argument("--out")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    if getattr(args, "l", 2) < 2:
        parser.error("--l must be at least 2")
    try:
        return args.func(args)
    except (UsageError, SteinerError, ValueError, OSError) as exc:
        print(f"steinertd: {exc}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
