import itertools

import pytest
from hypothesis import given, settings, strategies as st

from steinertd.exceptions import InfeasibleError, StpSyntaxError
from steinertd.graph import (Graph, SteinerTree, graph_union, load_graph, parse_edges,
                             parse_stp, prune_to_tree, shortest_path, write_stp)

from conftest import floyd_warshall, random_graph

STP = """33D32945 STP File, STP Format Version 1.0

SECTION Comment
Name "tiny"
END

SECTION Graph
Nodes 3
Edges 2
E 1 2 1
E 2 3 1
END

SECTION Terminals
Terminals 2
T 3
T 1
END

EOF
"""


def test_parse_stp_basic():
    g, terminals = parse_stp(STP)
    assert g.n == 3
    assert g.edges() == [(0, 1, 1), (1, 2, 1)]
    assert terminals == [2, 0]
    assert g.labels == [1, 2, 3]


def test_parse_stp_duplicate_edge_keeps_minimum():
    text = "SECTION Graph\nNodes 2\nE 1 2 5\nE 2 1 3\nEND\nEOF\n"
    g, _ = parse_stp(text)
    assert g.edges() == [(0, 1, 3)]


def test_parse_stp_rational_weights_are_scaled():
    text = "SECTION Graph\nNodes 3\nE 1 2 0.5\nE 2 3 1.5\nEND\nEOF\n"
    g, _ = parse_stp(text)
    assert g.scale == 2
    assert [w for _, _, w in g.edges()] == [1, 3]


def test_parse_stp_keywords_case_insensitive():
    text = "section graph\nnodes 2\ne 1 2 4\nend\nsection terminals\nt 1\nt 2\nend\neof\n"
    g, terminals = parse_stp(text)
    assert g.edges() == [(0, 1, 4)]
    assert terminals == [0, 1]


@pytest.mark.parametrize("body, line", [
    ("SECTION Graph\nNodes 2\nE 1 3 1\nEND\n", 3),
    ("SECTION Graph\nNodes 2\nE 1 2 0\nEND\n", 3),
    ("SECTION Graph\nNodes 2\nE 1 2 -4\nEND\n", 3),
    ("SECTION Graph\nNodes 2\nE 1 x 1\nEND\n", 3),
    ("SECTION Graph\nNodes 2\nBOGUS 1\nEND\n", 3),
    ("E 1 2 3\n", 1),
])
def test_parse_stp_errors_carry_line_numbers(body, line):
    with pytest.raises(StpSyntaxError) as err:
        parse_stp(body)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_stp_unclosed_section():
    with pytest.raises(StpSyntaxError):
        parse_stp("SECTION Graph\nNodes 2\nE 1 2 1\n")


def test_stp_round_trip():
    g = random_graph(3, 9)
    again, terminals = parse_stp(write_stp(g, [0, 4]))
    assert again == g
    assert terminals == [0, 4]


def test_parse_edges_renumbers_and_comments():
    g = parse_edges("# comment\n10 20 3\n20 30 4  # trailing\n\n")
    assert g.n == 3
    assert g.labels == [10, 20, 30]
    assert g.edges() == [(0, 1, 3), (1, 2, 4)]


def test_load_graph_by_extension(tmp_path):
    (tmp_path / "a.edges").write_text("1 2 1\n")
    (tmp_path / "b.stp").write_text(STP)
    assert load_graph(tmp_path / "a.edges")[0].n == 2
    assert load_graph(tmp_path / "b.stp")[1] == [2, 0]
    (tmp_path / "c.txt").write_text("")
    with pytest.raises(ValueError):
        load_graph(tmp_path / "c.txt")


def test_graph_rejects_self_loops_and_bad_weights():
    with pytest.raises(ValueError):
        Graph(2, [(1, 1, 1)])
    with pytest.raises(ValueError):
        Graph(2, [(0, 1, 0)])


def test_union_idempotent():
    t = SteinerTree.from_edges((0, 2), [(0, 1, 2), (1, 2, 3)])
    u = graph_union(t, t)
    assert u.edges == t.edges and u.weight == t.weight and not u.disconnected


def test_union_of_adjacent_edges():
    t1 = SteinerTree.from_edges((0, 1), [(0, 1, 2)])
    t2 = SteinerTree.from_edges((1, 2), [(1, 2, 3)])
    u = graph_union(t1, t2)
    assert u.edges == ((0, 1, 2), (1, 2, 3))
    assert u.weight == 5
    assert u.terminals == (0, 1, 2)


def test_union_counts_shared_edges_once():
    t1 = SteinerTree.from_edges((0, 2), [(0, 1, 2), (1, 2, 3)])
    t2 = SteinerTree.from_edges((0, 3), [(0, 1, 2), (1, 3, 4)])
    assert graph_union(t1, t2).weight < t1.weight + t2.weight


def test_union_flags_disjoint_trees():
    t1 = SteinerTree.from_edges((0, 1), [(0, 1, 1)])
    t2 = SteinerTree.from_edges((2, 3), [(2, 3, 1)])
    assert graph_union(t1, t2).disconnected


def test_prune_identity_on_trees():
    t = SteinerTree.from_edges((0, 3), [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    assert prune_to_tree(t) == t


def test_prune_triangle_strips_leaf():
    tri = SteinerTree.from_edges((0, 1), [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    out = prune_to_tree(tri)
    assert out.edges == ((0, 1, 1),)
    assert out.weight == 1


def _subtrees_oracle(edges, terminals):
    """Minimum weight over all edge subsets forming a tree through the terminals."""
    best = None
    for r in range(len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            t = SteinerTree.from_edges(terminals, subset)
            if t.is_valid() and set(terminals) <= t.vertices():
                best = t.weight if best is None else min(best, t.weight)
    return best


def test_prune_four_cycle_matches_subtree_enumeration():
    edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 9)]
    cycle = SteinerTree.from_edges((0, 3), edges)
    out = prune_to_tree(cycle)
    assert out.weight == _subtrees_oracle(edges, (0, 3)) == 3
    assert out.is_valid()


def test_prune_disconnected_terminals_is_infeasible():
    sub = SteinerTree.from_edges((0, 3), [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(InfeasibleError):
        prune_to_tree(sub)


def test_shortest_path_only_path(path3):
    t = shortest_path(path3, 0, 2)
    assert t.weight == 5
    assert t.terminals == (0, 2)


def test_shortest_path_rejects_same_vertex(path3):
    with pytest.raises(ValueError):
        shortest_path(path3, 1, 1)


def test_shortest_path_disconnected():
    g = Graph(4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(InfeasibleError):
        shortest_path(g, 0, 3)


def test_shortest_path_tie_break_smallest_predecessor():
    # two equal paths 0-1-3 and 0-2-3; the walk back from 3 picks 1
    g = Graph(4, [(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)])
    assert shortest_path(g, 0, 3).edge_pairs() == [(0, 1), (1, 3)]


@pytest.mark.parametrize("seed", range(10))
def test_shortest_path_matches_floyd_warshall(seed):
    g = random_graph(seed, 10, density=0.2)
    fw = floyd_warshall(g)
    dist, _ = g.all_pairs
    for u in range(g.n):
        for v in range(g.n):
            assert dist[u, v] == fw[u][v]
            if u != v:
                t = shortest_path(g, u, v)
                assert t.weight == fw[u][v]
                assert t.is_valid()
                assert g.path_edges(u, v) and sum(e[2] for e in g.path_edges(u, v)) == fw[u][v]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 12), c=st.integers(1, 9))
def test_shortest_path_symmetric_and_scales(seed, n, c):
    g = random_graph(seed, n, density=0.2)
    big = g.scaled(c)
    for u, v in [(0, n - 1), (n // 2, 0)]:
        if u == v:
            continue
        w = shortest_path(g, u, v).weight
        assert shortest_path(g, v, u).weight == w
        assert shortest_path(big, u, v).weight == c * w


def test_tree_problems_detects_cycle_and_weight():
    cyc = SteinerTree((0, 1), ((0, 1, 1), (0, 2, 1), (1, 2, 1)), 3)
    assert any("cycle" in p or "edges" in p for p in cyc.problems())
    wrong = SteinerTree((0, 1), ((0, 1, 1),), 4)
    assert "weight differs from edge sum" in wrong.problems()
    assert SteinerTree((5,)).is_valid()


def test_digest_changes_with_weights():
    g = Graph(2, [(0, 1, 1)])
    assert g.digest != Graph(2, [(0, 1, 2)]).digest
    assert len(g.digest) == 32
