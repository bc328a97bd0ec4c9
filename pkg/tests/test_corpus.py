import csv
import io
import random

import pytest

from steinertd import corpus, harness


def test_same_seed_same_bytes(tmp_path):
    a = corpus.gen_corpus(3, "random-sparse", [8, 12], tmp_path / "a", count=2, terminals=3)
    b = corpus.gen_corpus(3, "random-sparse", [8, 12], tmp_path / "b", count=2, terminals=3)
    assert [p.name for p in a] == [p.name for p in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))
    c = corpus.gen_corpus(4, "random-sparse", [8, 12], tmp_path / "c", count=2, terminals=3)
    assert any(x.read_bytes() != z.read_bytes() for x, z in zip(a, c))


def test_grid_shape():
    g = corpus.grid(random.Random(0), 3)
    assert g.n == 9 and g.num_edges == 12


@pytest.mark.parametrize("family", corpus.FAMILIES)
def test_families_are_connected(family):
    for name, g, ts in corpus.instances(1, family, [4, 9], count=3, terminals=3):
        assert g.is_connected
        assert len(ts) == 3 and len(set(ts)) == 3
        assert name.startswith(family)


def test_unknown_family():
    with pytest.raises(ValueError):
        corpus.make_graph("petersen", 5, random.Random(0))


def test_terminal_sets_are_seeded():
    g = corpus.grid(random.Random(0), 3)
    a = harness.terminal_sets(g, 1, "x", 5, [2, 3])
    assert a == harness.terminal_sets(g, 1, "x", 5, [2, 3])
    assert all(2 <= len(ts) <= 3 for ts in a)


def test_verify_reports_no_mismatches():
    items = [(n, g) for n, g, _ in corpus.instances(0, "random-sparse", [6, 10], count=2)]
    report = harness.run_verify(items, queries=2)
    assert report.instances == 4
    assert not report.mismatches
    assert "0 mismatches" in report.summary()


def test_bench_csv_columns():
    items = [(n, g) for n, g, _ in corpus.instances(0, "grid", [3], count=1)]
    rows = harness.run_bench(items, queries=2)
    buf = io.StringIO()
    harness.write_csv(rows, buf)
    table = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert list(table[0]) == harness.BENCH_FIELDS
    assert len(table) == 2
    assert all(r["engine_weight"] == r["oracle_weight"] for r in table)
