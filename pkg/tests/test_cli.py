import json
import subprocess
import sys

import pytest

from steinertd.cli import main
from steinertd.graph import write_stp
from steinertd.decomposition import read_td

from conftest import random_graph


@pytest.fixture
def stp(tmp_path):
    g = random_graph(5, 12, density=0.15)
    path = tmp_path / "g.stp"
    path.write_text(write_stp(g, [0, 4, 9]))
    return g, path


def run(argv, capsys):
    code = main(["--quiet"] + [str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decompose_writes_valid_td(stp, tmp_path, capsys):
    g, path = stp
    code, out, _ = run(["decompose", path, "--out", tmp_path / "g.td"], capsys)
    assert code == 0
    assert "violations=0" in out
    td, n = read_td((tmp_path / "g.td").read_text())
    assert n == g.n


def test_index_and_query_round_trip(stp, tmp_path, capsys):
    g, path = stp
    idx = tmp_path / "g.idx"
    code, out, _ = run(["index", path, "--l", 4, "--out", idx], capsys)
    assert code == 0 and "entries=" in out
    code, out, _ = run(["query", "--index", idx, "--graph", path, "--verify", "--stats"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("weight=") and "terminals=1,5,10" in lines[0]
    assert lines[1].endswith("ok")
    assert json.loads(lines[2])["nodes_visited"] >= 1


def test_query_capacity_and_fallback(stp, tmp_path, capsys):
    _, path = stp
    idx = tmp_path / "g.idx"
    run(["index", path, "--l", 2, "--out", idx], capsys)
    code, _, err = run(["query", "--index", idx, "--graph", path], capsys)
    assert code == 2 and "--fallback dw" in err
    code, out, _ = run(["query", "--index", idx, "--graph", path, "--fallback", "dw"], capsys)
    assert code == 0 and out.rstrip().endswith("engine=dw")


def test_query_against_wrong_graph(stp, tmp_path, capsys):
    g, path = stp
    idx = tmp_path / "g.idx"
    run(["index", path, "--out", idx], capsys)
    other = tmp_path / "h.stp"
    other.write_text(write_stp(g.scaled(2), [0, 1]))
    code, _, err = run(["query", "--index", idx, "--graph", other], capsys)
    assert code == 2 and g.hexdigest in err


def test_oracle_engines_agree(stp, capsys):
    _, path = stp
    _, dw, _ = run(["oracle", path], capsys)
    _, brute, _ = run(["oracle", path, "--engine", "brute"], capsys)
    assert dw.split()[0] == brute.split()[0]


def test_missing_file_and_bad_terminals(stp, tmp_path, capsys):
    _, path = stp
    assert run(["oracle", tmp_path / "nope.stp"], capsys)[0] == 2
    code, _, err = run(["oracle", path, "--terminals", "1,99"], capsys)
    assert code == 2 and "99" in err


def test_gen_verify_bench(tmp_path, capsys):
    code, out, _ = run(["--seed", 2, "gen", "--sizes", "6,8", "--count", 2,
                        "--out", tmp_path / "c"], capsys)
    assert code == 0 and len(out.splitlines()) == 4
    files = sorted((tmp_path / "c").glob("*.stp"))
    code, out, _ = run(["verify", *files, "--queries", 2], capsys)
    assert code == 0 and "0 mismatches" in out
    code, _, _ = run(["bench", "--family", "grid", "--sizes", "3", "--count", 1,
                      "--out", tmp_path / "b.csv"], capsys)
    assert code == 0
    assert (tmp_path / "b.csv").read_text().startswith("instance,n_vertices")


def test_module_entry_point(stp):
    _, path = stp
    proc = subprocess.run([sys.executable, "-m", "steinertd", "oracle", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("weight=")
