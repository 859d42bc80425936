import csv
import io
from importlib import resources

import pytest

from treecascade.bench import HEADER, TIMING_COLUMNS, broom, run_bench
from treecascade.cli import main
from treecascade.config import BenchConfig, parse_config


@pytest.fixture
def smoke_path():
    with resources.as_file(resources.files("treecascade").joinpath("data/smoke.trace")) as p:
        yield str(p)


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text("# tiny sizes\nB=4\nG=1\nc=1\nn=3000\nqueries=300\ndepth=6\ndegree=3\n"
                 "report_width=100000\nops=2000\naudit_every=200\nseed=3\n")
    return str(p)


def csv_rows(text):
    return list(csv.reader(line for line in io.StringIO(text) if not line.startswith("#")))


def test_verify_smoke(smoke_path, capsys):
    assert main(["verify", "--trace", smoke_path]) == 0
    out = capsys.readouterr().out
    assert "result: OK" in out and "runtime:" in out


def test_verify_generated(small_cfg, capsys):
    assert main(["verify", "--gen", "search", "--seed", "42", "--config", small_cfg]) == 0
    assert "executed: 2000" in capsys.readouterr().out


def test_verify_injected_fault_fails_and_localizes(small_cfg, capsys):
    code = main(["verify", "--gen", "maxima:ops=500,nodes=20,keys=50", "--seed", "1",
                 "--config", small_cfg, "--fault", "skip_rerank", "--stop-on-first", "--shrink"])
    out = capsys.readouterr().out
    assert code == 1
    assert "result: FAIL" in out
    assert "op " in out and "QMAX" in out
    assert "shrunk failing trace" in out


def test_verify_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.trace"
    bad.write_text("TREE -1 0\nINSERT 1 5\nQPRED one 2\n")
    assert main(["verify", "--trace", str(bad)]) == 2
    assert "line 3:" in capsys.readouterr().err


def test_bad_config_is_reported(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("B=1\n")
    assert main(["bench", "--config", str(p)]) == 2
    assert "B must be" in capsys.readouterr().err


def test_bench_csv_header_and_determinism(small_cfg, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"b{k}.csv"
        assert main(["bench", "--config", small_cfg, "--out", str(out)]) == 0
        outs.append(out.read_text())
    rows = [csv_rows(t) for t in outs]
    assert rows[0][0] == HEADER
    assert all(len(r) == len(HEADER) for r in rows[0])
    drop = [HEADER.index(c) for c in TIMING_COLUMNS]
    strip = [[[v for i, v in enumerate(r) if i not in drop] for r in rs] for rs in rows]
    assert strip[0] == strip[1]
    assert outs[0].startswith("# B=4\n")


def test_bench_locator_identity():
    cfg = BenchConfig(B=8, G=2, c=2, n=5000, queries=500, depth=12, workloads=("qpred",)).validate()
    for row in run_bench(cfg):
        if row["structure"] == "cascade":
            assert float(row["locator_queries_per_query"]) == float(row["path_length"]) == 12


def test_broom_depth():
    parents = broom(5, 3)
    assert parents[:5] == [-1, 0, 1, 2, 3] and parents[5:] == [4, 4, 4]


def test_config_parsing():
    cfg = parse_config("B=auto\nlocator=layered\nfaults=skip_bridge,skip_rerank\nworkloads=qpred\n")
    assert cfg.B is None and cfg.locator == "layered"
    assert cfg.faults == ("skip_bridge", "skip_rerank")
    for bad in ("colour=1", "B", "c=0", "locator=trie", "faults=skip_everything", "d_max=99"):
        with pytest.raises(ValueError):
            parse_config(bad)


def test_gen_command(tmp_path):
    out = tmp_path / "g.trace"
    assert main(["gen", "report:ops=50,nodes=5", "--seed", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("TREE") and len(lines) == 51
