from importlib import resources

import pytest

from treecascade.errors import TraceParseError
from treecascade.keys import Key
from treecascade.oracle import OracleWorld
from treecascade.trace import (Op, RunParams, Trace, generate, parse_gen_spec, parse_trace,
                               run_differential, shrink)

SMALL = dict(B=4, G=1, c=1, fanout=3)


def smoke_text():
    return resources.files("treecascade").joinpath("data/smoke.trace").read_text()


class TestOracle:
    def test_three_node_pred(self):
        w = OracleWorld([-1, 0, 1])
        for v, keys in {0: [10, 30], 1: [20], 2: [5, 25]}.items():
            for x in keys:
                w.insert((x, x), v)
        assert w.oracle_path_pred(22, 2)[0] == (20, 20)

    def test_segment_table_swap_remove(self):
        from treecascade.geometry import HSegment
        w = OracleWorld([-1])
        for i in range(1, 40):
            w.add_segment(HSegment(i, i + 10, i, i))
        for i in range(1, 40, 2):
            w.remove_segment(i)
        assert w.oracle_intersections(15, 0, 100) == [6, 8, 10, 12, 14]
        assert w.oracle_stab_max(15) == 14


class TestGrammar:
    def test_smoke_trace_parses(self):
        tr = parse_trace(smoke_text())
        assert tr.parents == [-1, 0, 1]
        assert tr.ops[0] == Op("INSERT", (0, 10))

    def test_roundtrip(self):
        tr = generate("mixed:ops=300,nodes=10,coords=20", 3)
        assert parse_trace(tr.dumps()) == tr

    def test_inf_and_optional_priority(self):
        tr = parse_trace("SEG+ 1 -inf 5 3\nSEG+ 2 0 inf 4 9\nRETRO+ 4 1 inf\n")
        assert tr.parents is None
        assert tr.ops[0].args == (1, float("-inf"), 5, 3)
        assert tr.ops[1].args == (2, 0, float("inf"), 4, 9)

    @pytest.mark.parametrize("text,line", [
        ("INSERT 0 1\nFROB 2\n", 2),
        ("# c\n\nQPRED 1\n", 3),
        ("QRAY 1 x\n", 1),
        ("INSERT 0 1\nTREE -1\n", 2),
        ("SEG+ 1 2 3 4 5 6\n", 1),
    ])
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(TraceParseError) as exc:
            parse_trace(text)
        assert exc.value.lineno == line
        assert str(exc.value).startswith(f"line {line}:")

    def test_gen_spec(self):
        spec = parse_gen_spec("search:ops=10,nodes=3,mix=INSERT=1/QPRED=1")
        assert (spec.ops, spec.nodes, spec.mix) == (10, 3, {"INSERT": 1.0, "QPRED": 1.0})
        with pytest.raises(ValueError):
            parse_gen_spec("nope")
        with pytest.raises(ValueError):
            parse_gen_spec("search:colour=red")


class TestDifferential:
    def test_smoke_ok(self):
        rep = run_differential(parse_trace(smoke_text()))
        assert rep.ok, rep.format()
        assert rep.skipped == 0

    @pytest.mark.parametrize("profile", ["search", "report", "maxima", "geometry", "retro", "mixed"])
    def test_profiles_clean(self, profile):
        tr = generate(f"{profile}:ops=1500,nodes=25,keys=400,coords=40,times=40", 11)
        rep = run_differential(tr, audit_every=100, **SMALL)
        assert rep.ok, rep.format()

    def test_deterministic(self):
        a = run_differential(generate("mixed:ops=800,nodes=12", 5), **SMALL).as_dict()
        b = run_differential(generate("mixed:ops=800,nodes=12", 5), **SMALL).as_dict()
        assert a == b

    def test_invalid_ops_are_skipped(self):
        tr = parse_trace("TREE -1 0\nDELETE 1 5\nINSERT 9 5\nMDELETE 3 0\nSEG- 4\nRETRO- 1\n"
                         "INSERT 1 5\nQPRED 1 6\n")
        rep = run_differential(tr)
        assert rep.ok and rep.skipped == 5 and rep.executed == 2

    def test_counts_identity(self):
        rep = run_differential(generate("search:ops=2000,nodes=60", 2), **SMALL)
        st = rep.stats
        assert st["locator_queries_per_query"] == pytest.approx(st["nodes_per_query"] - 1)


class TestFaultInjection:
    def run(self, fault, spec, seed=1):
        return run_differential(generate(spec, seed), RunParams(
            faults=(fault,), audit_every=50, stop_on_first=True, **SMALL))

    def test_skip_bridge_caught_by_gap_audit(self):
        rep = self.run("skip_bridge", "search:ops=3000,nodes=20,keys=1000")
        assert not rep.ok
        assert any("bridge gap" in m for _, m in rep.audit_failures)

    def test_skip_label_split_caught(self):
        rep = self.run("skip_label_split", "search:ops=3000,nodes=20,keys=1000")
        assert not rep.ok
        msgs = [m for _, m in rep.audit_failures] + [str(m) for m in rep.mismatches]
        assert any("range set" in m or "QPRED" in m for m in msgs)

    def test_skip_rerank_caught(self):
        rep = self.run("skip_rerank", "maxima:ops=3000,nodes=20,keys=100")
        assert not rep.ok and rep.mismatches
        assert rep.mismatches[0][1].startswith("QMAX")

    @pytest.mark.parametrize("fault,spec", [
        ("skip_bridge", "search:ops=3000,nodes=20,keys=1000"),
        ("skip_label_split", "search:ops=3000,nodes=20,keys=1000"),
        ("skip_rerank", "maxima:ops=2000,nodes=20,keys=100"),
    ])
    def test_shrinker_reaches_small_trace(self, fault, spec):
        params = RunParams(faults=(fault,), audit_every=1, stop_on_first=True, **SMALL)
        small = shrink(generate(spec, 5), params)
        assert len(small.ops) <= 40
        assert not run_differential(small, params).ok
        # every single remaining op is needed
        for i in range(len(small.ops)):
            cut = Trace(small.parents, small.ops[:i] + small.ops[i + 1:])
            assert run_differential(cut, params).ok

    def test_shrink_rejects_passing_trace(self):
        with pytest.raises(ValueError):
            shrink(Trace([-1], [Op("INSERT", (0, 1))]))
