"""The eight acceptance criteria, at full size.

Each test prints one PASS/FAIL line (also collected into the terminal
summary).  Slow: several minutes in total.  Deselect with ``-m "not acceptance"``.
"""
import random
import time

import pytest

from conftest import ACCEPTANCE
from treecascade.bench import Workload, run_bench
from treecascade.config import BenchConfig
from treecascade.keys import Key
from treecascade.maxima import MaximaTree
from treecascade.oracle import OracleWorld
from treecascade.search import PathSearcher, SearchCounters
from treecascade.trace import Differential, RunParams, generate, run_differential

pytestmark = pytest.mark.acceptance

SEEDS = range(1, 11)
OPS = 100_000
CATALOG = dict(B=8, G=2, c=2)
TREE = "nodes=512,degree=8"


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def search_runs():
    """Criterion-1 runs, shared with the audit criterion."""
    runs = {}
    for seed in SEEDS:
        t0 = time.perf_counter()
        trace = generate(f"search:ops={OPS},{TREE}", seed)
        rep = run_differential(trace, RunParams(audit_every=1000, **CATALOG))
        runs[seed] = (rep, time.perf_counter() - t0)
    return runs


def test_1_path_search_differential(search_runs):
    bad = {s: len(r.mismatches) for s, (r, _) in search_runs.items() if r.mismatches}
    slow = max(t for _, t in search_runs.values())
    queries = sum(r.ops.get("QPRED", 0) for r, _ in search_runs.values())
    executed = all(r.executed == OPS for r, _ in search_runs.values())
    verdict(1, not bad and slow < 60 and executed,
            f"{len(search_runs)} seeds x {OPS} ops, {queries} QPRED, mismatching seeds {bad}, "
            f"slowest seed {slow:.1f}s (< 60s)")


def test_2_reporting_differential():
    mism = dups = queries = 0
    for seed in SEEDS:
        rep = run_differential(generate(f"report:ops={OPS},{TREE}", seed),
                               RunParams(audit_every=0, **CATALOG))
        mism += len(rep.mismatches)
        queries += rep.ops.get("QREPORT", 0)
    # duplicates already fail the multiset comparison; count them directly on a sample too
    trace = generate(f"report:ops=20000,{TREE}", 99)
    d = Differential(trace.parents, RunParams(audit_every=0, **CATALOG))
    for i, op in enumerate(trace.ops):
        if op.name == "QREPORT":
            v0, v1, lo, hi = op.args
            got = list(d.searcher.path_report(lo, hi, v0, v1)) if d._cat is not None else []
            dups += len(got) - len(set(got))
        d.step(i, op)
    verdict(2, mism == 0 and dups == 0,
            f"{queries} QREPORT over {len(SEEDS)} seeds, mismatches {mism}, duplicates {dups}")


def test_3_maxima_differential():
    mism = queries = 0
    for seed in (1, 2, 3):
        rep = run_differential(generate(f"maxima:ops={OPS},{TREE}", seed),
                               RunParams(audit_every=5000))
        mism += len(rep.mismatches) + len(rep.audit_failures)
        queries += rep.ops.get("QMAX", 0)
    # exhaustive stabbing predecessor: every degree up to 8, up to 32 elements
    r = random.Random(3)
    checked = stab_bad = 0
    for deg in range(1, 9):
        for trial in range(4):
            mt = MaximaTree([-1] + [0] * deg)
            world = OracleWorld([-1] + [0] * deg)
            for i in range(r.randint(1, 32)):
                key = Key(r.randrange(40), i)
                f = r.randint(1, deg)
                l = r.randint(f, deg)
                mt.minsert(key, f, l, 0)
                world.minsert(key, f, l, 0)
            for q in range(-1, 42):
                for x1 in range(1, deg + 1):
                    for x2 in range(x1, deg + 1):
                        got = mt.stab_predecessor(0, q, x1, x2)
                        want = world.oracle_stab_pred(0, q, x1, x2)
                        checked += 1
                        stab_bad += (tuple(got) if got else None) != (tuple(want) if want else None)
    verdict(3, mism == 0 and stab_bad == 0,
            f"{queries} QMAX over 3 x {OPS} ops, failures {mism}; "
            f"stab_predecessor {checked} exhaustive cases, mismatches {stab_bad}")


def test_4_invariant_audits(search_runs):
    audits = sum(r.audits for r, _ in search_runs.values())
    fails = [(s, r.audit_failures[:2]) for s, (r, _) in search_runs.items() if r.audit_failures]
    verdict(4, not fails and audits >= len(SEEDS) * OPS // 1000 * 0.6,
            f"{audits} full audits (every 1000 updates) over the criterion-1 runs, violations {fails}")


SIZES = (10_000, 100_000, 1_000_000)
DEPTH = 16


@pytest.fixture(scope="module")
def broom_workloads():
    return {n: Workload(BenchConfig(n=n, queries=10_000, depth=DEPTH, degree=8,
                                    workloads=("qpred",), seed=7, **CATALOG).validate())
            for n in SIZES}


def test_5_operation_counts(broom_workloads):
    per_node = {}
    bounds = set()
    exact = True
    bound_ok = True
    for n, wl in broom_workloads.items():
        tree = wl.tree
        cnt = SearchCounters()
        s = PathSearcher(tree, cnt)
        for x, v in wl.qpred_queries():
            before = cnt.locator_queries
            s.path_predecessor(x, v)
            exact &= cnt.locator_queries - before == tree.depth(v) == DEPTH
        per_node[n] = cnt.entries_touched / cnt.nodes
        bound_ok &= per_node[n] <= 8 * tree.d
        bounds.add(8 * tree.d)
    spread = max(per_node.values()) / min(per_node.values())
    figs = ", ".join(f"n={n}: {f:.3f}" for n, f in per_node.items())
    verdict(5, exact and bound_ok and spread <= 1.10,
            f"locator_queries == |path| on every query: {exact}; entries touched per node {figs} "
            f"(bound 8d = {sorted(bounds)}); spread {100 * (spread - 1):.2f}% (<= 10%)")


def test_6_applications():
    res = {}
    geo = generate("geometry:warmup=10000,ops=33000,coords=100000,"
                   "mix=QRAY=10/QSTAB=10/QISECT=10/SEG+=1/SEG-=0.5", 6)
    rep_g = run_differential(geo, RunParams(audit_every=5000, **CATALOG))
    ret = generate("retro:warmup=10000,ops=10600,times=100000,mix=QRETRO=20/RETRO+=0.5/RETRO-=0.5", 6)
    rep_r = run_differential(ret, RunParams(audit_every=5000, **CATALOG))
    for rep in (rep_g, rep_r):
        res.update(rep.ops)
    enough = all(res.get(k, 0) >= 10_000 for k in ("SEG+", "QRAY", "QSTAB", "QISECT", "RETRO+", "QRETRO"))
    ab = [m for m in rep_g.mismatches if m[1].startswith("QSTAB")]
    ok = rep_g.ok and rep_r.ok and enough
    verdict(6, ok and not ab,
            "segments {SEG+}, QRAY {QRAY} (down and up), QSTAB {QSTAB} (A, B, oracle), "
            "QISECT {QISECT}, events {RETRO+}, QRETRO {QRETRO}; ".format(**res)
            + f"mismatches {len(rep_g.mismatches) + len(rep_r.mismatches)}, "
              f"audit failures {len(rep_g.audit_failures) + len(rep_r.audit_failures)}")


def test_7_baseline_dominance(broom_workloads):
    parts = []
    ok = True
    for n in (100_000, 1_000_000):
        rows = {r["structure"]: r for r in run_bench(broom_workloads[n].cfg, broom_workloads[n])}
        casc = float(rows["cascade"]["comparisons_per_query"])
        base = float(rows["per_node_bisect"]["comparisons_per_query"])
        ok &= casc <= base
        parts.append(f"n={n} depth={DEPTH}: cascade {casc:.1f} vs per-node {base:.1f}")
    verdict(7, ok, "comparisons/query over 10^4 queries; " + "; ".join(parts))


FAULTS = {
    "skip_bridge": f"search:ops={OPS},{TREE}",
    "skip_label_split": f"search:ops={OPS},{TREE}",
    "skip_rerank": f"maxima:ops={OPS},{TREE}",
}


def test_8_fault_injection():
    caught = {}
    where = {}
    for fault, spec in FAULTS.items():
        hits = []
        for seed in SEEDS:
            rep = run_differential(generate(spec, seed), RunParams(
                faults=(fault,), audit_every=1000, stop_on_first=True, **CATALOG))
            if not rep.ok:
                hits.append(rep.first_failure)
        caught[fault] = len(hits)
        where[fault] = max(hits) if hits else None
    ok = all(c >= 9 for c in caught.values())
    verdict(8, ok, "; ".join(f"{f}: caught {c}/10 (latest at op {where[f]})"
                              for f, c in caught.items()))
