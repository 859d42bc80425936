import random

import pytest
from hypothesis import given, strategies as st

from conftest import A, B_, R, random_shape
from treecascade.catalog import CatalogTree
from treecascade.errors import DomainError
from treecascade.keys import Key
from treecascade.oracle import OracleWorld
from treecascade.search import PathSearcher, SearchCounters, path_predecessor, path_report


def build_random(r, nodes, keys, bound, **params):
    parents = random_shape(r, nodes, 8)
    world = OracleWorld(parents)
    cats = {}
    for i in range(keys):
        v = r.randrange(nodes)
        k = Key(r.randrange(bound), i)
        cats.setdefault(v, []).append(k)
        world.insert(tuple(k), v)
    return CatalogTree(parents, cats, **params), world, parents


class TestThreeNode:
    def test_pred_and_succ_with_owners(self, three_node):
        res = path_predecessor(three_node, 22, B_)
        assert (res.pred.value, res.pred_owner) == (20, A)
        assert (res.succ.value, res.succ_owner) == (25, B_)

    def test_report(self, three_node):
        got = sorted((k.value, v) for k, v in path_report(three_node, 6, 24, B_, R))
        assert got == [(10, R), (20, A)]

    def test_report_partial_path(self, three_node):
        got = sorted((k.value, v) for k, v in path_report(three_node, 0, 100, B_, A))
        assert got == [(5, B_), (20, A), (25, B_)]

    def test_nothing_below(self, three_node):
        res = path_predecessor(three_node, 4, B_)
        assert res.pred is None and res.succ.value == 5

    def test_nothing_above(self, three_node):
        res = path_predecessor(three_node, 31, B_)
        assert res.pred.value == 30 and res.succ is None

    def test_exact_hit_is_own_successor(self, three_node):
        res = path_predecessor(three_node, 25, B_)
        assert res.pred == res.succ and res.pred.value == 25

    def test_non_ancestor_report(self, three_node):
        with pytest.raises(DomainError):
            path_report(three_node, 0, 5, R, B_)

    def test_locator_queries_equal_depth(self, three_node):
        cnt = SearchCounters()
        path_predecessor(three_node, 22, B_, counters=cnt)
        assert cnt.locator_queries == 2


def test_ties_pick_largest_id_for_pred():
    t = CatalogTree([-1, 0], {0: [Key(7, 1), Key(7, 5)], 1: [Key(7, 3), Key(9, 0)]})
    res = path_predecessor(t, 7, 1)
    assert res.pred == Key(7, 5) and res.pred_owner == 0
    assert res.succ == res.pred
    res = path_predecessor(t, 8, 1)
    assert res.succ == Key(9, 0)


@given(seed=st.integers(0, 10**6), bound=st.sampled_from([20, 500, 1 << 32]))
def test_path_pred_matches_oracle(seed, bound):
    r = random.Random(seed)
    tree, world, parents = build_random(r, r.randint(1, 30), r.randint(0, 150), bound,
                                        B=4, G=1, c=1)
    s = PathSearcher(tree, debug=True)
    for _ in range(30):
        v, x = r.randrange(len(parents)), r.randrange(bound)
        assert tuple(s.path_predecessor(x, v)) == world.oracle_path_pred(x, v)


def test_random_tree_reporting_differential():
    r = random.Random(99)
    tree, world, parents = build_random(r, 512, 20000, 1 << 20, B=8, G=2, c=2)
    s = PathSearcher(tree)
    for _ in range(1000):
        v0 = r.randrange(512)
        v1 = r.choice(world.path(v0))
        lo = r.randrange(1 << 20)
        hi = min(lo + r.randrange(1 << 16), (1 << 20) - 1)
        got = sorted((tuple(k), v) for k, v in s.path_report(lo, hi, v0, v1))
        assert got == world.oracle_path_report(lo, hi, v0, v1)


def test_counters_are_per_edge_and_bounded():
    r = random.Random(5)
    tree, world, parents = build_random(r, 200, 10000, 1 << 32, B=8, G=2, c=2)
    cnt = SearchCounters()
    s = PathSearcher(tree, cnt)
    edges = 0
    for _ in range(500):
        v = r.randrange(200)
        before = cnt.locator_queries
        s.path_predecessor(r.randrange(1 << 32), v)
        assert cnt.locator_queries - before == tree.depth(v)
        edges += tree.depth(v)
    assert cnt.group_probes <= 3 * max(edges, 1)
    assert cnt.entries_touched <= 8 * tree.d * cnt.nodes


def test_reset_counters():
    t = CatalogTree([-1, 0], {1: [Key(1, 0)]})
    s = PathSearcher(t)
    s.path_predecessor(3, 1)
    assert s.instrumentation_counters()[0] == 1
    s.reset_counters()
    assert s.counters.as_dict() == dict.fromkeys(s.counters.as_dict(), 0)


@given(seed=st.integers(0, 10**6))
def test_report_after_updates(seed):
    r = random.Random(seed)
    parents = random_shape(r, 15, 3)
    tree = CatalogTree(parents, B=2, G=1, c=1, locator=r.choice(["bitset", "layered"]))
    world = OracleWorld(parents)
    s = PathSearcher(tree, debug=True)
    live, nid = [], 0
    for _ in range(120):
        if r.random() < 0.6 or not live:
            k, v = Key(r.randrange(100), nid), r.randrange(15)
            nid += 1
            tree.insert(k, v)
            world.insert(tuple(k), v)
            live.append((k, v))
        else:
            k, v = live.pop(r.randrange(len(live)))
            tree.delete(k, v)
            world.delete(tuple(k), v)
        v0 = r.randrange(15)
        v1 = r.choice(world.path(v0))
        lo, hi = sorted((r.randrange(100), r.randrange(100)))
        got = sorted((tuple(k), v) for k, v in s.path_report(lo, hi, v0, v1))
        assert got == world.oracle_path_report(lo, hi, v0, v1)
        assert len(got) == len(set(got))
