import random

import pytest
from hypothesis import given, strategies as st

from treecascade.errors import DomainError, DuplicateKeyError, NotFoundError, StructuralError
from treecascade.keys import Key
from treecascade.maxima import MaximaTree
from treecascade.oracle import OracleWorld

# root 0 with four children 1..4; child 2 has three children 5..7
STAR = [-1, 0, 0, 0, 0, 2, 2, 2]


def kids(mt, v):
    return mt.children[v]


class TestExamples:
    def test_single_insert(self):
        mt = MaximaTree(STAR)
        mt.minsert(7, 2, 3, 0)
        assert mt.node_max(2).key == Key(7, 0)
        assert mt.node_max(3).key.value == 7
        assert mt.node_max(1) is None and mt.node_max(4) is None
        assert (mt.node_max(2).f, mt.node_max(2).l) == (2, 3)

    def test_overlapping_intervals(self):
        mt = MaximaTree(STAR)
        world = OracleWorld(STAR)
        for key, f, l in [(Key(7, 0), 1, 3), (Key(9, 0), 3, 4), (Key(5, 0), 2, 2)]:
            mt.minsert(key, f, l, 0)
            world.minsert(key, f, l, 0)
        for c in kids(mt, 0):
            m = mt.node_max(c)
            assert (None if m is None else m.key) == world.oracle_path_maxima(c, c)[0][1]

    def test_delete_unique_max_falls_back(self):
        mt = MaximaTree(STAR)
        mt.minsert(9, 1, 4, 0)
        mt.minsert(4, 2, 2, 0)
        mt.mdelete(9, 0)
        assert mt.node_max(2).key.value == 4
        assert mt.node_max(1) is None

    def test_delete_non_max_leaves_ranks(self):
        mt = MaximaTree(STAR)
        # 4 shares both canonical nodes with 9, so it is max_u nowhere
        mt.minsert(9, 2, 3, 0)
        mt.minsert(4, 2, 3, 0)
        lt = mt.local[0]
        snapshot = (bytes(lt.W), list(lt.rank_key))
        mt.mdelete(4, 0)
        assert (bytes(lt.W), list(lt.rank_key)) == snapshot

    def test_depth_three_path(self):
        parents = [-1, 0, 0, 1, 1, 3, 3]
        mt = MaximaTree(parents)
        mt.minsert(11, 1, 1, 0)
        mt.minsert(5, 2, 2, 1)
        mt.minsert(8, 1, 1, 3)
        got = [(v, None if m is None else m.key.value) for v, m in mt.path_maxima(5)]
        assert got == [(5, 8), (3, None), (1, 11), (0, None)]

    def test_stab_predecessor(self):
        mt = MaximaTree(STAR)
        mt.minsert(7, 2, 3, 0)
        assert mt.stab_predecessor(0, 9, 3, 4).value == 7
        assert mt.stab_predecessor(0, 9, 4, 4) is None
        assert mt.stab_predecessor(0, 6, 1, 4) is None


class TestErrors:
    def test_degree_limit(self):
        with pytest.raises(StructuralError):
            MaximaTree([-1] + [0] * 9, d_max=8)

    def test_bad_interval(self):
        mt = MaximaTree(STAR)
        with pytest.raises(DomainError):
            mt.minsert(1, 0, 2, 0)
        with pytest.raises(DomainError):
            mt.minsert(1, 2, 5, 0)
        with pytest.raises(DomainError):
            mt.minsert(1, 1, 1, 4)  # a leaf has no children

    def test_duplicate_and_missing(self):
        mt = MaximaTree(STAR)
        mt.minsert(3, 1, 1, 0)
        with pytest.raises(DuplicateKeyError):
            mt.minsert(3, 2, 2, 0)
        with pytest.raises(NotFoundError):
            mt.mdelete(4, 0)

    def test_non_ancestor(self):
        mt = MaximaTree(STAR)
        with pytest.raises(DomainError):
            mt.path_maxima(1, 2)


@given(seed=st.integers(0, 10**6))
def test_random_workload_matches_replay(seed):
    r = random.Random(seed)
    n = r.randint(2, 40)
    parents = [-1]
    deg = [0]
    for v in range(1, n):
        p = r.choice([u for u in range(v) if deg[u] < 8])
        parents.append(p)
        deg[p] += 1
        deg.append(0)
    mt = MaximaTree(parents)
    world = OracleWorld(parents)
    internal = [v for v in range(n) if deg[v]]
    live = []
    for _ in range(80):
        if r.random() < 0.6 or not live:
            v = r.choice(internal)
            key = Key(r.randrange(30), r.randrange(3))
            if (key, v) in world.intervals:
                continue
            f = r.randint(1, deg[v])
            l = r.randint(f, deg[v])
            mt.minsert(key, f, l, v)
            world.minsert(key, f, l, v)
            live.append((key, v))
        else:
            key, v = live.pop(r.randrange(len(live)))
            mt.mdelete(key, v)
            world.mdelete(key, v)
        v0 = r.randrange(n)
        v1 = r.choice(world.path(v0))
        got = [(v, None if m is None else m.key) for v, m in mt.path_maxima(v0, v1)]
        assert got == world.oracle_path_maxima(v0, v1)
    assert mt.audit() == []


def test_add_children_preserves_intervals():
    mt = MaximaTree([-1, 0, 0])
    mt.minsert(5, 1, 2, 0)
    new = mt.add_children(0, 2)
    assert len(new) == 2
    assert mt.interval(5, 0) == (1, 2)
    assert mt.node_max(new[0]) is None
    mt.minsert(6, 2, 4, 0)
    assert [mt.node_max(c).key.value for c in (1, 2)] == [5, 6]
    assert mt.audit() == []


def test_skip_rerank_fault_is_visible():
    mt = MaximaTree(STAR, faults=["skip_rerank"])
    mt.minsert(9, 1, 1, 0)
    mt.mdelete(9, 0)
    assert mt.node_max(1) is not None
    assert mt.audit()
