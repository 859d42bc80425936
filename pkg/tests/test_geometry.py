import random

import pytest
from hypothesis import given, strategies as st

from treecascade.errors import DomainError, DuplicateKeyError, NotFoundError
from treecascade.geometry import (HSegment, RetroactiveSearch, SegmentStore, SegmentTreeMap,
                                  StabMax, StabMaxCatalog, StabMaxMaxima)
from treecascade.oracle import OracleWorld

INF = float("inf")


def two_segments(**kw):
    return SegmentStore([HSegment(0, 10, 1, 1), HSegment(3, 7, 5, 2)], **kw)


class TestRayShooting:
    def test_example(self):
        assert two_segments().ray_shoot(4, 6).id == 2

    def test_outside_short_segment(self):
        assert two_segments().ray_shoot(8, 6).id == 1

    def test_at_level_counts_unless_strict(self):
        st_ = two_segments()
        assert st_.ray_shoot(4, 5).id == 2
        assert st_.ray_shoot(4, 5, strict=True).id == 1
        assert st_.ray_shoot(4, 0) is None

    def test_shoot_up(self):
        st_ = two_segments()
        assert st_.ray_shoot_above(4, 2).id == 2
        assert st_.ray_shoot_above(4, 6) is None
        assert st_.ray_shoot_above(11, 0) is None

    def test_endpoints_are_closed(self):
        st_ = two_segments()
        assert st_.ray_shoot(7, 9).id == 2
        assert st_.ray_shoot(10, 9).id == 1
        assert st_.ray_shoot(-1, 9) is None

    def test_delete(self):
        st_ = two_segments()
        st_.delete_segment(2)
        assert st_.ray_shoot(4, 6).id == 1
        with pytest.raises(NotFoundError):
            st_.delete_segment(2)

    def test_validation(self):
        st_ = two_segments()
        with pytest.raises(DuplicateKeyError):
            st_.insert_segment(HSegment(1, 2, 3, 1))
        with pytest.raises(DomainError):
            st_.insert_segment(HSegment(5, 2, 3, 9))
        with pytest.raises(DomainError):
            st_.insert_segment(HSegment(1, 2, -3, 9))


class TestIntersections:
    def test_both(self):
        assert sorted(s.id for s in two_segments().segment_intersections(4, 0, 6)) == [1, 2]

    def test_only_long(self):
        assert [s.id for s in two_segments().segment_intersections(8, 0, 6)] == [1]

    def test_empty_band(self):
        assert two_segments().segment_intersections(4, 2, 4) == []


class TestStabMax:
    SEGS = [HSegment(1, 5, 10, 1, 7), HSegment(3, 9, 20, 2, 4)]

    @pytest.mark.parametrize("variant", ["A", "B"])
    def test_examples(self, variant):
        sm = StabMax(variant)
        for s in self.SEGS:
            sm.insert_segment(s)
        assert sm.stab_max_query(4)[1] == 7
        assert sm.stab_max_query(8)[1] == 4
        assert sm.stab_max_query(12) is None

    def test_facade_types(self):
        assert isinstance(StabMax("A"), StabMaxMaxima)
        assert isinstance(StabMax("B"), StabMaxCatalog)
        with pytest.raises(ValueError):
            StabMax("C")

    def test_variants_agree_randomly(self):
        r = random.Random(4)
        a, b = StabMax("A", fanout=4), StabMax("B", fanout=4)
        live = []
        for i in range(1, 600):
            if r.random() < 0.75 or not live:
                x1, x2 = sorted((r.randrange(200), r.randrange(200)))
                s = HSegment(x1, x2, 0, i, r.randrange(50))
                a.insert_segment(s)
                b.insert_segment(s)
                live.append(i)
            else:
                sid = live.pop(r.randrange(len(live)))
                a.delete_segment(sid)
                b.delete_segment(sid)
            x = r.randrange(-5, 205)
            ra, rb = a.stab_max_query(x), b.stab_max_query(x)
            assert (ra and ra[0].id) == (rb and rb[0].id)
        assert a.audit() == [] and b.audit() == []


class TestRetro:
    def test_example(self):
        rs = RetroactiveSearch()
        rs.retro_insert(8, 1, 5)
        assert rs.retro_query(9, 3) == 8
        assert rs.retro_query(9, 5) is None
        assert rs.retro_query(7, 3) is None

    def test_open_ended_and_delete(self):
        rs = RetroactiveSearch()
        e1 = rs.retro_insert(8, 1, 5)
        e2 = rs.retro_insert(12, 2)
        assert (e1, e2) == (1, 2)
        assert rs.retro_query(20, 10**9) == 12
        rs.retro_delete(e2)
        assert rs.retro_query(20, 3) == 8

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            RetroactiveSearch().retro_insert(1, 5, 5)


class TestSkeleton:
    def test_full_span_stored_at_root_children(self):
        st_ = SegmentStore([HSegment(0, 3, 1, 1), HSegment(5, 8, 2, 2)], fanout=3)
        st_.insert_segment(HSegment(-INF, INF, 3, 3))
        sk = st_.skel
        assert sorted(st_.copies(3)) == sorted(sk.children[sk.root])

    @given(coords=st.sets(st.integers(-50, 50), min_size=1, max_size=30),
           fanout=st.integers(2, 6), data=st.data())
    def test_decomposition_partitions_range(self, coords, fanout, data):
        sk = SegmentTreeMap(fanout, coords)
        cs = sorted(coords)
        a = data.draw(st.sampled_from(cs))
        b = data.draw(st.sampled_from([c for c in cs if c >= a]))
        lo, hi = sk.position(a), sk.position(b)
        covered = []
        for v, f, l in sk.decompose(lo, hi):
            assert v is not None
            for c in sk.children[v][f:l + 1]:
                covered.append((sk.lo[c], sk.hi[c]))
                # canonical: the parent is not itself inside the range
                assert not (lo <= sk.lo[v] and sk.hi[v] <= hi)
        covered.sort()
        assert covered[0][0] == lo and covered[-1][1] == hi
        for (_, h1), (l2, _) in zip(covered, covered[1:]):
            assert h1 + 1 == l2

    def test_dynamic_coords_and_rebuilds(self):
        r = random.Random(8)
        st_ = SegmentStore(fanout=3)
        world = OracleWorld([-1])
        for i in range(1, 400):
            x1, x2 = sorted((r.randrange(10**6), r.randrange(10**6)))
            s = HSegment(x1, x2, r.randrange(1000), i)
            st_.insert_segment(s)
            world.add_segment(s)
            if i % 7 == 0:
                sid = r.choice(list(world.segments))
                st_.delete_segment(sid)
                world.remove_segment(sid)
        assert st_.rebuilds > 0
        for _ in range(300):
            x, y = r.randrange(10**6), r.randrange(1000)
            got = st_.ray_shoot(x, y)
            assert (got and got.id) == world.oracle_ray_shoot(x, y)
        assert st_.audit() == []


@given(seed=st.integers(0, 10**6))
def test_segment_store_matches_oracle(seed):
    r = random.Random(seed)
    st_ = SegmentStore(fanout=r.choice([2, 3, 5]), B=4, G=1, c=1)
    world = OracleWorld([-1])
    for i in range(1, 80):
        if r.random() < 0.7 or not world.segments:
            x1, x2 = sorted((r.randrange(30), r.randrange(30)))
            if r.random() < 0.1:
                x1 = -INF
            s = HSegment(x1, x2, r.randrange(20), i)
            st_.insert_segment(s)
            world.add_segment(s)
        else:
            sid = r.choice(sorted(world.segments))
            st_.delete_segment(sid)
            world.remove_segment(sid)
        x, y = r.randrange(-2, 32), r.randrange(22)
        got = st_.ray_shoot(x, y)
        assert (got and got.id) == world.oracle_ray_shoot(x, y)
        got = st_.ray_shoot_above(x, y)
        assert (got and got.id) == world.oracle_ray_shoot_above(x, y)
        y1, y2 = sorted((r.randrange(22), r.randrange(22)))
        assert sorted(s.id for s in st_.segment_intersections(x, y1, y2)) == \
            world.oracle_intersections(x, y1, y2)
