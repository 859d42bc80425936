"""Geometric applications on a wide-fanout segment tree.

The skeleton's leaves are elementary slabs of a position line: one point
slab per segment endpoint and one gap slab between consecutive endpoints.
Coordinates are integers (callers map other types to rank space first);
``-inf``/``+inf`` are allowed as segment ends and map to the extremes of
the position line.  A segment is stored at the nodes whose range it covers
while not covering the parent's range, so the segments containing ``x`` are
exactly those stored on the path from ``x``'s leaf to the root.  The root
itself never stores: a segment covering everything is stored at all of the
root's children.

New endpoints split the gap leaf holding them into three children in place;
the skeleton is rebuilt from scratch when the endpoint count doubles or
halves, when the height drifts three levels past its balanced height, or
when a gap runs out of free positions.
"""
import math
from bisect import bisect_left, insort
from typing import NamedTuple, Optional

from .catalog import CatalogTree
from .errors import DomainError, DuplicateKeyError, NotFoundError
from .keys import Key, probe_high, probe_low, unpack
from .maxima import MaximaTree
from .search import PathSearcher, SearchCounters

SPACING = 1 << 20
MINPOS = -(1 << 62)
MAXPOS = 1 << 62
COPY_BITS = 8
MAX_SEGMENT_ID = (1 << (32 - COPY_BITS)) - 1
VALUE_LIMIT = 1 << 32
INF = float("inf")


class HSegment(NamedTuple):
    """Horizontal segment ``[x_left, x_right] x {y}`` with optional priority."""

    x_left: float
    x_right: float
    y: int
    id: int
    p: Optional[int] = None


def default_fanout(n_hat):
    return max(2, math.ceil(math.sqrt(math.log2(max(n_hat, 2)))))


class SegmentTreeMap:
    """Skeleton of the segment tree: node ranges over the position line."""

    def __init__(self, fanout, coords=()):
        if fanout < 2:
            raise ValueError("fanout must be >= 2")
        self.fanout = fanout
        self.build(sorted(set(coords)))

    def build(self, coords):
        self.coords = list(coords)
        n = len(self.coords)
        base = -(n + 1) * SPACING // 2
        self.cpos = [base + (i + 1) * SPACING for i in range(n)]
        self.parent = []
        self.children = []
        self.lo = []
        self.hi = []
        self.depth = []
        self.leaf_at = {}
        leaves = []
        start = MINPOS
        for p in self.cpos:
            leaves.append(self._new(start, p - 1))
            leaves.append(self._new(p, p))
            start = p + 1
        leaves.append(self._new(start, MAXPOS))
        for u in leaves:
            self.leaf_at[self.lo[u]] = u
        level = leaves
        if len(level) == 1:
            # keep the root internal: it never stores segments itself
            u = self._new(MINPOS, MAXPOS)
            self.parent[level[0]] = u
            self.children[u] = [level[0]]
            level = [u]
        while len(level) > 1:
            m = len(level)
            k = -(-m // self.fanout)
            nxt = []
            for j in range(k):
                part = level[j * m // k:(j + 1) * m // k]
                u = self._new(self.lo[part[0]], self.hi[part[-1]])
                for c in part:
                    self.parent[c] = u
                self.children[u] = part
                nxt.append(u)
            level = nxt
        self.root = level[0]
        # depths, top-down
        order = [self.root]
        self.depth[self.root] = 0
        for u in order:
            for c in self.children[u]:
                self.depth[c] = self.depth[u] + 1
                order.append(c)
        self.height = max(self.depth)
        self.base_height = self.height
        self.built_count = n

    def _new(self, lo, hi):
        u = len(self.parent)
        self.parent.append(None)
        self.children.append([])
        self.lo.append(lo)
        self.hi.append(hi)
        self.depth.append(0)
        return u

    def parents(self):
        return [p for p in self.parent]

    def position(self, x):
        """Position of endpoint coordinate ``x`` (must already be present)."""
        if x == -INF:
            return MINPOS
        if x == INF:
            return MAXPOS
        i = bisect_left(self.coords, x)
        if i < len(self.coords) and self.coords[i] == x:
            return self.cpos[i]
        raise KeyError(x)

    def has_coord(self, x):
        if x in (INF, -INF):
            return True
        i = bisect_left(self.coords, x)
        return i < len(self.coords) and self.coords[i] == x

    def locate(self, x):
        """Leaf whose slab contains coordinate ``x``."""
        i = bisect_left(self.coords, x)
        if i < len(self.coords) and self.coords[i] == x:
            return self.leaf_at[self.cpos[i]]
        start = self.cpos[i - 1] + 1 if i > 0 else MINPOS
        return self.leaf_at[start]

    def path(self, x):
        u = self.locate(x)
        out = []
        while u is not None:
            out.append(u)
            u = self.parent[u]
        return out

    def add_coord(self, x):
        """Split the gap leaf holding ``x`` around a new point slab.

        Returns the gap leaf that gained three children, or None when the gap
        has no free position (the caller must rebuild).
        """
        g = self.locate(x)
        a, b = self.lo[g], self.hi[g]
        if b - a < 2:
            return None
        r = (a + b) // 2
        kids = [self._new(a, r - 1), self._new(r, r), self._new(r + 1, b)]
        for c in kids:
            self.parent[c] = g
            self.depth[c] = self.depth[g] + 1
            self.leaf_at[self.lo[c]] = c
        self.children[g] = kids
        self.height = max(self.height, self.depth[g] + 1)
        i = bisect_left(self.coords, x)
        self.coords.insert(i, x)
        self.cpos.insert(i, r)
        return g

    def decompose(self, lo, hi):
        """Canonical nodes of position range [lo, hi] as (parent, f, l) child-index runs (0-based)."""
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            kids = self.children[v]
            run = None
            for j, c in enumerate(kids):
                clo, chi = self.lo[c], self.hi[c]
                if chi < lo or clo > hi:
                    continue
                if lo <= clo and chi <= hi:
                    if run is not None and run[1] == j - 1:
                        run[1] = j
                    else:
                        if run is not None:
                            out.append((v, run[0], run[1]))
                        run = [j, j]
                else:
                    stack.append(c)
            if run is not None:
                out.append((v, run[0], run[1]))
        return out


class _SkeletonStore:
    """Segments on a skeleton plus one attached per-node structure."""

    def __init__(self, fanout=None, capacity=None):
        self.n_hat = max(capacity or 0, 16)
        self.fixed_fanout = fanout
        self.segments = {}
        self.endpoints = {}
        self.finite = 0  # distinct finite endpoint coordinates
        self.counters = SearchCounters()
        self.rebuilds = 0
        self.skel = SegmentTreeMap(self._fanout(), ())
        self._attach()

    def _fanout(self):
        return self.fixed_fanout or default_fanout(self.n_hat)

    # hooks
    def _attach(self):
        raise NotImplementedError

    def _on_children(self, g, k):
        raise NotImplementedError

    def _store(self, seg, runs):
        raise NotImplementedError

    def _unstore(self, seg):
        raise NotImplementedError

    # maintenance

    def _validate(self, seg):
        if not isinstance(seg.id, int) or not 0 <= seg.id <= MAX_SEGMENT_ID:
            raise DomainError(f"segment id must be in [0, {MAX_SEGMENT_ID}]")
        if not seg.x_left <= seg.x_right:
            raise DomainError("x_left must not exceed x_right")
        for x in (seg.x_left, seg.x_right):
            if x not in (INF, -INF) and not isinstance(x, int):
                raise DomainError("coordinates must be integers (or +-inf)")
        if seg.x_left == INF or seg.x_right == -INF:
            raise DomainError("segment lies entirely at infinity")

    def _rebuild(self):
        self.rebuilds += 1
        coords = sorted(x for x in self.endpoints if x not in (INF, -INF))
        self.n_hat = max(self.n_hat, 2 * len(self.segments), 16)
        self.skel = SegmentTreeMap(self._fanout(), coords)
        self._attach()
        for seg in self.segments.values():
            self._place(seg)

    def _place(self, seg):
        sk = self.skel
        runs = sk.decompose(sk.position(seg.x_left), sk.position(seg.x_right))
        self._store(seg, runs)

    def _need_rebuild(self):
        sk = self.skel
        live = self.finite
        base = max(sk.built_count, 8)
        return (live > 2 * base or (sk.built_count > 8 and 2 * live < sk.built_count)
                or sk.height > sk.base_height + 3)

    def insert_segment(self, seg):
        seg = HSegment(*seg)
        self._validate(seg)
        if seg.id in self.segments:
            raise DuplicateKeyError(f"segment id {seg.id} already present")
        self._check_value(seg)
        self.segments[seg.id] = seg
        for x in {seg.x_left, seg.x_right}:
            if x not in self.endpoints and x not in (INF, -INF):
                self.finite += 1
            self.endpoints[x] = self.endpoints.get(x, 0) + 1
        rebuild = False
        for x in (seg.x_left, seg.x_right):
            if not self.skel.has_coord(x):
                g = self.skel.add_coord(x)
                if g is None:
                    rebuild = True
                    break
                self._on_children(g, 3)
        if rebuild or self._need_rebuild():
            self._rebuild()
        else:
            self._place(seg)

    def delete_segment(self, seg_id):
        seg = self.segments.pop(seg_id, None)
        if seg is None:
            raise NotFoundError(f"unknown segment id {seg_id}")
        self._unstore(seg)
        for x in {seg.x_left, seg.x_right}:
            self.endpoints[x] -= 1
            if not self.endpoints[x]:
                del self.endpoints[x]
                if x not in (INF, -INF):
                    self.finite -= 1
        if self._need_rebuild():
            self._rebuild()

    def _check_value(self, seg):
        pass

    def __len__(self):
        return len(self.segments)

    def copies(self, seg_id):
        """Nodes storing segment ``seg_id``."""
        raise NotImplementedError

    def path_length(self, x):
        return len(self.skel.path(x)) - 1


class _CatalogStore(_SkeletonStore):
    """Skeleton whose nodes carry a :class:`CatalogTree` of per-segment keys."""

    def __init__(self, fanout=None, capacity=None, B=None, G=None, c=4, locator="bitset",
                 faults=()):
        self.cat_params = dict(B=B, G=G, c=c, locator=locator, faults=tuple(faults))
        self.where = {}
        super().__init__(fanout, capacity)

    def _value(self, seg):
        raise NotImplementedError

    def _attach(self):
        sk = self.skel
        d = max(sk.fanout, 3)
        self.tree = CatalogTree(sk.parents(), {}, d=d, capacity=self.n_hat, **self.cat_params)
        self.searcher = PathSearcher(self.tree, self.counters)
        self.where = {}

    def _on_children(self, g, k):
        for _ in range(k):
            self.tree.add_child(g)

    def _store(self, seg, runs):
        sk = self.skel
        val = self._value(seg)
        placed = []
        j = 0
        for v, f, l in runs:
            for c in sk.children[v][f:l + 1]:
                if j >> COPY_BITS:
                    raise DomainError("segment stored in too many nodes")
                key = Key(val, (seg.id << COPY_BITS) | j)
                self.tree.insert(key, c)
                placed.append((c, key))
                j += 1
        self.where[seg.id] = placed

    def _unstore(self, seg):
        for c, key in self.where.pop(seg.id):
            self.tree.delete(key, c)

    def copies(self, seg_id):
        return [c for c, _ in self.where.get(seg_id, ())]

    def _check_value(self, seg):
        val = self._value(seg)
        if not isinstance(val, int) or not 0 <= val < VALUE_LIMIT:
            raise DomainError(f"key value must be an integer in [0, 2^32), got {val!r}")

    def _segment_of(self, entry):
        if entry is None:
            return None
        return self.segments[(entry.key & 0xFFFFFFFF) >> COPY_BITS]

    def audit(self):
        return self.tree.audit()


class SegmentStore(_CatalogStore):
    """Horizontal segments keyed by y: vertical ray shooting and intersection reporting.

    By default a segment at exactly ``q_y`` counts as below (and above) the
    query point; ``strict=True`` excludes it.  Ties in y go to the larger
    segment id when shooting down and the smaller id when shooting up.
    """

    def __init__(self, segments=(), *, strict=False, **params):
        self.strict = strict
        super().__init__(**params)
        for s in segments:
            self.insert_segment(s)

    def _value(self, seg):
        return seg.y

    def ray_shoot(self, qx, qy, strict=None):
        """Segment directly below (or at) point (qx, qy), or None."""
        strict = self.strict if strict is None else strict
        if strict:
            qy -= 1
        if qy < 0:
            return None
        leaf = self.skel.locate(qx)
        p, _ = self.searcher.search(probe_high(qy), leaf)
        return self._segment_of(p)

    def ray_shoot_above(self, qx, qy, strict=None):
        strict = self.strict if strict is None else strict
        if strict:
            qy += 1
        leaf = self.skel.locate(qx)
        _, s = self.searcher.search(probe_low(qy), leaf)
        return self._segment_of(s)

    def segment_intersections(self, xq, y1, y2):
        """Segments crossing the vertical segment {xq} x [y1, y2]."""
        if y1 > y2:
            raise DomainError("y1 must not exceed y2")
        lo = max(y1, 0)
        hi = min(y2, VALUE_LIMIT - 1)
        if lo > hi:
            return []
        leaf = self.skel.locate(xq)
        out = []
        for key, _node in self.searcher.path_report(lo, hi, leaf, self.tree.root):
            out.append(self.segments[key.id >> COPY_BITS])
        return out


class StabMaxCatalog(_CatalogStore):
    """Stabbing-max by one path predecessor search over priority catalogs."""

    variant = "B"

    def _value(self, seg):
        return seg.p

    def stab_max_query(self, x):
        leaf = self.skel.locate(x)
        p, _ = self.searcher.search(probe_high(VALUE_LIMIT - 1), leaf)
        seg = self._segment_of(p)
        return None if seg is None else (seg, seg.p)


class StabMaxMaxima(_SkeletonStore):
    """Stabbing-max by per-catalog path maxima (fanout capped at ``d_max``)."""

    variant = "A"

    def __init__(self, fanout=None, capacity=None, d_max=8, faults=()):
        self.d_max = d_max
        self.faults = faults
        self.where = {}
        super().__init__(fanout, capacity)

    def _fanout(self):
        return min(super()._fanout(), self.d_max)

    def _attach(self):
        sk = self.skel
        self.mt = MaximaTree(sk.parents(), d_max=max(self.d_max, 3), faults=self.faults)
        self.where = {}

    def _on_children(self, g, k):
        self.mt.add_children(g, k)

    def _check_value(self, seg):
        if not isinstance(seg.p, int) or not 0 <= seg.p < VALUE_LIMIT:
            raise DomainError("priority must be an integer in [0, 2^32)")

    def _store(self, seg, runs):
        key = Key(seg.p, seg.id)
        for v, f, l in runs:
            self.mt.minsert(key, f + 1, l + 1, v)
        self.where[seg.id] = [v for v, _, _ in runs]

    def _unstore(self, seg):
        key = Key(seg.p, seg.id)
        for v in self.where.pop(seg.id):
            self.mt.mdelete(key, v)

    def copies(self, seg_id):
        out = []
        for v in self.where.get(seg_id, ()):
            iv = self.mt.interval(Key(self.segments[seg_id].p, seg_id), v)
            out.extend(self.skel.children[v][iv[0] - 1:iv[1]])
        return out

    def stab_max_query(self, x):
        leaf = self.skel.locate(x)
        best = None
        for _node, m in self.mt.path_maxima(leaf, self.skel.root):
            self.counters.nodes += 1
            if m is not None and (best is None or m.key > best):
                best = m.key
        if best is None:
            return None
        seg = self.segments[best.id]
        return seg, seg.p

    def audit(self):
        return self.mt.audit()


class StabMax:
    """Facade over the two stabbing-max engines (``variant`` "A" or "B")."""

    def __new__(cls, variant="B", **params):
        if variant == "A":
            return StabMaxMaxima(**params)
        if variant == "B":
            return StabMaxCatalog(**params)
        raise ValueError("variant must be 'A' or 'B'")


class RetroactiveSearch:
    """Predecessor search over a key set with a retroactive insertion/deletion timeline.

    Each event keeps ``key`` alive during the half-open time interval
    ``[t_insert, t_delete)``; ``t_delete`` may be ``inf``.
    """

    def __init__(self, **params):
        self.store = SegmentStore(**params)
        self.events = {}
        self.next_id = 1

    def retro_insert(self, key, t_insert, t_delete=INF):
        if not t_insert < t_delete:
            raise DomainError("t_insert must precede t_delete")
        if not isinstance(t_insert, int) or not (isinstance(t_delete, int) or t_delete == INF):
            raise DomainError("times must be integers (t_delete may be inf)")
        eid = self.next_id
        self.next_id += 1
        right = t_delete - 1 if t_delete != INF else INF
        self.store.insert_segment(HSegment(t_insert, right, key, eid))
        self.events[eid] = (key, t_insert, t_delete)
        return eid

    def retro_delete(self, eid):
        if eid not in self.events:
            raise NotFoundError(f"unknown event {eid}")
        self.store.delete_segment(eid)
        del self.events[eid]

    def retro_query(self, q, t):
        """Largest key <= q alive at time ``t``, or None."""
        if q < 0:
            return None
        seg = self.store.ray_shoot(t, min(q, VALUE_LIMIT - 1))
        return None if seg is None else seg.y

    def audit(self):
        return self.store.audit()
