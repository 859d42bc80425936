"""Path predecessor search and path range reporting over a :class:`CatalogTree`.

The walk starts with one ordinary search in the augmented catalog of the
start node and then climbs: at every parent it asks the node's locator for
one augmented entry between the images of the two bracketing up-linked
entries, and, when one exists, finishes with a short search inside the
group holding it.  The number of locator calls equals the number of path
edges.
"""
from bisect import bisect_right
from dataclasses import dataclass, fields
from typing import Iterator, NamedTuple, Optional

from .blockindex import AC, C, UP
from .errors import DomainError
from .keys import Key, probe_high, probe_low, unpack


def _bisect_cost(n):
    """Comparisons made by a binary search over ``n`` sorted keys."""
    return n.bit_length()


@dataclass
class SearchCounters:
    """Operation counts accumulated by queries sharing this object.

    ``locator_queries`` counts locator calls (one per path edge),
    ``group_probes`` counts groups inspected after a locator hit,
    ``entries_touched`` counts entries visited outside the initial search and
    outside reported output, ``comparisons`` counts key comparisons including
    the initial search, and ``initial_comparisons`` the share spent there.
    """

    queries: int = 0
    nodes: int = 0
    locator_queries: int = 0
    group_probes: int = 0
    entries_touched: int = 0
    comparisons: int = 0
    initial_comparisons: int = 0

    def reset(self):
        for f in fields(self):
            setattr(self, f.name, 0)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class PathResult(NamedTuple):
    pred: Optional[Key]
    pred_owner: Optional[int]
    succ: Optional[Key]
    succ_owner: Optional[int]


def _bracket_ac(nd, q, cnt):
    """Predecessor and successor of probe ``q`` in ``AC(nd)`` by direct search."""
    groups = nd.groups
    if not groups:
        return None, None
    gi = bisect_right(nd.gfirst, q) - 1
    cost = _bisect_cost(len(nd.gfirst))
    if gi < 0:
        cnt.initial_comparisons += cost
        cnt.comparisons += cost
        return None, groups[0].entries[0]
    g = groups[gi]
    i = bisect_right(g.keys, q) - 1
    cost += _bisect_cost(len(g.keys))
    cnt.initial_comparisons += cost
    cnt.comparisons += cost
    pred = g.entries[i]
    if i + 1 < len(g.entries):
        succ = g.entries[i + 1]
    else:
        succ = g.next.entries[0] if g.next is not None else None
    return pred, succ


def _bracket_from(e, q, cnt):
    """Predecessor and successor of ``q`` in the augmented catalog holding AC entry ``e``."""
    g = e.group
    cnt.group_probes += 1
    while True:
        cnt.comparisons += 1
        if q < g.keys[0] and g.prev is not None:
            g = g.prev
            cnt.group_probes += 1
            continue
        nxt = g.next
        if nxt is not None:
            cnt.comparisons += 1
            if nxt.keys[0] <= q:
                g = nxt
                cnt.group_probes += 1
                continue
        break
    i = bisect_right(g.keys, q) - 1
    cost = _bisect_cost(len(g.keys))
    cnt.comparisons += cost
    cnt.entries_touched += cost
    pred = g.entries[i] if i >= 0 else None
    if i + 1 < len(g.entries):
        succ = g.entries[i + 1]
    else:
        succ = g.next.entries[0] if g.next is not None else None
    return pred, succ


class PathSearcher:
    """Query engine bound to one catalog tree.

    With ``debug=True`` every step re-checks the walk invariants against a
    brute-force union of the catalogs seen so far (slow; for tests).
    """

    def __init__(self, tree, counters=None, debug=False):
        self.tree = tree
        self.counters = counters if counters is not None else SearchCounters()
        self.debug = debug

    def instrumentation_counters(self):
        c = self.counters
        return c.locator_queries, c.group_probes, c.entries_touched

    def reset_counters(self):
        self.counters.reset()

    # one bracket, one step up

    def _climb(self, nd, L, R, q):
        """Move bracket (L, R) of ``q`` from ``nd`` to its parent.

        L and R are entries of the extended catalog of ``nd`` with
        L <= q < R and no AC entry strictly inside.  Returns the parent
        bracket and the parent's AC predecessor/successor if the locator
        found an AC entry in range (else None, None).
        """
        tree = self.tree
        cnt = self.counters
        b1 = None
        if L is not None:
            b1 = tree.pred_marked(L, UP)
        b2 = None
        if R is not None:
            b2 = tree.succ_marked(R, UP)
        cnt.entries_touched += 2
        u = tree.nodes[nd.parent]
        b1p = b1.up if b1 is not None else None
        b2p = b2.up if b2 is not None else None
        cnt.locator_queries += 1
        e = tree._any_between(u, b1p, b2p, AC)
        cnt.entries_touched += 1
        cnt.comparisons += 1
        if e is None:
            return u, b1p, b2p, None, None, False
        a, s = _bracket_from(e, q, cnt)
        return u, a, s, a, s, True

    def _check_bracket(self, nd, L, R, q):
        keys = [e.key for e in self.tree.acbar_entries(nd.id)]
        lo = L.key if L is not None else -1
        hi = R.key if R is not None else float("inf")
        assert lo <= q < hi, "bracket does not contain the probe"
        for e in self.tree.acbar_entries(nd.id):
            if e.in_ac:
                assert not lo < e.key < hi, "AC entry strictly inside the bracket"
        assert L is None or L.key in keys
        assert R is None or R.key in keys

    # searching

    def search(self, q, v0):
        """Raw walk for packed probe ``q``: (largest entry <= q, smallest entry > q)."""
        tree = self.tree
        nd = tree._check_node(v0)
        cnt = self.counters
        cnt.queries += 1
        L, R = _bracket_ac(nd, q, cnt)
        p, s = L, R
        cnt.nodes += 1
        seen = [v0] if self.debug else None
        while nd.parent is not None:
            nd, L, R, a, b, hit = self._climb(nd, L, R, q)
            cnt.nodes += 1
            if hit:
                if a is not None and (p is None or a.key > p.key):
                    p = a
                if b is not None and (s is None or b.key < s.key):
                    s = b
                cnt.comparisons += 2
            if self.debug:
                seen.append(nd.id)
                self._check_bracket(nd, L, R, q)
                self._check_union(seen, q, p, s)
        return p, s

    def path_predecessor(self, x, v0):
        """Predecessor and successor of value ``x`` in the union of ``C(v)`` on v0 -> root.

        The predecessor is the largest key with value <= x.  The successor is
        the smallest key with value > x, except that a stored x is its own
        successor (then both fields name the same key).
        """
        p, s = self.search(probe_high(x), v0)
        if p is not None and (p.key >> 32) == x:
            s = p
        return PathResult(
            unpack(p.key) if p is not None else None,
            p.owner if p is not None else None,
            unpack(s.key) if s is not None else None,
            s.owner if s is not None else None,
        )

    def _check_union(self, seen, q, p, s):
        keys = sorted(k.packed() for v in seen for k in self.tree.ac(v))
        lower = [k for k in keys if k <= q]
        upper = [k for k in keys if k > q]
        want_p = lower[-1] if lower else None
        want_s = upper[0] if upper else None
        assert (p.key if p else None) == want_p, "running predecessor wrong"
        assert (s.key if s else None) == want_s, "running successor wrong"

    # reporting

    def path_report(self, x_lo, x_hi, v0, v1=None) -> Iterator:
        """Yield ``(Key, node)`` for every key of ``C(v)`` in [x_lo, x_hi], v on v0 -> v1."""
        tree = self.tree
        if x_lo > x_hi:
            raise DomainError("x_lo must not exceed x_hi")
        nd = tree._check_node(v0)
        if v1 is None:
            v1 = tree.root
        tree._check_node(v1)
        if not tree.is_ancestor(v1, v0):
            raise DomainError(f"node {v1} is not an ancestor of {v0}")
        return self._report(nd, v1, probe_low(x_lo), probe_high(x_hi))

    def _report(self, nd, v1, ql, qh):
        tree = self.tree
        cnt = self.counters
        cnt.queries += 1
        Ll, Rl = _bracket_ac(nd, ql, cnt)
        Lh, Rh = _bracket_ac(nd, qh, cnt)
        while True:
            cnt.nodes += 1
            if self.debug:
                self._check_bracket(nd, Ll, Rl, ql)
                self._check_bracket(nd, Lh, Rh, qh)
            yield from self._emit(nd, Rl, Lh, ql, qh)
            if nd.id == v1:
                return
            nd2, Ll, Rl, _, _, _ = self._climb(nd, Ll, Rl, ql)
            _, Lh, Rh, _, _, _ = self._climb(nd, Lh, Rh, qh)
            nd = nd2

    def _emit(self, nd, lo, hi, ql, qh):
        """All proper entries of ``nd`` between ``lo`` and ``hi`` (inclusive)."""
        if lo is None or hi is None or lo.key > hi.key:
            return
        tree = self.tree
        cnt = self.counters
        cnt.locator_queries += 1
        cnt.comparisons += 1
        em = tree._any_between(nd, lo, hi, C)
        if em is None:
            return
        v = nd.id
        yield unpack(em.key), v
        f = em
        while True:
            f = self._step_marked(f, C, -1)
            cnt.comparisons += 1
            if f is None or f.key <= ql:
                break
            yield unpack(f.key), v
        f = em
        while True:
            f = self._step_marked(f, C, 1)
            cnt.comparisons += 1
            if f is None or f.key > qh:
                break
            yield unpack(f.key), v

    def _step_marked(self, e, m, direction):
        """Nearest entry with mark ``m`` strictly before/after ``e`` in its node."""
        tree = self.tree
        blk = e.leaf.block
        li, pos = blk.locate(e)
        if direction > 0:
            f = blk.succ_at(li, pos + 1, m)
            return f if f is not None else tree._first_marked_after(blk, m)
        f = blk.pred_at(li, pos - 1, m)
        return f if f is not None else tree._last_marked_before(blk, m)


def path_predecessor(tree, x, v0, counters=None):
    return PathSearcher(tree, counters).path_predecessor(x, v0)


def path_report(tree, x_lo, x_hi, v0, v1=None, counters=None):
    return list(PathSearcher(tree, counters).path_report(x_lo, x_hi, v0, v1))
