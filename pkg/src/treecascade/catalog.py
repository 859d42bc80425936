"""Catalog tree: catalogs, augmented catalogs and extended catalogs per node.

Every node ``v`` carries three nested layers of entries:

* ``C(v)``: the node's own keys (proper entries);
* ``AC(v)``: ``C(v)`` plus bridge copies of keys from ``AC(parent(v))``
  (improper entries), kept dense enough that between two consecutive bridges
  of a child there are at most ``c * d`` parent entries;
* ``AC̄(v)``: ``AC(v)`` plus copies of the first entry of every block of each
  child's extended catalog.

The extended catalog is cut into blocks (see :mod:`blockindex`), each block
first entry and each improper entry is linked to its copy one level up, and
``AC(v)`` is additionally cut into groups of ``G``..``4G`` entries for the
short local searches done by the path walk.
"""
import math
from bisect import bisect_left, bisect_right
from operator import attrgetter

from .blockindex import AC, C, UP, Block, BlockShape, Entry, mark_id
from .errors import (
    DomainError,
    DuplicateKeyError,
    InvalidHandleError,
    NotFoundError,
    StructuralError,
)
from .keys import Key, as_packed, unpack
from .locator import NodeLocator

FAULTS = frozenset({"skip_bridge", "skip_label_split"})
_bykey = attrgetter("key")


def default_block_size(n_hat):
    return max(8, math.ceil(math.log2(max(n_hat, 2)) ** 3))


def default_group_size(n_hat):
    return max(4, math.ceil(math.log2(max(n_hat, 2))))


class Group:
    """A run of ``AC(v)`` searched by bisection (stands in for an atomic heap)."""

    __slots__ = ("entries", "keys", "prev", "next")

    def __init__(self, entries):
        self.entries = entries
        self.keys = [e.key for e in entries]
        self.prev = None
        self.next = None
        for e in entries:
            e.group = self


class Node:
    __slots__ = (
        "id", "parent", "children", "depth", "blocks", "bfirst",
        "groups", "gfirst", "loc",
    )

    def __init__(self, id, parent, backend):
        self.id = id
        self.parent = parent
        self.children = []
        self.depth = 0
        self.blocks = []
        self.bfirst = []
        self.groups = []
        self.gfirst = []
        self.loc = NodeLocator(backend)


def _normalize_shape(tree_shape):
    """Parent list from either a parent list or (node, parent) pairs."""
    items = list(tree_shape)
    if items and isinstance(items[0], (tuple, list)):
        n = len(items)
        parents = [None] * n
        seen = set()
        for node, par in items:
            if not isinstance(node, int) or not 0 <= node < n:
                raise StructuralError(f"node ids must be dense 0..{n - 1}, got {node!r}")
            if node in seen:
                raise StructuralError(f"node {node} listed twice")
            seen.add(node)
            parents[node] = None if par is None or par == -1 else par
        return parents
    return [None if p is None or p == -1 else p for p in items]


class CatalogTree:
    """Dynamic fractional-cascading structure over a rooted tree.

    ``tree_shape`` is a parent list (``None`` or ``-1`` marks the root) or a
    list of ``(node, parent)`` pairs.  ``catalogs`` maps node ids to key
    lists; keys are :class:`Key`, ``(value, id)`` tuples or packed ints.

    ``B``, ``G`` and ``d`` default to values derived from the capacity hint
    ``capacity`` (and the tree's maximum degree); when ``B``/``G`` are
    derived, growth past twice the hint doubles it and rebuilds.
    """

    def __init__(self, tree_shape, catalogs=None, *, B=None, G=None, c=4, d=None,
                 capacity=None, locator="bitset", faults=()):
        parents = _normalize_shape(tree_shape)
        faults = frozenset(faults)
        if faults - FAULTS:
            raise ValueError(f"unknown faults {sorted(faults - FAULTS)}")
        if c < 1:
            raise ValueError("maintenance constant c must be >= 1")
        self.faults = faults
        self.c = c
        self.backend = locator
        self.nodes = []
        self.root = None
        self._init_topology(parents, d)
        catalogs = catalogs or {}
        count = sum(len(v) for v in catalogs.values())
        self.auto_B = B is None
        self.auto_G = G is None
        self.n_hat = max(capacity or 0, count, 16)
        self.B = B if B is not None else default_block_size(self.n_hat)
        self.G = G if G is not None else default_group_size(self.n_hat)
        if self.B < 2 or self.G < 1:
            raise ValueError("block size must be >= 2 and group size >= 1")
        self.shape = BlockShape(self.B)
        self._proper = {}
        self.n_proper = 0
        self.rebuilds = 0
        lists = {}
        for v, keys in catalogs.items():
            if not isinstance(v, int) or not 0 <= v < len(self.nodes):
                raise StructuralError(f"catalog for unknown node {v!r}")
            ents = []
            for k in keys:
                key = as_packed(k)
                if key in self._proper:
                    raise DuplicateKeyError(f"duplicate key {tuple(unpack(key))}")
                e = Entry(key, v, v, True, True)
                self._proper[key] = e
                ents.append(e)
            ents.sort(key=_bykey)
            lists[v] = ents
        self.n_proper = len(self._proper)
        self._bulk(lists)

    @classmethod
    def build(cls, tree_shape, catalogs=None, **params):
        return cls(tree_shape, catalogs, **params)

    # topology

    def _init_topology(self, parents, d):
        n = len(parents)
        if n == 0:
            raise StructuralError("tree needs at least one node")
        self.nodes = [Node(i, None, self.backend) for i in range(n)]
        roots = []
        for i, p in enumerate(parents):
            if p is None:
                roots.append(i)
                continue
            if not isinstance(p, int) or not 0 <= p < n or p == i:
                raise StructuralError(f"node {i} has invalid parent {p!r}")
            self.nodes[i].parent = p
            self.nodes[p].children.append(i)
        if len(roots) != 1:
            raise StructuralError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        order = self._bfs()
        if len(order) != n:
            raise StructuralError("tree contains a cycle or unreachable nodes")
        maxdeg = max((len(nd.children) for nd in self.nodes), default=0)
        if d is None:
            self.d = max(1, maxdeg)
            self.auto_d = True
        else:
            if maxdeg > d:
                raise StructuralError(f"node degree {maxdeg} exceeds d={d}")
            self.d = d
            self.auto_d = False

    def _bfs(self):
        order = [self.root]
        self.nodes[self.root].depth = 0
        i = 0
        while i < len(order):
            nd = self.nodes[order[i]]
            for ch in nd.children:
                self.nodes[ch].depth = nd.depth + 1
                order.append(ch)
            i += 1
        return order

    @property
    def cd(self):
        return self.c * self.d

    def __len__(self):
        return self.n_proper

    def parent(self, v):
        return self.nodes[v].parent

    def children(self, v):
        return list(self.nodes[v].children)

    def depth(self, v):
        return self.nodes[v].depth

    def path_to_root(self, v):
        self._check_node(v)
        out = []
        while v is not None:
            out.append(v)
            v = self.nodes[v].parent
        return out

    def is_ancestor(self, a, v):
        """True when ``a`` is ``v`` or an ancestor of ``v``."""
        while v is not None:
            if v == a:
                return True
            v = self.nodes[v].parent
        return False

    def _check_node(self, v):
        if not isinstance(v, int) or not 0 <= v < len(self.nodes):
            raise DomainError(f"unknown node {v!r}")
        return self.nodes[v]

    def add_child(self, parent):
        """Append a new leaf node under ``parent`` and return its id.

        The new node starts with an empty catalog; bridges from the parent are
        laid out evenly so the gap bound holds immediately.
        """
        pn = self._check_node(parent)
        if len(pn.children) + 1 > self.d:
            if not self.auto_d:
                raise StructuralError(f"node {parent} would exceed degree d={self.d}")
            self.d = len(pn.children) + 1
        nid = len(self.nodes)
        nd = Node(nid, parent, self.backend)
        nd.depth = pn.depth + 1
        self.nodes.append(nd)
        pn.children.append(nid)
        self._init_empty(nd)
        step = self.cd // 2 + 1
        parent_ac = self._ac_entries(pn)
        for k in range(step - 1, len(parent_ac), step):
            self._add_improper(nd, parent_ac[k])
        return nid

    # bulk construction

    def _init_empty(self, nd):
        blk = Block(nd.id, self.shape, ())
        nd.blocks = [blk]
        nd.bfirst = [-1]
        nd.groups = []
        nd.gfirst = []
        nd.loc = NodeLocator(self.backend)
        nd.loc.assign_all(blk)

    def _bulk(self, lists):
        order = self._bfs()
        step = self.cd // 2 + 1
        ac = {}
        for v in order:
            nd = self.nodes[v]
            own = lists.get(v, [])
            for e in own:
                e.up = None
                e.down = None
                e.leaf = None
                e.group = None
                e.alive = True
            if nd.parent is None:
                lst = list(own)
            else:
                pl = ac[nd.parent]
                bridges = []
                for k in range(step - 1, len(pl), step):
                    p = pl[k]
                    i = Entry(p.key, v, p.owner, False, True)
                    i.up = p
                    if p.down is None:
                        p.down = {}
                    p.down[v] = i
                    bridges.append(i)
                lst = sorted(own + bridges, key=_bykey) if own and bridges else own + bridges
            ac[v] = lst
            self._build_groups(nd, lst)
        promoted = {v: [] for v in order}
        B = self.B
        for v in reversed(order):
            nd = self.nodes[v]
            lst = ac[v]
            if promoted[v]:
                lst = sorted(lst + promoted[v], key=_bykey)
            chunks = [lst[i:i + B] for i in range(0, len(lst), B)]
            if len(chunks) > 1 and 2 * len(chunks[-1]) <= B:
                tail = chunks.pop()
                chunks[-1] = chunks[-1] + tail
            if not chunks:
                chunks = [[]]
            if nd.parent is not None:
                for ch in chunks:
                    if ch and ch[0].up is None:
                        f = ch[0]
                        x = Entry(f.key, nd.parent, f.owner, False, False)
                        x.down = {v: f}
                        f.up = x
                        promoted[nd.parent].append(x)
            blocks = [Block(v, self.shape, ch) for ch in chunks]
            for a, b in zip(blocks, blocks[1:]):
                a.next = b
                b.prev = a
            nd.blocks = blocks
            nd.bfirst = [b.first_key() for b in blocks]
            nd.loc = NodeLocator(self.backend)
            nd.loc.assign_all(blocks[0])

    def _build_groups(self, nd, lst):
        G = self.G
        size = 2 * G
        chunks = [lst[i:i + size] for i in range(0, len(lst), size)]
        if len(chunks) > 1 and len(chunks[-1]) < G:
            tail = chunks.pop()
            chunks[-1] = chunks[-1] + tail
        groups = [Group(ch) for ch in chunks]
        for a, b in zip(groups, groups[1:]):
            a.next = b
            b.prev = a
        nd.groups = groups
        nd.gfirst = [g.keys[0] for g in groups]

    def rebuild(self, n_hat=None):
        """Rebuild every node from its proper entries (handles stay valid)."""
        if n_hat is not None:
            self.n_hat = n_hat
            if self.auto_B:
                self.B = default_block_size(n_hat)
                self.shape = BlockShape(self.B)
            if self.auto_G:
                self.G = default_group_size(n_hat)
        lists = {}
        for nd in self.nodes:
            lists[nd.id] = [e for g in nd.groups for e in g.entries if e.proper]
        self.rebuilds += 1
        self._bulk(lists)

    def _maybe_grow(self):
        if (self.auto_B or self.auto_G) and self.n_proper > 2 * self.n_hat:
            self.rebuild(2 * self.n_hat)

    # groups (AC layer)

    def _group_index(self, nd, g):
        return bisect_right(nd.gfirst, g.keys[0]) - 1

    def _group_insert(self, nd, e, hint=None):
        if not nd.groups:
            g = Group([e])
            nd.groups = [g]
            nd.gfirst = [e.key]
            return
        if hint is not None:
            g = hint.group
            gi = self._group_index(nd, g)
        else:
            gi = max(bisect_right(nd.gfirst, e.key) - 1, 0)
            g = nd.groups[gi]
        i = bisect_left(g.keys, e.key)
        g.keys.insert(i, e.key)
        g.entries.insert(i, e)
        e.group = g
        if i == 0:
            nd.gfirst[gi] = e.key
        if len(g.keys) > 4 * self.G:
            self._split_group(nd, g)

    def _split_group(self, nd, g):
        gi = self._group_index(nd, g)
        half = len(g.entries) // 2
        right = Group(g.entries[half:])
        del g.entries[half:]
        del g.keys[half:]
        right.next = g.next
        if g.next is not None:
            g.next.prev = right
        g.next = right
        right.prev = g
        nd.groups.insert(gi + 1, right)
        nd.gfirst.insert(gi + 1, right.keys[0])

    def _group_remove(self, nd, e):
        g = e.group
        gi = self._group_index(nd, g)
        i = bisect_left(g.keys, e.key)
        del g.keys[i]
        del g.entries[i]
        e.group = None
        if not g.keys:
            self._unlink_group(nd, g, gi)
            return
        if i == 0:
            nd.gfirst[gi] = g.keys[0]
        if len(g.keys) < self.G and len(nd.groups) > 1:
            if g.next is not None:
                left, right, li = g, g.next, gi
            else:
                left, right, li = g.prev, g, gi - 1
            for x in right.entries:
                x.group = left
            left.entries.extend(right.entries)
            left.keys.extend(right.keys)
            self._unlink_group(nd, right, li + 1)
            if len(left.keys) > 4 * self.G:
                self._split_group(nd, left)

    def _unlink_group(self, nd, g, gi):
        if g.prev is not None:
            g.prev.next = g.next
        if g.next is not None:
            g.next.prev = g.prev
        del nd.groups[gi]
        del nd.gfirst[gi]

    def _ac_entries(self, nd):
        return [e for g in nd.groups for e in g.entries]

    def _ac_walk(self, e, direction, limit):
        """Up to ``limit`` AC entries next to ``e`` (excluded), nearest first."""
        g = e.group
        i = bisect_left(g.keys, e.key)
        out = []
        if direction > 0:
            i += 1
            while len(out) < limit:
                if i >= len(g.entries):
                    g = g.next
                    if g is None:
                        break
                    i = 0
                out.append(g.entries[i])
                i += 1
        else:
            i -= 1
            while len(out) < limit:
                if i < 0:
                    g = g.prev
                    if g is None:
                        break
                    i = len(g.entries) - 1
                out.append(g.entries[i])
                i -= 1
        return out

    # bridges

    def _gap_sides(self, walk, children):
        """For each child id: how many walked entries precede its nearest bridge."""
        want = set(children)
        found = {}
        for k, x in enumerate(walk):
            if x.down:
                for cid in x.down:
                    if cid in want and cid not in found:
                        found[cid] = k
                if len(found) == len(want):
                    break
        n = len(walk)
        return {cid: found.get(cid, n) for cid in want}

    def _fix_gaps(self, nd, e):
        """Restore the gap bound for every child after ``e`` joined ``AC(nd)``."""
        if not nd.children or "skip_bridge" in self.faults:
            return
        cd = self.cd
        left = self._ac_walk(e, -1, cd + 1)
        right = self._ac_walk(e, 1, cd + 1)
        if len(left) + len(right) + 1 <= cd:
            return
        ls = self._gap_sides(left, nd.children)
        rs = self._gap_sides(right, nd.children)
        for cid in list(nd.children):
            l, r = ls[cid], rs[cid]
            if l + r + 1 > cd:
                gap = left[:l][::-1] + [e] + right[:r]
                m = gap[len(gap) // 2]
                self._add_improper(self.nodes[cid], m)

    def _add_improper(self, cn, m):
        i = Entry(m.key, cn.id, m.owner, False, True)
        i.up = m
        if m.down is None:
            m.down = {}
        m.down[cn.id] = i
        self._group_insert(cn, i)
        self._acbar_insert(cn, i)
        self._fix_gaps(cn, i)

    def _remove_ac(self, nd, e):
        bridged = []
        if e.down:
            for cid, ce in list(e.down.items()):
                bridged.append(cid)
                self._remove_ac(self.nodes[cid], ce)
        cd = self.cd
        if bridged and "skip_bridge" not in self.faults:
            left = self._ac_walk(e, -1, cd + 1)
            right = self._ac_walk(e, 1, cd + 1)
        self._group_remove(nd, e)
        self._acbar_remove(nd, e)
        if not bridged or "skip_bridge" in self.faults:
            return
        ls = self._gap_sides(left, bridged)
        rs = self._gap_sides(right, bridged)
        for cid in bridged:
            l, r = ls[cid], rs[cid]
            if l + r > cd:
                gap = left[:l][::-1] + right[:r]
                m = gap[len(gap) // 2]
                if m.down is None or cid not in m.down:
                    self._add_improper(self.nodes[cid], m)

    # extended catalog (blocks)

    def _block_index(self, nd, blk):
        k = blk.first_key()
        return bisect_left(nd.bfirst, k)

    def _acbar_insert(self, nd, e):
        bi = bisect_right(nd.bfirst, e.key) - 1
        if bi < 0:
            bi = 0
        blk = nd.blocks[bi]
        old_first = blk.first()
        became_first = blk.insert(e)
        nd.bfirst[bi] = blk.lfirst[0]
        loc = nd.loc
        if e.in_ac and blk.counts[AC] == 1:
            loc.ranges[AC].add(blk.label)
        if e.proper and blk.counts[C] == 1:
            loc.ranges[C].add(blk.label)
        if became_first and old_first is not None:
            self._sync_up(nd, old_first)
        self._sync_up(nd, e)
        if blk.size >= 2 * self.B:
            self._split_block(nd, blk)

    def _acbar_remove(self, nd, e):
        blk = e.leaf.block
        bi = bisect_right(nd.bfirst, e.key) - 1
        was_first = blk.remove(e)
        e.alive = False
        loc = nd.loc
        if e.in_ac and blk.counts[AC] == 0:
            loc.ranges[AC].discard(blk.label)
        if e.proper and blk.counts[C] == 0:
            loc.ranges[C].discard(blk.label)
        if e.up is not None:
            x = e.up
            e.up = None
            del x.down[nd.id]
            if not x.in_ac and not x.down:
                self._acbar_remove(self.nodes[nd.parent], x)
        if blk.size == 0:
            if len(nd.blocks) > 1:
                self._drop_block(nd, blk, bi)
                loc.maybe_shrink(nd.blocks[0])
            else:
                nd.bfirst[0] = -1
            return
        nd.bfirst[bi] = blk.lfirst[0]
        if was_first:
            self._sync_up(nd, blk.first())
        if blk.next is not None and 2 * blk.size <= self.B:
            self._merge_blocks(nd, blk, bi)

    def _drop_block(self, nd, blk, bi):
        if blk.prev is not None:
            blk.prev.next = blk.next
        if blk.next is not None:
            blk.next.prev = blk.prev
        del nd.blocks[bi]
        del nd.bfirst[bi]
        nd.loc.remove(blk)

    def _merge_blocks(self, nd, blk, bi):
        right = blk.next
        rf = right.first()
        self._drop_block(nd, right, bi + 1)
        blk.absorb(right)
        nd.loc.refresh(blk)
        self._sync_up(nd, rf)
        if blk.size >= 2 * self.B:
            self._split_block(nd, blk)
        nd.loc.maybe_shrink(nd.blocks[0])

    def _split_block(self, nd, blk):
        bi = self._block_index(nd, blk)
        right = blk.split()
        right.next = blk.next
        if blk.next is not None:
            blk.next.prev = right
        blk.next = right
        right.prev = blk
        nd.blocks.insert(bi + 1, right)
        nd.bfirst.insert(bi + 1, right.lfirst[0])
        nd.loc.nblocks += 1
        lo = blk.label
        hi = right.next.label if right.next is not None else nd.loc.U
        skip = "skip_label_split" in self.faults
        if hi - lo >= 2:
            right.label = (lo + hi) // 2
            nd.loc.label_block[right.label] = right
            if not skip:
                nd.loc.refresh(right)
        else:
            nd.loc.nblocks -= 1
            nd.loc.insert_after(blk, right)
        if not skip:
            nd.loc.refresh(blk)
        self._sync_up(nd, right.first())

    def _sync_up(self, nd, e):
        """Make ``e``'s up-link agree with its role (block first or improper)."""
        if nd.parent is None:
            return
        blk = e.leaf.block
        should = e.improper or blk.leaves[0].entries[0] is e
        if should and e.up is None:
            x = Entry(e.key, nd.parent, e.owner, False, False)
            x.down = {nd.id: e}
            e.up = x
            blk.set_mark(e, UP, True)
            self._acbar_insert(self.nodes[nd.parent], x)
        elif not should and e.up is not None and not e.improper:
            x = e.up
            e.up = None
            blk.set_mark(e, UP, False)
            del x.down[nd.id]
            if not x.in_ac and not x.down:
                self._acbar_remove(self.nodes[nd.parent], x)

    # public updates

    def insert(self, x, v, hint=None):
        """Insert key ``x`` into ``C(v)``; returns the entry handle.

        ``hint`` may be the handle of the predecessor of ``x`` in ``AC(v)``;
        without it the position is located by one search of ``AC(v)``.
        """
        nd = self._check_node(v)
        key = as_packed(x)
        if key in self._proper:
            raise DuplicateKeyError(f"duplicate key {tuple(unpack(key))}")
        if hint is not None:
            if not isinstance(hint, Entry) or not hint.alive or hint.node != v or not hint.in_ac:
                raise InvalidHandleError("hint is not a live entry of AC(v)")
            g = hint.group
            i = bisect_left(g.keys, hint.key)
            nxt = g.keys[i + 1] if i + 1 < len(g.keys) else (g.next.keys[0] if g.next else None)
            if hint.key > key or (nxt is not None and nxt < key):
                raise DomainError("hint is not the AC predecessor of the inserted key")
        e = Entry(key, v, v, True, True)
        self._proper[key] = e
        self.n_proper += 1
        self._group_insert(nd, e, hint)
        self._acbar_insert(nd, e)
        self._fix_gaps(nd, e)
        self._maybe_grow()
        return e

    def delete(self, x, v, handle=None):
        """Remove key ``x`` from ``C(v)``; ``handle`` (if given) must address it."""
        nd = self._check_node(v)
        if handle is not None:
            e = handle
            if not isinstance(e, Entry) or not e.alive or not e.proper or e.node != v:
                raise InvalidHandleError("stale or foreign handle")
            if x is not None and as_packed(x) != e.key:
                raise InvalidHandleError("handle addresses a different key")
        else:
            key = as_packed(x)
            e = self._proper.get(key)
            if e is None or e.node != v:
                raise NotFoundError(f"key {tuple(unpack(key))} not in C({v})")
        del self._proper[e.key]
        self.n_proper -= 1
        self._remove_ac(nd, e)
        e.alive = False

    def handle(self, x):
        """Handle of the proper entry for key ``x`` (or None)."""
        return self._proper.get(as_packed(x))

    # marked navigation

    def pred_marked(self, e, mark):
        """Largest entry of the same node with ``mark`` that is <= ``e``."""
        m = mark_id(mark)
        self._check_entry(e)
        blk = e.leaf.block
        li, pos = blk.locate(e)
        f = blk.pred_at(li, pos, m)
        if f is not None:
            return f
        return self._last_marked_before(blk, m)

    def succ_marked(self, e, mark):
        m = mark_id(mark)
        self._check_entry(e)
        blk = e.leaf.block
        li, pos = blk.locate(e)
        f = blk.succ_at(li, pos, m)
        if f is not None:
            return f
        return self._first_marked_after(blk, m)

    def _last_marked_before(self, blk, m):
        if m == UP:
            b = blk.prev
            while b is not None:
                f = b.last_marked(UP)
                if f is not None:
                    return f
                b = b.prev
            return None
        b = self.nodes[blk.node].loc.last_before(m, blk.label)
        return b.last_marked(m) if b is not None else None

    def _first_marked_after(self, blk, m):
        if m == UP:
            b = blk.next
            while b is not None:
                f = b.first_marked(UP)
                if f is not None:
                    return f
                b = b.next
            return None
        b = self.nodes[blk.node].loc.first_after(m, blk.label)
        return b.first_marked(m) if b is not None else None

    def _check_entry(self, e):
        if not isinstance(e, Entry) or not e.alive or e.leaf is None:
            raise InvalidHandleError("stale entry handle")

    def any_between(self, v, e1, e2, layer="AC"):
        """Some entry of ``layer`` (AC or C) of node ``v`` within [e1, e2], or None.

        ``None`` bounds stand for minus/plus infinity.
        """
        nd = self._check_node(v)
        m = mark_id(layer)
        if m not in (AC, C):
            raise DomainError("layer must be AC or C")
        for e in (e1, e2):
            if e is not None:
                self._check_entry(e)
                if e.node != v:
                    raise InvalidHandleError("entry belongs to another node")
        if e1 is not None and e2 is not None and e1.key > e2.key:
            raise DomainError("e1 must not exceed e2")
        return self._any_between(nd, e1, e2, m)

    def _any_between(self, nd, e1, e2, m):
        if e1 is None:
            b1 = nd.blocks[0]
            li1, pos1 = 0, 0
        else:
            b1 = e1.leaf.block
            li1, pos1 = b1.locate(e1)
        if e2 is None:
            b2 = nd.blocks[-1]
            li2 = len(b2.leaves) - 1
            pos2 = len(b2.leaves[li2].entries) - 1
        else:
            b2 = e2.leaf.block
            li2, pos2 = b2.locate(e2)
        if b1 is b2:
            f = b1.succ_at(li1, pos1, m)
            if f is not None and (e2 is None or f.key <= e2.key):
                return f
            return None
        f = b1.succ_at(li1, pos1, m)
        if f is not None:
            return f
        f = b2.pred_at(li2, pos2, m)
        if f is not None:
            return f
        b = nd.loc.first_between(m, b1.label, b2.label)
        return b.last_marked(m) if b is not None else None

    # views

    def catalog(self, v):
        nd = self._check_node(v)
        return [unpack(e.key) for g in nd.groups for e in g.entries if e.proper]

    def ac(self, v):
        nd = self._check_node(v)
        return [unpack(e.key) for g in nd.groups for e in g.entries]

    def acbar_entries(self, v):
        nd = self._check_node(v)
        return [e for b in nd.blocks for e in b.entries()]

    def acbar(self, v):
        return [unpack(e.key) for e in self.acbar_entries(v)]

    def ac_entries(self, v):
        return self._ac_entries(self._check_node(v))

    def blocks(self, v):
        nd = self._check_node(v)
        return [[unpack(e.key) for e in b.entries()] for b in nd.blocks]

    def block_objects(self, v):
        return list(self._check_node(v).blocks)

    def up_set(self, v):
        """Keys of ``AC̄(v)`` entries that carry an up-link."""
        return {e.key for e in self.acbar_entries(v) if e.up is not None}

    def space(self):
        ac = sum(len(g.keys) for nd in self.nodes for g in nd.groups)
        acbar = sum(b.size for nd in self.nodes for b in nd.blocks)
        n = max(self.n_proper, 1)
        return {
            "proper": self.n_proper,
            "ac": ac,
            "acbar": acbar,
            "ac_ratio": ac / n,
            "acbar_ratio": acbar / n,
        }

    # audits

    def bridge_gap_audit(self, v):
        """Largest number of parent AC entries strictly between consecutive bridges of ``v``."""
        nd = self._check_node(v)
        if nd.parent is None:
            raise DomainError("the root has no parent catalog")
        best = run = 0
        for e in self._ac_entries(self.nodes[nd.parent]):
            if e.down and v in e.down:
                best = max(best, run)
                run = 0
            else:
                run += 1
        return max(best, run)

    def audit(self, *, deep=True):
        """Check every structural invariant; returns a list of violation messages."""
        bad = []
        B, G, cd = self.B, self.G, self.cd
        proper_seen = 0
        for nd in self.nodes:
            v = nd.id
            tag = f"node {v}"
            acs = self._ac_entries(nd)
            keys = [e.key for e in acs]
            if any(a >= b for a, b in zip(keys, keys[1:])):
                bad.append(f"{tag}: AC out of order")
            if [g.keys[0] for g in nd.groups] != nd.gfirst:
                bad.append(f"{tag}: group first-key cache stale")
            g, prev = (nd.groups[0] if nd.groups else None), None
            for k, grp in enumerate(nd.groups):
                if grp.prev is not prev or (prev is not None and prev.next is not grp):
                    bad.append(f"{tag}: group links broken")
                prev = grp
                if len(nd.groups) > 1 and not G <= len(grp.keys) <= 4 * G:
                    bad.append(f"{tag}: group size {len(grp.keys)} outside [{G}, {4 * G}]")
                if grp.keys != [e.key for e in grp.entries]:
                    bad.append(f"{tag}: group key cache stale")
                for e in grp.entries:
                    if e.group is not grp:
                        bad.append(f"{tag}: entry group pointer stale")
            # blocks
            ents = []
            b = nd.blocks[0] if nd.blocks else None
            if b is None or b.prev is not None:
                bad.append(f"{tag}: block list head broken")
            k = 0
            while b is not None:
                if k >= len(nd.blocks) or nd.blocks[k] is not b:
                    bad.append(f"{tag}: block list and linked order differ")
                    break
                if nd.bfirst[k] != b.first_key():
                    bad.append(f"{tag}: block first-key cache stale")
                last = b.next is None
                if not last and not B / 2 < b.size < 2 * B:
                    bad.append(f"{tag}: non-last block size {b.size} outside ({B / 2}, {2 * B})")
                if last and b.size > 2 * B:
                    bad.append(f"{tag}: last block size {b.size} above {2 * B}")
                if b.size == 0 and len(nd.blocks) > 1:
                    bad.append(f"{tag}: empty block alongside others")
                if deep:
                    bad.extend(f"{tag}: {msg}" for msg in b.check())
                be = b.entries()
                if be and nd.parent is not None and be[0].up is None:
                    bad.append(f"{tag}: block first entry lacks an up-link")
                ents.extend(be)
                b = b.next
                k += 1
            if k != len(nd.blocks):
                bad.append(f"{tag}: block list length mismatch")
            bkeys = [e.key for e in ents]
            if any(a >= b for a, b in zip(bkeys, bkeys[1:])):
                bad.append(f"{tag}: extended catalog out of order across blocks")
            bad.extend(f"{tag}: {msg}" for msg in nd.loc.check(nd.blocks[0]))
            acset = {e for e in ents if e.in_ac}
            if acset != set(acs):
                bad.append(f"{tag}: AC layer differs between groups and blocks")
            firsts = {b.first() for b in nd.blocks if b.size}
            for e in ents:
                if e.node != v or not e.alive:
                    bad.append(f"{tag}: entry with wrong node or dead")
                if e.proper:
                    proper_seen += 1
                    if self._proper.get(e.key) is not e:
                        bad.append(f"{tag}: proper entry missing from handle index")
                    if e.owner != v:
                        bad.append(f"{tag}: proper entry owner wrong")
                if e.in_ac and not e.proper:
                    if nd.parent is None:
                        bad.append(f"{tag}: improper entry at the root")
                    elif (e.up is None or not e.up.in_ac or e.up.node != nd.parent
                          or e.up.key != e.key):
                        bad.append(f"{tag}: improper entry without bridge partner")
                    if not self.is_ancestor(e.owner, v) or self._proper.get(e.key) is None:
                        bad.append(f"{tag}: improper entry not owned by an ancestor")
                    elif self._proper[e.key].node != e.owner:
                        bad.append(f"{tag}: improper entry owner stale")
                if not e.in_ac:
                    if not e.down or len(e.down) != 1:
                        bad.append(f"{tag}: extended-only entry must have exactly one down-link")
                    else:
                        (cid, ce), = e.down.items()
                        cb = ce.leaf.block if ce.leaf else None
                        if ce.up is not e or cb is None or cb.first() is not ce or ce.key != e.key:
                            bad.append(f"{tag}: extended-only entry not backed by a child block first")
                        if ce.in_ac and not ce.proper:
                            bad.append(f"{tag}: extended-only entry shadows a bridge")
                if e.down:
                    for cid, ce in e.down.items():
                        if ce.up is not e or not ce.alive or ce.node != cid:
                            bad.append(f"{tag}: down-link not mirrored by up-link")
                        if e.in_ac and not (ce.in_ac and not ce.proper):
                            bad.append(f"{tag}: AC entry linked to a non-bridge child copy")
                should = nd.parent is not None and (e in firsts or (e.in_ac and not e.proper))
                if should != (e.up is not None):
                    bad.append(f"{tag}: up-link present={e.up is not None} but expected {should}")
                if e.up is not None:
                    if not e.up.alive or e.up.node != nd.parent or e.up.down.get(v) is not e:
                        bad.append(f"{tag}: up-link target inconsistent")
            if nd.parent is None:
                if any(not e.proper for e in acs):
                    bad.append(f"{tag}: root AC differs from root catalog")
            else:
                up = {e.key for e in ents if e.up is not None}
                pkeys = {e.key for bb in self.nodes[nd.parent].blocks for e in bb.entries()}
                inter = {e.key for e in ents} & pkeys
                if up != inter:
                    bad.append(f"{tag}: UP set differs from intersection with parent extended catalog")
                gap = self.bridge_gap_audit(v)
                if gap > cd:
                    bad.append(f"{tag}: bridge gap {gap} exceeds c*d={cd}")
            if not nd.children and any(not e.in_ac for e in ents):
                bad.append(f"{tag}: leaf extended catalog differs from AC")
        if proper_seen != self.n_proper or len(self._proper) != self.n_proper:
            bad.append("proper entry count mismatch")
        return bad
