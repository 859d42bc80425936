"""Per-catalog maxima along tree paths.

Every internal node ``v`` stores the keys of its children's catalogs as
intervals of child indices: ``minsert(e, f, l, v)`` puts ``e`` into
``C(v_f), ..., C(v_l)`` at once.  Three pieces answer "max of C(v_i)":

* ``D(v)``: per-child sorted key lists plus the interval of every key, used
  for stabbing-predecessor queries;
* ``T(v)``: a complete binary tree over the children; ``F_u`` holds the keys
  whose interval covers node ``u`` but not its parent, and ``max_u`` is the
  largest of them;
* ``W(v)``: the dense ranks of all ``max_u`` packed in pre-order into 64-bit
  words, so the maximum over a leaf-to-root path of ``T(v)`` is one masked
  field-max over precomputed positions.
"""
from bisect import bisect_left, bisect_right, insort
from typing import NamedTuple, Optional

from . import kernels
from .errors import DomainError, DuplicateKeyError, NotFoundError, StructuralError
from .keys import Key, as_packed, probe_high, unpack

FAULTS = frozenset({"skip_rerank"})


class IntervalEntry(NamedTuple):
    key: Key
    f: int
    l: int
    node: int


class LocalTree:
    """``T(v)``, ``D(v)`` and ``W(v)`` for one parent node of degree ``deg``."""

    __slots__ = (
        "deg", "size", "F", "maxv", "lists", "intervals", "pre", "paths",
        "bits", "per_word", "W", "rank_key",
    )

    def __init__(self, deg):
        self.deg = deg
        size = 1
        while size < max(deg, 1):
            size *= 2
        self.size = size
        nodes = 2 * size
        self.F = [[] for _ in range(nodes)]
        self.maxv = [None] * nodes
        self.lists = [[] for _ in range(deg)]
        self.intervals = {}
        # pre-order position of every heap node
        self.pre = [0] * nodes
        order = []
        stack = [1]
        while stack:
            u = stack.pop()
            self.pre[u] = len(order)
            order.append(u)
            if u < size:
                stack.append(2 * u + 1)
                stack.append(2 * u)
        count = len(order)
        self.bits = max(1, (2 * count).bit_length())
        self.per_word = 64 // self.bits
        self.paths = []
        for i in range(deg):
            u = size + i
            pos = []
            while u >= 1:
                pos.append(self.pre[u])
                u //= 2
            self.paths.append(tuple(pos))
        self.W = kernels.pack_fields([0] * count, self.bits, self.per_word)
        self.rank_key = [None]

    def canonical(self, f, l):
        """Heap nodes whose leaf sets partition children f..l (0-based, inclusive)."""
        out = []
        lo = f + self.size
        hi = l + self.size + 1
        while lo < hi:
            if lo & 1:
                out.append(lo)
                lo += 1
            if hi & 1:
                hi -= 1
                out.append(hi)
            lo //= 2
            hi //= 2
        return out

    def leaves_of(self, u):
        lo = hi = u
        while lo < self.size:
            lo = 2 * lo
            hi = 2 * hi + 1
        return lo - self.size, hi - self.size

    def rerank(self):
        live = sorted({m for m in self.maxv if m is not None})
        rank = {k: r + 1 for r, k in enumerate(live)}
        vals = [0] * (2 * self.size - 1)
        for u in range(1, 2 * self.size):
            m = self.maxv[u]
            if m is not None:
                vals[self.pre[u]] = rank[m]
        self.W = kernels.pack_fields(vals, self.bits, self.per_word)
        self.rank_key = [None] + live

    def leaf_max(self, i):
        r = kernels.field_max(self.W, self.paths[i], self.bits, self.per_word)
        return self.rank_key[r] if r else None

    def stab_pred(self, q, x1, x2):
        best = None
        for i in range(x1, x2 + 1):
            lst = self.lists[i]
            j = bisect_right(lst, q) - 1
            if j >= 0 and (best is None or lst[j] > best):
                best = lst[j]
        return best

    def decode_W(self):
        out = {}
        for u in range(1, 2 * self.size):
            r = kernels.field_get(self.W, self.pre[u], self.bits, self.per_word)
            out[u] = self.rank_key[r] if r else None
        return out


class MaximaTree:
    """Maxima of every catalog along node-to-ancestor paths.

    ``parents`` is a parent list (``None``/``-1`` for the root).  A node's
    catalog lives in its parent's structures, so the root's catalog is
    always empty.
    """

    def __init__(self, parents, *, d_max=8, faults=()):
        faults = frozenset(faults)
        if faults - FAULTS:
            raise ValueError(f"unknown faults {sorted(faults - FAULTS)}")
        self.faults = faults
        self.d_max = d_max
        self.parent = []
        self.children = []
        self.index = []
        self.local = []
        self.root = None
        for i, p in enumerate(parents):
            self._new_node(None if p is None or p == -1 else p, check=False)
        roots = [i for i, p in enumerate(self.parent) if p is None]
        if len(roots) != 1:
            raise StructuralError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        for i, p in enumerate(self.parent):
            if p is not None:
                if not 0 <= p < len(self.parent) or p == i:
                    raise StructuralError(f"node {i} has invalid parent {p!r}")
                self.index[i] = len(self.children[p])
                self.children[p].append(i)
        seen = {self.root}
        stack = [self.root]
        while stack:
            for c in self.children[stack.pop()]:
                seen.add(c)
                stack.append(c)
        if len(seen) != len(self.parent):
            raise StructuralError("tree contains a cycle or unreachable nodes")
        for v, ch in enumerate(self.children):
            if len(ch) > d_max:
                raise StructuralError(f"node {v} has degree {len(ch)} > d_max={d_max}")
            self.local[v] = LocalTree(len(ch)) if ch else None
        self.count = 0

    def _new_node(self, parent, check=True):
        self.parent.append(parent)
        self.children.append([])
        self.index.append(-1)
        self.local.append(None)
        return len(self.parent) - 1

    def add_children(self, v, k):
        """Append ``k`` new leaf children under ``v``; returns their ids."""
        self._check_node(v)
        if len(self.children[v]) + k > self.d_max:
            raise StructuralError(f"node {v} would exceed d_max={self.d_max}")
        new = []
        for _ in range(k):
            c = self._new_node(v)
            self.index[c] = len(self.children[v])
            self.children[v].append(c)
            new.append(c)
        old = self.local[v]
        lt = LocalTree(len(self.children[v]))
        self.local[v] = lt
        if old is not None:
            for key, (f, l) in old.intervals.items():
                self._place(lt, key, f, l)
            lt.rerank()
        return new

    def _check_node(self, v):
        if not isinstance(v, int) or not 0 <= v < len(self.parent):
            raise DomainError(f"unknown node {v!r}")

    def _local(self, v):
        self._check_node(v)
        lt = self.local[v]
        if lt is None:
            raise DomainError(f"node {v} has no children")
        return lt

    # updates

    def _place(self, lt, key, f, l):
        lt.intervals[key] = (f, l)
        for i in range(f, l + 1):
            insort(lt.lists[i], key)
        for u in lt.canonical(f, l):
            insort(lt.F[u], key)
            m = lt.maxv[u]
            if m is None or key > m:
                lt.maxv[u] = key

    def minsert(self, e, f, l, v):
        """Insert key ``e`` into the catalogs of children f..l (1-based) of ``v``."""
        lt = self._local(v)
        key = as_packed(e)
        if not 1 <= f <= l <= lt.deg:
            raise DomainError(f"interval [{f}, {l}] outside 1..{lt.deg}")
        if key in lt.intervals:
            raise DuplicateKeyError(f"key {tuple(unpack(key))} already has an interval at {v}")
        self._place(lt, key, f - 1, l - 1)
        lt.rerank()
        self.count += 1

    def mdelete(self, e, v):
        lt = self._local(v)
        key = as_packed(e)
        iv = lt.intervals.pop(key, None)
        if iv is None:
            raise NotFoundError(f"key {tuple(unpack(key))} has no interval at {v}")
        f, l = iv
        for i in range(f, l + 1):
            lst = lt.lists[i]
            del lst[bisect_left(lst, key)]
        changed = False
        for u in lt.canonical(f, l):
            Fu = lt.F[u]
            del Fu[bisect_left(Fu, key)]
            if lt.maxv[u] == key:
                lt.maxv[u] = Fu[-1] if Fu else None
                changed = True
        if changed and "skip_rerank" not in self.faults:
            lt.rerank()
        self.count -= 1

    def interval(self, e, v):
        lt = self._local(v)
        iv = lt.intervals.get(as_packed(e))
        return None if iv is None else (iv[0] + 1, iv[1] + 1)

    # queries

    def node_max(self, v) -> Optional[IntervalEntry]:
        """Maximum of ``C(v)`` with its interval, or None (also for the root)."""
        self._check_node(v)
        p = self.parent[v]
        if p is None:
            return None
        lt = self.local[p]
        k = lt.leaf_max(self.index[v])
        if k is None:
            return None
        f, l = lt.intervals.get(k, (-1, -1))
        return IntervalEntry(unpack(k), f + 1, l + 1, p)

    def path_maxima(self, v0, v1=None):
        """``[(node, node_max(node)), ...]`` for the path v0 -> v1 (default: root)."""
        self._check_node(v0)
        if v1 is None:
            v1 = self.root
        self._check_node(v1)
        out = []
        v = v0
        while True:
            out.append((v, self.node_max(v)))
            if v == v1:
                return out
            v = self.parent[v]
            if v is None:
                raise DomainError(f"node {v1} is not an ancestor of {v0}")

    def stab_predecessor(self, v, q, x1, x2):
        """Largest key <= q whose interval at ``v`` meets [x1, x2] (1-based).

        ``q`` may be a key or a bare value (then every id of that value qualifies).
        """
        lt = self._local(v)
        if not 1 <= x1 <= x2 <= lt.deg:
            raise DomainError(f"range [{x1}, {x2}] outside 1..{lt.deg}")
        qk = probe_high(q) if isinstance(q, int) else as_packed(q)
        k = lt.stab_pred(qk, x1 - 1, x2 - 1)
        return None if k is None else unpack(k)

    # audits

    def audit(self):
        bad = []
        for v, lt in enumerate(self.local):
            if lt is None:
                continue
            tag = f"node {v}"
            if lt.deg != len(self.children[v]):
                bad.append(f"{tag}: local tree degree stale")
            for u in range(1, 2 * lt.size):
                want = sorted(k for k, (f, l) in lt.intervals.items() if u in lt.canonical(f, l))
                if lt.F[u] != want:
                    bad.append(f"{tag}: F_{u} differs from canonical membership")
                m = lt.F[u][-1] if lt.F[u] else None
                if lt.maxv[u] != m:
                    bad.append(f"{tag}: max_{u} stale")
            for k, (f, l) in lt.intervals.items():
                cover = []
                for u in lt.canonical(f, l):
                    a, b = lt.leaves_of(u)
                    cover.extend(range(a, b + 1))
                if sorted(cover) != list(range(f, l + 1)):
                    bad.append(f"{tag}: canonical set does not partition [{f}, {l}]")
                height = lt.size.bit_length()
                if len(lt.canonical(f, l)) > 2 * height:
                    bad.append(f"{tag}: canonical set too large")
            for i in range(lt.deg):
                want = sorted(k for k, (f, l) in lt.intervals.items() if f <= i <= l)
                if lt.lists[i] != want:
                    bad.append(f"{tag}: child list {i} stale")
            dec = lt.decode_W()
            for u in range(1, 2 * lt.size):
                if dec[u] != lt.maxv[u]:
                    bad.append(f"{tag}: packed rank word disagrees at heap node {u}")
                    break
            ranks = lt.rank_key[1:]
            if ranks != sorted(ranks):
                bad.append(f"{tag}: rank order differs from key order")
        return bad
