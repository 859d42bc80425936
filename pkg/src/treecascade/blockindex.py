"""Blocks of an extended catalog and their packed mark index.

A block is a sorted run of entries split into small leaves.  Each leaf keeps
one bitmask per mark kind (bit i is set when the i-th entry of the leaf
carries the mark) and a packed word array of ``(stamp, rank)`` records that
maps an entry's stamp to its position in the leaf.  Above the leaves sits an
implicit tree of fixed fanout whose nodes hold one bitmask per mark: bit s
of a node is set when its s-th child has any mark set below it.  Together
they answer "largest marked entry <= e in this block" with a handful of
word operations.
"""
from bisect import bisect_left, bisect_right

from . import kernels
from .errors import InvalidHandleError, StructuralError

UP, AC, C = 0, 1, 2
MARKS = (UP, AC, C)
MARK_NAMES = {"UP": UP, "AC": AC, "C": C}

LEAF_BASE = 8
LEAF_MAX = 16
LEAF_MIN = 4
RANK_BITS = 4  # ranks 0..LEAF_MAX-1


def mark_id(mark):
    if isinstance(mark, str):
        return MARK_NAMES[mark.upper()]
    return mark


class Entry:
    """One element of an extended catalog.

    ``proper`` and ``in_ac`` are fixed for the entry's lifetime; ``up`` is
    the copy in the parent's extended catalog (the up-link) and ``down``
    maps child node ids to the child copies linking up to this entry.
    """

    __slots__ = (
        "key", "node", "owner", "proper", "in_ac", "up", "down",
        "leaf", "stamp", "group", "alive",
    )

    def __init__(self, key, node, owner, proper, in_ac):
        self.key = key
        self.node = node
        self.owner = owner
        self.proper = proper
        self.in_ac = in_ac
        self.up = None
        self.down = None
        self.leaf = None
        self.stamp = -1
        self.group = None
        self.alive = True

    @property
    def improper(self):
        return self.in_ac and not self.proper

    @property
    def layer(self):
        if self.proper:
            return "proper"
        return "improper" if self.in_ac else "extended-only"

    def marks(self):
        return (self.up is not None, self.in_ac, self.proper)

    def __repr__(self):
        from .keys import unpack

        k = unpack(self.key)
        return f"Entry({k.value}:{k.id} @{self.node} {self.layer})"


class BlockShape:
    """Size constants shared by every block of one catalog tree."""

    __slots__ = ("B", "stamp_bits", "record_bits", "per_word", "fan")

    def __init__(self, B):
        if B < 2:
            raise ValueError("block capacity must be at least 2")
        self.B = B
        self.stamp_bits = max(1, (4 * B - 1).bit_length())
        self.record_bits = self.stamp_bits + RANK_BITS
        if self.record_bits > 64:
            raise ValueError("block capacity too large for 64-bit records")
        self.per_word = 64 // self.record_bits
        # fanout of the in-block tree: about sqrt(records per word), at least 4
        per = 64 / self.record_bits
        fan = 4
        while fan * fan < per:
            fan += 1
        self.fan = fan


class Leaf:
    __slots__ = ("block", "entries", "keys", "masks", "words")

    def __init__(self, block, entries):
        self.block = block
        self.entries = entries
        self.keys = [e.key for e in entries]
        m = [0, 0, 0]
        for i, e in enumerate(entries):
            e.leaf = self
            bit = 1 << i
            if e.up is not None:
                m[UP] |= bit
            if e.in_ac:
                m[AC] |= bit
            if e.proper:
                m[C] |= bit
        self.masks = m
        self.words = None

    def repack(self, shape):
        self.words = kernels.pack_fields(
            [(e.stamp << RANK_BITS) | k for k, e in enumerate(self.entries)],
            shape.record_bits,
            shape.per_word,
        )

    def position(self, e, shape):
        k = kernels.find_field(
            self.words, len(self.entries), shape.record_bits, shape.per_word,
            RANK_BITS, e.stamp,
        )
        if k < 0 or self.entries[k] is not e:
            raise InvalidHandleError("entry is not stored in this leaf")
        return k


def _ins_bit(mask, pos, bit):
    low = mask & ((1 << pos) - 1)
    return low | ((mask >> pos) << (pos + 1)) | (bit << pos)


def _del_bit(mask, pos):
    low = mask & ((1 << pos) - 1)
    return low | ((mask >> (pos + 1)) << pos)


def _chunk(entries, base=LEAF_BASE, minimum=LEAF_MIN):
    out = [entries[i:i + base] for i in range(0, len(entries), base)]
    if len(out) > 1 and len(out[-1]) < minimum:
        tail = out.pop()
        out[-1] = out[-1] + tail
    return out


class Block:
    """A contiguous run of one node's extended catalog."""

    __slots__ = (
        "node", "shape", "leaves", "lfirst", "levels", "A", "next_stamp",
        "updates", "size", "counts", "label", "prev", "next",
    )

    def __init__(self, node, shape, entries=()):
        self.node = node
        self.shape = shape
        self.label = 0
        self.prev = None
        self.next = None
        self.rebuild(list(entries))

    # construction

    def rebuild(self, entries):
        shape = self.shape
        if len(entries) > 4 * shape.B:
            raise StructuralError(f"{len(entries)} entries exceed the stamp range of a block (4B = {4 * shape.B})")
        self.size = len(entries)
        self.A = list(entries)
        for s, e in enumerate(entries):
            e.stamp = s
        self.next_stamp = len(entries)
        self.updates = 0
        counts = [0, 0, 0]
        for e in entries:
            if e.up is not None:
                counts[UP] += 1
            if e.in_ac:
                counts[AC] += 1
            if e.proper:
                counts[C] += 1
        self.counts = counts
        chunks = _chunk(entries) if entries else [[]]
        self.leaves = []
        for ch in chunks:
            leaf = Leaf(self, ch)
            leaf.repack(shape)
            self.leaves.append(leaf)
        self.lfirst = [lf.keys[0] if lf.keys else -1 for lf in self.leaves]
        self._build_levels()

    def _build_levels(self):
        fan = self.shape.fan
        levels = [[], [], []]
        for m in MARKS:
            cur = [lf.masks[m] for lf in self.leaves]
            while len(cur) > 1:
                nxt = []
                for j in range(0, len(cur), fan):
                    w = 0
                    for s, x in enumerate(cur[j:j + fan]):
                        if x:
                            w |= 1 << s
                    nxt.append(w)
                levels[m].append(nxt)
                cur = nxt
        self.levels = levels

    def _restamp(self):
        ents = self.entries()
        self.A = ents
        for s, e in enumerate(ents):
            e.stamp = s
        self.next_stamp = len(ents)
        self.updates = 0
        for lf in self.leaves:
            lf.repack(self.shape)

    # access

    def entries(self):
        out = []
        for lf in self.leaves:
            out.extend(lf.entries)
        return out

    def first(self):
        lf = self.leaves[0]
        return lf.entries[0] if lf.entries else None

    def last(self):
        lf = self.leaves[-1]
        return lf.entries[-1] if lf.entries else None

    def first_key(self):
        return self.lfirst[0]

    def locate(self, e):
        """(leaf index, position in leaf) of a live entry of this block."""
        leaf = e.leaf
        if leaf is None or leaf.block is not self or not e.alive:
            raise InvalidHandleError("stale entry handle")
        li = bisect_right(self.lfirst, e.key) - 1
        if li < 0 or self.leaves[li] is not leaf:
            li = self.leaves.index(leaf)
        return li, leaf.position(e, self.shape)

    def entry_at_stamp(self, stamp):
        return self.A[stamp]

    def index_of_key(self, key):
        """(leaf index, position) of the largest entry with key <= ``key``; position -1 if none in leaf."""
        li = bisect_right(self.lfirst, key) - 1
        if li < 0:
            return 0, -1
        return li, bisect_right(self.leaves[li].keys, key) - 1

    # marks

    def _sync_path(self, li, m):
        nonzero = self.leaves[li].masks[m] != 0
        idx = li
        fan = self.shape.fan
        for level in self.levels[m]:
            p, s = divmod(idx, fan)
            old = level[p]
            new = (old | (1 << s)) if nonzero else (old & ~(1 << s))
            if new == old:
                return
            level[p] = new
            nonzero = new != 0
            idx = p

    def set_mark(self, e, m, on):
        li, pos = self.locate(e)
        leaf = self.leaves[li]
        bit = 1 << pos
        old = leaf.masks[m]
        new = (old | bit) if on else (old & ~bit)
        if new == old:
            return False
        leaf.masks[m] = new
        self.counts[m] += 1 if on else -1
        self._sync_path(li, m)
        return True

    def pred_at(self, li, pos, m):
        """Largest entry with mark ``m`` at or before (leaf li, position pos), or None."""
        if pos >= 0:
            b = kernels.msb_upto(self.leaves[li].masks[m], pos)
            if b >= 0:
                return self.leaves[li].entries[b]
        fan = self.shape.fan
        idx = li
        msb = kernels.msb_upto
        for k, level in enumerate(self.levels[m]):
            p, s = divmod(idx, fan)
            b = msb(level[p], s - 1)
            if b >= 0:
                idx = p * fan + b
                for j in range(k - 1, -1, -1):
                    idx = idx * fan + msb(self.levels[m][j][idx], fan - 1)
                leaf = self.leaves[idx]
                return leaf.entries[msb(leaf.masks[m], LEAF_MAX - 1)]
            idx = p
        return None

    def succ_at(self, li, pos, m):
        """Smallest entry with mark ``m`` at or after (leaf li, position pos), or None."""
        leaf = self.leaves[li]
        if pos < len(leaf.entries):
            b = kernels.lsb_from(leaf.masks[m], max(pos, 0))
            if b >= 0:
                return leaf.entries[b]
        fan = self.shape.fan
        idx = li
        lsb = kernels.lsb_from
        for k, level in enumerate(self.levels[m]):
            p, s = divmod(idx, fan)
            b = lsb(level[p], s + 1)
            if b >= 0:
                idx = p * fan + b
                for j in range(k - 1, -1, -1):
                    idx = idx * fan + lsb(self.levels[m][j][idx], 0)
                leaf = self.leaves[idx]
                return leaf.entries[lsb(leaf.masks[m], 0)]
            idx = p
        return None

    def pred_local(self, e, m):
        li, pos = self.locate(e)
        return self.pred_at(li, pos, m)

    def succ_local(self, e, m):
        li, pos = self.locate(e)
        return self.succ_at(li, pos, m)

    def last_marked(self, m):
        if not self.counts[m]:
            return None
        li = len(self.leaves) - 1
        return self.pred_at(li, len(self.leaves[li].entries) - 1, m)

    def first_marked(self, m):
        if not self.counts[m]:
            return None
        return self.succ_at(0, 0, m)

    # updates

    def insert(self, e):
        """Insert ``e`` (not yet stamped) in key order; returns True when it became the first entry.

        A block holds fewer than ``2B`` entries between splits; inserting into
        a full block raises :class:`StructuralError` (stamps would overflow).
        """
        shape = self.shape
        if self.size >= 2 * shape.B:
            raise StructuralError(f"block holds {self.size} entries; split it before inserting (2B = {2 * shape.B})")
        if self.next_stamp >= 4 * shape.B or self.updates >= 2 * shape.B:
            self._restamp()
        e.stamp = self.next_stamp
        self.next_stamp += 1
        self.A.append(e)
        self.updates += 1
        self.size += 1
        key = e.key
        li = bisect_right(self.lfirst, key) - 1
        if li < 0:
            li = 0
        leaf = self.leaves[li]
        pos = bisect_left(leaf.keys, key)
        leaf.entries.insert(pos, e)
        leaf.keys.insert(pos, key)
        e.leaf = leaf
        flags = (e.up is not None, e.in_ac, e.proper)
        masks = leaf.masks
        for m in MARKS:
            f = flags[m]
            masks[m] = _ins_bit(masks[m], pos, 1 if f else 0)
            if f:
                self.counts[m] += 1
        if pos == 0:
            self.lfirst[li] = key
        if len(leaf.entries) > LEAF_MAX:
            self._split_leaf(li)
        else:
            leaf.repack(shape)
            for m in MARKS:
                self._sync_path(li, m)
        return li == 0 and pos == 0

    def remove(self, e):
        """Remove ``e``; returns True when it was the first entry."""
        li, pos = self.locate(e)
        leaf = self.leaves[li]
        was_first = li == 0 and pos == 0
        del leaf.entries[pos]
        del leaf.keys[pos]
        masks = leaf.masks
        for m in MARKS:
            if (masks[m] >> pos) & 1:
                self.counts[m] -= 1
            masks[m] = _del_bit(masks[m], pos)
        self.A[e.stamp] = None
        self.updates += 1
        self.size -= 1
        e.leaf = None
        e.stamp = -1
        n = len(leaf.entries)
        if n == 0 and len(self.leaves) > 1:
            del self.leaves[li]
            del self.lfirst[li]
            self._build_levels()
        elif n < LEAF_MIN and len(self.leaves) > 1:
            self._merge_leaf(li)
        else:
            self.lfirst[li] = leaf.keys[0] if n else -1
            leaf.repack(self.shape)
            for m in MARKS:
                self._sync_path(li, m)
        if self.updates >= 2 * self.shape.B:
            self._restamp()
        return was_first

    def _split_leaf(self, li):
        leaf = self.leaves[li]
        ents = leaf.entries
        half = len(ents) // 2
        a = Leaf(self, ents[:half])
        b = Leaf(self, ents[half:])
        a.repack(self.shape)
        b.repack(self.shape)
        self.leaves[li:li + 1] = [a, b]
        self.lfirst[li:li + 1] = [a.keys[0], b.keys[0]]
        self._build_levels()

    def _merge_leaf(self, li):
        j = li if li + 1 < len(self.leaves) else li - 1
        ents = self.leaves[j].entries + self.leaves[j + 1].entries
        parts = [ents] if len(ents) <= LEAF_MAX else [ents[: len(ents) // 2], ents[len(ents) // 2:]]
        new = []
        for p in parts:
            lf = Leaf(self, p)
            lf.repack(self.shape)
            new.append(lf)
        self.leaves[j:j + 2] = new
        self.lfirst[j:j + 2] = [lf.keys[0] for lf in new]
        self._build_levels()

    def split(self):
        """Move the upper half into a new block, returned to the caller for linking."""
        ents = self.entries()
        half = len(ents) // 2
        right = Block(self.node, self.shape, ents[half:])
        self.rebuild(ents[:half])
        return right

    def absorb(self, other):
        self.rebuild(self.entries() + other.entries())

    # audit

    def check(self):
        """List of internal-consistency violations (empty when sound)."""
        bad = []
        shape = self.shape
        ents = self.entries()
        if len(ents) != self.size:
            bad.append("block size counter out of date")
        keys = [e.key for e in ents]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            bad.append("block entries out of order")
        seen = set()
        for e in ents:
            if e.stamp in seen or not 0 <= e.stamp < 4 * shape.B:
                bad.append(f"bad stamp {e.stamp}")
            seen.add(e.stamp)
            if self.A[e.stamp] is not e:
                bad.append("stamp array does not map back to entry")
        counts = [0, 0, 0]
        for li, lf in enumerate(self.leaves):
            if lf.block is not self:
                bad.append("leaf owned by another block")
            if lf.keys != [e.key for e in lf.entries]:
                bad.append("leaf key cache stale")
            if len(self.leaves) > 1 and not LEAF_MIN <= len(lf.entries) <= LEAF_MAX:
                bad.append(f"leaf size {len(lf.entries)} out of range")
            if self.lfirst[li] != (lf.keys[0] if lf.keys else -1):
                bad.append("leaf first-key cache stale")
            for k, e in enumerate(lf.entries):
                if e.leaf is not lf:
                    bad.append("entry leaf pointer stale")
                if lf.position(e, shape) != k:
                    bad.append("packed rank record wrong")
            for m, flag in ((UP, lambda e: e.up is not None), (AC, lambda e: e.in_ac),
                            (C, lambda e: e.proper)):
                want = 0
                for k, e in enumerate(lf.entries):
                    if flag(e):
                        want |= 1 << k
                        counts[m] += 1
                if lf.masks[m] != want:
                    bad.append(f"leaf mask {m} disagrees with entries")
        if counts != self.counts:
            bad.append("mark counters out of date")
        saved = self.levels
        self._build_levels()
        if saved != self.levels:
            bad.append("internal mask words inconsistent with leaves")
        self.levels = saved
        return bad
