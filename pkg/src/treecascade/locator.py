"""Block labels and label-range emptiness for one node.

Every block of a node's extended catalog gets a positive integer label,
increasing in block order, drawn from a universe of size ``U`` (a power of
two, about four times the block count).  For each tracked layer (AC and C)
a range structure stores the labels of blocks holding at least one entry of
that layer, so "is there an AC element strictly between block i and block
j, and which block holds one?" is a single range query.

Two range backends share one interface:

* ``BitsetRange``: flat bitset, word-scan queries, O(1) updates;
* ``LayeredBitset``: 64-ary summary levels, O(log_64 U) queries and updates.
"""
from array import array

from . import kernels
from .blockindex import AC, C

LABEL_LAYERS = (AC, C)


def _zero_words(nbits):
    return array("Q", bytes(8 * ((nbits + 63) // 64 or 1)))


class BitsetRange:
    """Label set as one flat bitset."""

    name = "bitset"

    def __init__(self, universe):
        self.universe = universe
        self.words = _zero_words(universe)
        self.count = 0

    def add(self, x):
        w, b = x >> 6, 1 << (x & 63)
        if not self.words[w] & b:
            self.words[w] |= b
            self.count += 1

    def discard(self, x):
        w, b = x >> 6, 1 << (x & 63)
        if self.words[w] & b:
            self.words[w] &= ~b & 0xFFFFFFFFFFFFFFFF
            self.count -= 1

    def __contains__(self, x):
        return bool((self.words[x >> 6] >> (x & 63)) & 1)

    def first_in(self, lo, hi):
        return kernels.bitset_first(self.words, lo, hi)

    def last_in(self, lo, hi):
        return kernels.bitset_last(self.words, lo, hi)

    def members(self):
        out = []
        for w, x in enumerate(self.words):
            while x:
                low = x & -x
                out.append((w << 6) + low.bit_length() - 1)
                x ^= low
        return out


class LayeredBitset:
    """Label set as a 64-ary tree of bitsets (van Emde Boas flavour, fixed height)."""

    name = "layered"

    def __init__(self, universe):
        self.universe = universe
        self.levels = []
        n = max(universe, 1)
        while True:
            self.levels.append(_zero_words(n))
            if n <= 64:
                break
            n = (n + 63) // 64
        self.count = 0

    def __contains__(self, x):
        return bool((self.levels[0][x >> 6] >> (x & 63)) & 1)

    def add(self, x):
        if x in self:
            return
        self.count += 1
        for words in self.levels:
            w, b = x >> 6, 1 << (x & 63)
            was = words[w]
            words[w] = was | b
            if was:
                break
            x = w

    def discard(self, x):
        if x not in self:
            return
        self.count -= 1
        for words in self.levels:
            w = x >> 6
            words[w] &= ~(1 << (x & 63)) & 0xFFFFFFFFFFFFFFFF
            if words[w]:
                break
            x = w

    def _succ(self, x):
        """Smallest member >= x, or -1."""
        if x < 0:
            x = 0
        if x >= self.universe:
            return -1
        lsb = kernels.lsb_from
        lv = 0
        # climb until a word holds a candidate at or after x
        while True:
            words = self.levels[lv]
            w = x >> 6
            if w >= len(words):
                return -1
            b = lsb(words[w], x & 63)
            if b >= 0:
                x = (w << 6) | b
                break
            if lv + 1 == len(self.levels):
                return -1
            x = w + 1
            lv += 1
        while lv > 0:
            lv -= 1
            x = (x << 6) | lsb(self.levels[lv][x], 0)
        return x

    def _pred(self, x):
        """Largest member <= x, or -1."""
        if x < 0:
            return -1
        if x >= self.universe:
            x = self.universe - 1
        msb = kernels.msb_upto
        lv = 0
        while True:
            words = self.levels[lv]
            w = x >> 6
            b = msb(words[w], x & 63)
            if b >= 0:
                x = (w << 6) | b
                break
            if lv + 1 == len(self.levels) or w == 0:
                return -1
            x = w - 1
            lv += 1
        while lv > 0:
            lv -= 1
            x = (x << 6) | msb(self.levels[lv][x], 63)
        return x

    def first_in(self, lo, hi):
        if lo > hi:
            return -1
        s = self._succ(lo)
        return s if 0 <= s <= hi else -1

    def last_in(self, lo, hi):
        if lo > hi:
            return -1
        p = self._pred(hi)
        return p if p >= lo else -1

    def members(self):
        out = []
        for w, x in enumerate(self.levels[0]):
            while x:
                low = x & -x
                out.append((w << 6) + low.bit_length() - 1)
                x ^= low
        return out


BACKENDS = {"bitset": BitsetRange, "layered": LayeredBitset}


class NodeLocator:
    """Labels for one node's blocks plus one range set per tracked layer."""

    __slots__ = ("backend", "U", "ranges", "label_block", "nblocks", "relabels")

    def __init__(self, backend="bitset"):
        if backend not in BACKENDS:
            raise ValueError(f"unknown locator backend {backend!r}")
        self.backend = backend
        self.U = 8
        self.label_block = {}
        self.nblocks = 0
        self.relabels = 0
        self.ranges = {m: BACKENDS[backend](self.U) for m in LABEL_LAYERS}

    # presence

    def present(self, block, m):
        if block.counts[m]:
            self.ranges[m].add(block.label)
        else:
            self.ranges[m].discard(block.label)

    def refresh(self, block):
        for m in LABEL_LAYERS:
            self.present(block, m)

    # labelling

    def assign_all(self, first_block):
        """Label a whole block list evenly and rebuild the range sets."""
        blocks = []
        b = first_block
        while b is not None:
            blocks.append(b)
            b = b.next
        self.nblocks = len(blocks)
        U = 8
        while U < 4 * len(blocks):
            U *= 2
        self.U = U
        self.ranges = {m: BACKENDS[self.backend](U) for m in LABEL_LAYERS}
        self.label_block = {}
        cnt = len(blocks)
        for k, b in enumerate(blocks):
            b.label = (k + 1) * U // (cnt + 1)
            self.label_block[b.label] = b
            self.refresh(b)

    def insert_after(self, left, block):
        """Give ``block`` (already linked right after ``left``) a label."""
        self.nblocks += 1
        lo = left.label
        hi = block.next.label if block.next is not None else self.U
        if hi - lo >= 2:
            block.label = (lo + hi) // 2
            self.label_block[block.label] = block
            self.refresh(block)
            return
        self._rebalance(left, block)

    def _rebalance(self, left, block):
        U = self.U
        logU = U.bit_length() - 1
        j = 1
        while j <= logU:
            size = 1 << j
            start = (left.label >> j) << j
            members = self._window(left, block, start, start + size)
            if len(members) <= size * (1 - j / (2 * logU)) and len(members) < size:
                self._relabel(members, start, size)
                return
            j += 1
        # whole universe too dense: double it and spread everything
        first = left
        while first.prev is not None:
            first = first.prev
        self.relabels += self.nblocks
        nb = self.nblocks
        self.assign_all(first)
        self.nblocks = nb

    def _window(self, left, block, lo, hi):
        """Blocks whose label lies in [lo, hi), plus the unlabelled ``block``, in order."""
        before = []
        b = left
        while b is not None and b.label >= lo:
            before.append(b)
            b = b.prev
        before.reverse()
        after = []
        b = block.next
        while b is not None and b.label < hi:
            after.append(b)
            b = b.next
        return before + [block] + after

    def _relabel(self, members, start, size):
        cnt = len(members)
        moves = []
        for k, b in enumerate(members):
            new = start + (k + 1) * size // (cnt + 1)
            moves.append((b, new))
        for b, _ in moves:
            if b.label and self.label_block.get(b.label) is b:
                del self.label_block[b.label]
                for m in LABEL_LAYERS:
                    self.ranges[m].discard(b.label)
        for b, new in moves:
            b.label = new
            self.label_block[new] = b
            self.refresh(b)
        self.relabels += cnt

    def remove(self, block):
        self.nblocks -= 1
        if self.label_block.get(block.label) is block:
            del self.label_block[block.label]
        for m in LABEL_LAYERS:
            self.ranges[m].discard(block.label)
        block.label = 0

    def maybe_shrink(self, first_block):
        if self.U > 8 and self.nblocks * 8 < self.U:
            self.assign_all(first_block)

    # queries

    def first_between(self, m, l1, l2):
        """Block with tracked layer ``m`` and label strictly between l1 and l2, or None."""
        lab = self.ranges[m].first_in(l1 + 1, l2 - 1)
        return None if lab < 0 else self.label_block[lab]

    def last_before(self, m, label):
        lab = self.ranges[m].last_in(1, label - 1)
        return None if lab < 0 else self.label_block[lab]

    def first_after(self, m, label):
        lab = self.ranges[m].first_in(label + 1, self.U)
        return None if lab < 0 else self.label_block[lab]

    def check(self, first_block):
        bad = []
        b = first_block
        prev = 0
        labelled = set()
        want = {m: set() for m in LABEL_LAYERS}
        n = 0
        while b is not None:
            n += 1
            if not 0 < b.label <= self.U:
                bad.append(f"label {b.label} outside [1, {self.U}]")
            if b.label <= prev:
                bad.append("labels not increasing in block order")
            if self.label_block.get(b.label) is not b:
                bad.append("label map does not point back to block")
            prev = b.label
            labelled.add(b.label)
            for m in LABEL_LAYERS:
                if b.counts[m]:
                    want[m].add(b.label)
            b = b.next
        if n != self.nblocks:
            bad.append("block counter out of date")
        if set(self.label_block) != labelled:
            bad.append("label map holds stale labels")
        for m in LABEL_LAYERS:
            have = set(self.ranges[m].members())
            if have != want[m]:
                bad.append(f"range set for layer {m} differs from blocks with that layer")
        return bad
