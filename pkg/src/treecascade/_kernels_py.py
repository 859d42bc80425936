"""Pure-Python word kernels (reference and fallback for ``_kernels.pyx``).

All word arrays are ``array('Q')`` of 64-bit words.  A "field" is a
fixed-width unsigned record; ``per_word`` fields are packed into each word
starting at bit 0 and no field straddles a word boundary.
"""
from array import array

WORD = 64
_ALL = (1 << WORD) - 1


def msb_upto(mask, i):
    """Index of the highest set bit of ``mask`` at position <= i, or -1."""
    if i < 0:
        return -1
    return (mask & ((2 << i) - 1)).bit_length() - 1


def lsb_from(mask, i):
    """Index of the lowest set bit of ``mask`` at position >= i, or -1."""
    if i < 0:
        i = 0
    m = mask >> i
    if not m:
        return -1
    return i + (m & -m).bit_length() - 1


def field_get(words, idx, bits, per_word):
    q, r = divmod(idx, per_word)
    return (words[q] >> (r * bits)) & ((1 << bits) - 1)


def find_field(words, count, bits, per_word, shift, value):
    """First field index k < count with ``field >> shift == value``, or -1."""
    fmask = (1 << bits) - 1
    k = 0
    for w in words:
        for _ in range(per_word):
            if k >= count:
                return -1
            if (w & fmask) >> shift == value:
                return k
            w >>= bits
            k += 1
    return -1


def field_max(words, positions, bits, per_word):
    """Maximum of the fields at ``positions`` (0 when ``positions`` is empty)."""
    fmask = (1 << bits) - 1
    best = 0
    for p in positions:
        q, r = divmod(p, per_word)
        v = (words[q] >> (r * bits)) & fmask
        if v > best:
            best = v
    return best


def pack_fields(values, bits, per_word):
    out = array("Q", bytes(8 * ((len(values) + per_word - 1) // per_word)))
    for k, v in enumerate(values):
        q, r = divmod(k, per_word)
        out[q] |= v << (r * bits)
    return out


def bitset_first(words, lo, hi):
    """Smallest set bit index in [lo, hi], or -1."""
    if lo < 0:
        lo = 0
    top = len(words) * WORD - 1
    if hi > top:
        hi = top
    if lo > hi:
        return -1
    wlo = lo >> 6
    whi = hi >> 6
    for w in range(wlo, whi + 1):
        x = words[w]
        if w == wlo:
            x &= (_ALL << (lo & 63)) & _ALL
        if w == whi:
            x &= (2 << (hi & 63)) - 1
        if x:
            return (w << 6) + (x & -x).bit_length() - 1
    return -1


def bitset_last(words, lo, hi):
    """Largest set bit index in [lo, hi], or -1."""
    if lo < 0:
        lo = 0
    top = len(words) * WORD - 1
    if hi > top:
        hi = top
    if lo > hi:
        return -1
    wlo = lo >> 6
    whi = hi >> 6
    for w in range(whi, wlo - 1, -1):
        x = words[w]
        if w == wlo:
            x &= (_ALL << (lo & 63)) & _ALL
        if w == whi:
            x &= (2 << (hi & 63)) - 1
        if x:
            return (w << 6) + x.bit_length() - 1
    return -1
