# cython: language_level=3
"""Compiled word kernels; same contracts as ``_kernels_py``."""
from cpython cimport array
import array

cdef extern from *:
    int __builtin_clzll(unsigned long long)
    int __builtin_ctzll(unsigned long long)

ctypedef unsigned long long u64

WORD = 64


cpdef int msb_upto(u64 mask, int i):
    if i < 0:
        return -1
    if i < 63:
        mask &= (<u64>2 << i) - 1
    if mask == 0:
        return -1
    return 63 - __builtin_clzll(mask)


cpdef int lsb_from(u64 mask, int i):
    if i < 0:
        i = 0
    if i > 63:
        return -1
    mask >>= i
    if mask == 0:
        return -1
    return i + __builtin_ctzll(mask)


cpdef u64 field_get(array.array words, Py_ssize_t idx, int bits, int per_word):
    cdef Py_ssize_t q = idx // per_word
    cdef int r = idx % per_word
    return (words.data.as_ulonglongs[q] >> (r * bits)) & ((<u64>1 << bits) - 1)


cpdef Py_ssize_t find_field(array.array words, Py_ssize_t count, int bits,
                            int per_word, int shift, u64 value):
    cdef u64 fmask = (<u64>1 << bits) - 1
    cdef u64 *data = words.data.as_ulonglongs
    cdef Py_ssize_t nw = len(words)
    cdef Py_ssize_t k = 0, q
    cdef int r
    cdef u64 w
    for q in range(nw):
        w = data[q]
        for r in range(per_word):
            if k >= count:
                return -1
            if (w & fmask) >> shift == value:
                return k
            w >>= bits
            k += 1
    return -1


cpdef u64 field_max(array.array words, tuple positions, int bits, int per_word):
    cdef u64 fmask = (<u64>1 << bits) - 1
    cdef u64 *data = words.data.as_ulonglongs
    cdef u64 best = 0, v
    cdef Py_ssize_t p
    for obj in positions:
        p = obj
        v = (data[p // per_word] >> ((p % per_word) * bits)) & fmask
        if v > best:
            best = v
    return best


def pack_fields(values, int bits, int per_word):
    cdef Py_ssize_t n = len(values)
    cdef array.array out = array.array("Q", bytes(8 * ((n + per_word - 1) // per_word)))
    cdef u64 *data = out.data.as_ulonglongs
    cdef Py_ssize_t k = 0
    cdef u64 v
    for obj in values:
        v = obj
        data[k // per_word] |= v << ((k % per_word) * bits)
        k += 1
    return out


cpdef Py_ssize_t bitset_first(array.array words, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t top = len(words) * 64 - 1
    cdef u64 *data = words.data.as_ulonglongs
    cdef Py_ssize_t wlo, whi, w
    cdef u64 x
    if lo < 0:
        lo = 0
    if hi > top:
        hi = top
    if lo > hi:
        return -1
    wlo = lo >> 6
    whi = hi >> 6
    for w in range(wlo, whi + 1):
        x = data[w]
        if w == wlo:
            x &= (~<u64>0) << (lo & 63)
        if w == whi and (hi & 63) < 63:
            x &= (<u64>2 << (hi & 63)) - 1
        if x:
            return (w << 6) + __builtin_ctzll(x)
    return -1


cpdef Py_ssize_t bitset_last(array.array words, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t top = len(words) * 64 - 1
    cdef u64 *data = words.data.as_ulonglongs
    cdef Py_ssize_t wlo, whi, w
    cdef u64 x
    if lo < 0:
        lo = 0
    if hi > top:
        hi = top
    if lo > hi:
        return -1
    wlo = lo >> 6
    whi = hi >> 6
    w = whi
    while w >= wlo:
        x = data[w]
        if w == wlo:
            x &= (~<u64>0) << (lo & 63)
        if w == whi and (hi & 63) < 63:
            x &= (<u64>2 << (hi & 63)) - 1
        if x:
            return (w << 6) + 63 - __builtin_clzll(x)
        w -= 1
    return -1
