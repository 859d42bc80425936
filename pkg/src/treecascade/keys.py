"""Word-sized keys.

A key is a ``(value, id)`` pair ordered lexicographically.  Internally both
halves are packed into one integer, ``value << ID_BITS | id``, so that every
comparison in the hot paths is a plain integer comparison.  The all-ones id
is reserved: it lets a query value ``x`` be turned into a probe that sorts
strictly after every stored key with value ``x`` (and strictly before the
next value), so no stored key ever compares equal to a probe.
"""
from typing import NamedTuple

ID_BITS = 32
ID_MASK = (1 << ID_BITS) - 1
MAX_ID = ID_MASK - 1


class Key(NamedTuple):
    value: int
    id: int = 0

    def packed(self) -> int:
        return pack(self.value, self.id)


def pack(value: int, id: int = 0) -> int:
    if value < 0:
        raise ValueError(f"key values are unsigned, got {value}")
    if not 0 <= id <= MAX_ID:
        raise ValueError(f"key id out of range: {id}")
    return (value << ID_BITS) | id


def unpack(k: int) -> Key:
    return Key(k >> ID_BITS, k & ID_MASK)


def as_packed(key) -> int:
    """Pack a ``Key`` or ``(value, id)`` tuple; a bare int is a value with id 0."""
    if isinstance(key, int):
        return pack(key, 0)
    value, id = key
    return pack(value, id)


def probe_high(x: int) -> int:
    """Sorts after every key with value <= x and before every key with value > x."""
    return (x << ID_BITS) | ID_MASK


def probe_low(x: int) -> int:
    """Sorts after every key with value < x and before every key with value >= x."""
    return (x << ID_BITS) - 1
