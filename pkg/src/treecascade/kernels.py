"""Selects the word-kernel backend at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise,
or when ``TREECASCADE_PURE=1`` is set, the pure-Python implementation is
used.  Both expose the same functions with the same contracts.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("TREECASCADE_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

msb_upto = _impl.msb_upto
lsb_from = _impl.lsb_from
field_get = _impl.field_get
find_field = _impl.find_field
field_max = _impl.field_max
pack_fields = _impl.pack_fields
bitset_first = _impl.bitset_first
bitset_last = _impl.bitset_last


def backends():
    """Name -> module for every backend importable in this process."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return found
    found["cython"] = compiled
    return found
