"""Searching, reporting and maxima over catalogs on node-to-ancestor tree paths."""
from .errors import (
    DomainError,
    DuplicateKeyError,
    InvalidHandleError,
    NotFoundError,
    StructuralError,
    TraceParseError,
    TreeCascadeError,
)
from .keys import Key

__version__ = "0.1.0"

__all__ = [
    "Key",
    "TreeCascadeError",
    "StructuralError",
    "DuplicateKeyError",
    "InvalidHandleError",
    "NotFoundError",
    "DomainError",
    "TraceParseError",
]
