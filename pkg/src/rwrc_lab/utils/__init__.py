"""Utility modules for rwrc-lab."""

from .files import atomic_write_bytes, atomic_write_text
from .streams import derive_seed, stream

__all__ = [
    "atomic_write_bytes",
    "atomic_write_text",
    "derive_seed",
    "stream",
]
