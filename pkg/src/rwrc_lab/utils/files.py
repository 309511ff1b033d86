"""Crash-safe file writes (temp file in the target directory, then move)."""

from __future__ import annotations

import shutil
import tempfile
from pathlib import Path
from typing import Union

PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, content: bytes) -> Path:
    """Write bytes atomically, creating the parent directory if needed.

    Args:
        path: Destination file.
        content: Bytes to write.

    Returns:
        The destination path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    # Temp file in the same directory so the move is a same-filesystem rename
    temp_fd, temp_path = tempfile.mkstemp(
        dir=target.parent,
        prefix=".tmp-",
        suffix=target.suffix,
    )
    try:
        with open(temp_fd, "wb") as f:
            f.write(content)
        shutil.move(temp_path, target)
    except Exception:
        Path(temp_path).unlink(missing_ok=True)
        raise
    return target


def atomic_write_text(path: PathLike, content: str) -> Path:
    """Write UTF-8 text atomically."""
    return atomic_write_bytes(path, content.encode("utf-8"))
