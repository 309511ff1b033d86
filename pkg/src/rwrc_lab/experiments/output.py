"""Result files: result.json, CSV tables, summary.txt and error.json.

Everything written here is a pure function of the validated config, so
re-running a config produces byte-identical files. No timestamps, hostnames
or log lines end up in the output directory.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import orjson
import scipy
import structlog
from pydantic import BaseModel

from rwrc_lab import __version__
from rwrc_lab.utils.files import atomic_write_bytes, atomic_write_text

log = structlog.get_logger()

_JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def _default(value: Any) -> Any:
    """Fallback for the few types neither orjson nor to_jsonable handle."""
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Type is not JSON serializable: {type(value).__name__}")


def to_jsonable(value: Any) -> Any:
    """Plain JSON data for dataclasses, models, enums and numpy values (non-finite floats → None)."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value) if f.repr}
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="json"))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def dumps(data: Any) -> bytes:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return orjson.dumps(to_jsonable(data), default=_default, option=_JSON_OPTIONS) + b"\n"


def config_hash(config: BaseModel) -> str:
    """sha256 of the canonical sorted-key JSON of the validated config."""
    canonical = orjson.dumps(config.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS)
    return hashlib.sha256(canonical).hexdigest()


def versions() -> Dict[str, str]:
    return {"rwrc_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def table_to_csv(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """CSV text with a header row; floats are written with ``repr`` so they round-trip."""
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


class ResultWriter:
    """Writes the files of one run into an output directory.

    Attributes:
        out_dir: Target directory (created on first write).
        written: Paths written so far, in order.
    """

    def __init__(self, out_dir: Union[str, Path]) -> None:
        self.out_dir = Path(out_dir)
        self.written: List[Path] = []

    def _write(self, name: str, content: bytes) -> Path:
        path = atomic_write_bytes(self.out_dir / name, content)
        self.written.append(path)
        log.debug("result_file_written", path=str(path), bytes=len(content))
        return path

    def write_result(self, kind: str, config: BaseModel, result: Mapping[str, Any]) -> Path:
        """result.json with the config, its hash and the module versions embedded."""
        document = {
            "kind": kind,
            "config": config.model_dump(mode="json"),
            "config_hash": config_hash(config),
            "versions": versions(),
            "result": result,
        }
        return self._write("result.json", dumps(document))

    def write_table(self, name: str, rows: Sequence[Mapping[str, Any]]) -> Path:
        return self._write(f"{name}.csv", table_to_csv(rows).encode("utf-8"))

    def write_json(self, name: str, data: Any) -> Path:
        return self._write(name, dumps(data))

    def write_text(self, name: str, text: str) -> Path:
        path = atomic_write_text(self.out_dir / name, text)
        self.written.append(path)
        return path

    def write_error(self, error: str, message: str, hint: Optional[str] = None, paths: Optional[List[str]] = None) -> Path:
        """error.json ``{error, message, hint, path?}``; ``path`` is the first offending field."""
        document: Dict[str, Any] = {"error": error, "message": message, "hint": hint}
        if paths:
            document["path"] = paths[0]
            document["paths"] = list(paths)
        return self._write("error.json", dumps(document))
