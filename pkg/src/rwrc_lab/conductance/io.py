"""JSON serialisation of conductance fields.

Layout::

    {"header": {"d": ..., "alpha": ..., "G": [[lo, hi], ...], "model": {...},
                "seed": ..., "source": ...},
     "edges": [[z_1, ..., z_d, axis, weight], ...]}

Edges cover every halo slot in C order, axis-major.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import orjson
import structlog

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import build_box
from rwrc_lab.utils.files import atomic_write_bytes

log = structlog.get_logger()


def field_to_dict(field: ConductanceField) -> Dict[str, Any]:
    """Serialisable dict of a field."""
    box = field.box
    cells = box.halo_cells
    edges: List[List[Any]] = []
    for axis in range(box.d):
        weights = field.weights[axis].ravel()
        for z, w in zip(cells.tolist(), weights.tolist()):
            edges.append([*z, axis, w])
    return {
        "header": {
            "d": box.d,
            "alpha": box.alpha,
            "G": [list(iv) for iv in box.G],
            "model": field.model,
            "seed": field.seed,
            "source": field.source,
        },
        "edges": edges,
    }


def field_from_dict(data: Dict[str, Any]) -> ConductanceField:
    """Rebuild a field from :func:`field_to_dict` output.

    Raises:
        DomainError: If the edge list does not match the header geometry.
    """
    try:
        header = data["header"]
        box = build_box(int(header["d"]), float(header["alpha"]), header["G"])
        edges = np.asarray(data["edges"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"Malformed field document: {e}") from e

    d = box.d
    expected = d * int(np.prod(box.halo_shape))
    if edges.ndim != 2 or edges.shape != (expected, d + 2):
        raise DomainError(
            f"Field document has {edges.shape[0] if edges.ndim == 2 else 0} edges, expected {expected}"
        )
    weights = np.empty((d, *box.halo_shape))
    k = edges[:, :d].astype(np.int64) - np.asarray(box.halo_lower)
    axes = edges[:, d].astype(np.int64)
    weights[(axes, *k.T)] = edges[:, d + 1]
    if np.any(weights <= 0):
        raise DomainError("Field document contains non-positive weights")
    return ConductanceField(
        box=box,
        weights=weights,
        seed=header.get("seed"),
        model=header.get("model"),
        source="file",
    )


def save_field(field: ConductanceField, path: Union[str, Path]) -> Path:
    """Write a field as JSON (atomic)."""
    target = atomic_write_bytes(path, orjson.dumps(field_to_dict(field), option=orjson.OPT_SORT_KEYS))
    log.info("field_saved", path=str(target), sites=field.box.size)
    return target


def load_field(path: Union[str, Path]) -> ConductanceField:
    """Read a field written by :func:`save_field`."""
    try:
        data = orjson.loads(Path(path).read_bytes())
    except FileNotFoundError:
        raise DomainError(f"Field file not found: {path}")
    except orjson.JSONDecodeError as e:
        raise DomainError(f"Invalid JSON in field file {path}: {e}")
    return field_from_dict(data)
