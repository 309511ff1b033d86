"""Deterministic sampling of conductance fields."""

from __future__ import annotations

from typing import Any, Union

import numpy as np
import structlog
from numpy.typing import NDArray

from rwrc_lab.conductance.models import (
    ConductanceField,
    ConstantModel,
    EllipticModel,
    TailModel,
)
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.utils.streams import stream

log = structlog.get_logger()

AnyModel = Union[TailModel, EllipticModel, ConstantModel]

# Stream keys: one stream per edge direction for fields, separate families for bulk draws
FIELD_STREAM = 0
BULK_STREAM = 1


def draw_conductances(model: AnyModel, size: Any, seed: int, *keys: int) -> NDArray[np.float64]:
    """Draw i.i.d. conductances from the stream ``(seed, BULK_STREAM, *keys)``.

    Used for tail-law checks and batch event estimators where no geometry is needed.
    """
    return model.draw(stream(seed, BULK_STREAM, *keys), size)


def sample_field(box: LatticeBox, model: AnyModel, seed: int) -> ConductanceField:
    """Sample i.i.d. edge weights for every edge slot of the box.

    Direction ``i`` draws its weights from the Philox stream ``(seed, 0, i)`` in
    C order over the halo grid, so the field is a deterministic function of
    ``(box, model, seed)``. Under the tail law the same Exp(1) draws are used for
    every (η, D, M), which gives the monotone coupling in D.

    Args:
        box: Lattice box.
        model: Conductance law.
        seed: Non-negative integer seed.

    Returns:
        The sampled field.
    """
    weights = np.stack(
        [model.draw(stream(seed, FIELD_STREAM, axis), box.halo_shape) for axis in range(box.d)]
    )
    field = ConductanceField(
        box=box,
        weights=weights,
        seed=seed,
        model=model.model_dump(),
        source="sample",
    )
    log.debug(
        "field_sampled",
        kind=model.kind,
        d=box.d,
        sites=box.size,
        seed=seed,
        min_weight=float(field.touching_weights().min()),
    )
    return field
