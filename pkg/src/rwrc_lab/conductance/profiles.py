"""Rescaled fields a_t, unscaled profiles φ_t and the tail functional."""

from __future__ import annotations

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox, floor_scaled
from rwrc_lab.quadrature import DEFAULT_ORDER, Profile, as_profile, box_integral, cube_rule

FieldEvaluator = Callable[[NDArray[np.float64], int], NDArray[np.float64]]


class RescaledField:
    """Evaluator of a_t(y, e_i) = β·a(⌊αy⌋, e_i) on G.

    Piecewise constant on the cells [z/α, (z+1)/α).
    """

    def __init__(self, field: ConductanceField, beta: float) -> None:
        if beta <= 0:
            raise DomainError(f"beta must be positive, got {beta}")
        self.field = field
        self.beta = float(beta)

    @property
    def box(self) -> LatticeBox:
        return self.field.box

    def __call__(self, y: Union[Sequence[float], NDArray[np.float64]], axis: int) -> NDArray[np.float64]:
        """Evaluate at one point ``(d,)`` or many points ``(m, d)``.

        Raises:
            DomainError: If a point lies outside the open box G.
        """
        pts = np.asarray(y, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        lo = np.array([iv[0] for iv in self.box.G])
        hi = np.array([iv[1] for iv in self.box.G])
        outside = np.any((pts <= lo) | (pts >= hi), axis=1)
        if np.any(outside):
            raise DomainError(
                f"Point {pts[np.argmax(outside)].tolist()} lies outside G={list(self.box.G)}"
            )
        k = floor_scaled(pts, self.box.alpha) - np.asarray(self.box.halo_lower)
        values = self.beta * self.field.weights[axis][tuple(k.T)]
        return values[0] if single else values


def rescaled_field(field: ConductanceField, beta: float) -> RescaledField:
    """The rescaled environment y ↦ β·a(⌊αy⌋, e)."""
    return RescaledField(field, beta)


def cell_overlaps(box: LatticeBox) -> NDArray[np.float64]:
    """Lebesgue measure of (cell ∩ G) for every halo cell, C order."""
    cells = box.halo_cells.astype(float)
    alpha = box.alpha
    volume = np.ones(cells.shape[0])
    for axis, (lo, hi) in enumerate(box.G):
        left = np.maximum(cells[:, axis] / alpha, lo)
        right = np.minimum((cells[:, axis] + 1.0) / alpha, hi)
        volume *= np.clip(right - left, 0.0, None)
    return volume


def unscaled_profile(
    phi: Union[float, Profile],
    box: LatticeBox,
    order: int = DEFAULT_ORDER,
) -> ConductanceField:
    """Discretise a continuum profile: φ_t(z, e) = ∫_{[0,1]^d} φ((z+y)/α, e) dy.

    The average is taken with a tensor Gauss-Legendre rule of ``order`` points
    per axis on every halo cell, so polynomial profiles of degree ≤ 2·order−1
    are reproduced exactly.

    Args:
        phi: Positive profile ``phi(y, i)`` (or a constant).
        box: Lattice box.
        order: Quadrature points per axis.

    Returns:
        A ConductanceField with ``source="profile"``.

    Raises:
        DomainError: If phi evaluates to a non-positive value.
    """
    profile = as_profile(phi)
    cells = box.halo_cells.astype(float)
    nodes, weights = cube_rule(box.d, order)
    points = ((cells[:, None, :] + nodes[None, :, :]) / box.alpha).reshape(-1, box.d)
    layers = []
    for axis in range(box.d):
        values = np.asarray(profile(points, axis), dtype=float).reshape(cells.shape[0], -1)
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise DomainError(
                f"Profile must be finite and positive; got min {float(np.min(values))} on axis {axis}",
                hint="Profiles enter as conductances and must stay in (0, ∞) on G.",
            )
        layers.append((values @ weights).reshape(box.halo_shape))
    return ConductanceField(box=box, weights=np.stack(layers), source="profile")


def tail_functional(
    a_t: Union[RescaledField, FieldEvaluator],
    G: Optional[Sequence[Tuple[float, float]]] = None,
    eta: float = 1.0,
) -> float:
    """Σ_e ∫_G a_t(y, e)^{−η} dy.

    For a RescaledField the integral is the exact sum over cells of
    |cell ∩ G|·(β a)^{−η}; any other evaluator is integrated by composite
    Gauss-Legendre quadrature over G.

    Raises:
        DomainError: If eta is not positive or G is missing for a generic evaluator.
    """
    if eta <= 0:
        raise DomainError(f"eta must be positive, got {eta}")
    if isinstance(a_t, RescaledField):
        box = a_t.box
        overlap = cell_overlaps(box)
        total = 0.0
        for axis in range(box.d):
            values = (a_t.beta * a_t.field.weights[axis].ravel()) ** (-eta)
            total += float(np.sum(overlap * values))
        return total

    if G is None:
        raise DomainError("G is required to integrate a generic field evaluator")
    lower = [iv[0] for iv in G]
    upper = [iv[1] for iv in G]
    panels = max(8, 256 // 4 ** (len(G) - 1))
    total = 0.0
    for axis in range(len(G)):
        total += box_integral(
            lambda y, i=axis: np.asarray(a_t(y, i), dtype=float) ** (-eta),
            lower,
            upper,
            panels=panels,
        )
    return total
