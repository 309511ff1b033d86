"""Tensor Gauss-Legendre quadrature on lattice cells and boxes.

Callables follow two conventions throughout the package:

- potentials ``V(y)`` take an ``(m, d)`` array of points and return ``(m,)``;
- profiles ``phi(y, i)`` additionally take the axis index ``i`` of the
  positive unit vector ``e_i``.
"""

from __future__ import annotations

import inspect
import itertools
from functools import lru_cache
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]
Potential = Callable[[FloatArray], FloatArray]
Profile = Callable[[FloatArray, int], FloatArray]

DEFAULT_ORDER = 4


@lru_cache(maxsize=32)
def unit_rule(order: int) -> Tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@lru_cache(maxsize=32)
def cube_rule(d: int, order: int) -> Tuple[FloatArray, FloatArray]:
    """Tensor rule on [0, 1]^d: nodes ``(order**d, d)`` and weights summing to 1."""
    nodes, weights = unit_rule(order)
    pts = np.array(list(itertools.product(nodes, repeat=d)), dtype=float).reshape(-1, d)
    wts = np.array([np.prod(w) for w in itertools.product(weights, repeat=d)], dtype=float)
    return pts, wts


def as_potential(value: Union[float, Potential]) -> Potential:
    """Wrap a constant as a potential callable."""
    if callable(value):
        return value
    constant = float(value)

    def _constant(y: FloatArray) -> FloatArray:
        return np.full(np.asarray(y).shape[0], constant)

    return _constant


def as_profile(value: Union[float, Profile, Potential]) -> Profile:
    """Wrap a constant, or a direction-free callable, as a profile ``phi(y, i)``."""
    if not callable(value):
        constant = float(value)

        def _constant(y: FloatArray, i: int) -> FloatArray:
            return np.full(np.asarray(y).shape[0], constant)

        return _constant

    try:
        n_params = len(inspect.signature(value).parameters)
    except (TypeError, ValueError):
        n_params = 1
    if n_params >= 2:
        return value  # type: ignore[return-value]

    def _isotropic(y: FloatArray, i: int) -> FloatArray:
        return value(y)  # type: ignore[call-arg]

    return _isotropic


def cell_average(
    func: Potential,
    cells: NDArray[np.int64],
    alpha: float,
    order: int = DEFAULT_ORDER,
) -> FloatArray:
    """Average of ``func((z + y) / alpha)`` over ``y`` in the unit cube, per cell ``z``.

    Args:
        func: Vectorised callable on ``(m, d)`` points.
        cells: Integer cell corners ``z`` of shape ``(n, d)``.
        alpha: Spatial scale.
        order: Gauss-Legendre points per axis.

    Returns:
        Array of ``n`` cell averages.
    """
    cells = np.atleast_2d(np.asarray(cells, dtype=float))
    n, d = cells.shape
    nodes, weights = cube_rule(d, order)
    points = (cells[:, None, :] + nodes[None, :, :]) / alpha
    values = np.asarray(func(points.reshape(-1, d)), dtype=float).reshape(n, nodes.shape[0])
    return values @ weights


def box_integral(
    func: Potential,
    lower: Sequence[float],
    upper: Sequence[float],
    panels: int = 64,
    order: int = DEFAULT_ORDER,
) -> float:
    """Composite tensor Gauss-Legendre integral of ``func`` over a box."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    d = lo.size
    width = (hi - lo) / panels
    grid = np.array(list(itertools.product(range(panels), repeat=d)), dtype=float)
    nodes, weights = cube_rule(d, order)
    points = lo + (grid[:, None, :] + nodes[None, :, :]) * width
    values = np.asarray(func(points.reshape(-1, d)), dtype=float).reshape(grid.shape[0], -1)
    return float(np.sum(values @ weights) * np.prod(width))
