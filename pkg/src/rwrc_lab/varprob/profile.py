"""Optimal conductance profile for a given continuum function."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.exceptions import DomainError
from rwrc_lab.varprob.energy import GridFunction
from rwrc_lab.varprob.params import RegimeParams

FloatArray = NDArray[np.float64]


def profile_from_gradient(gradient: FloatArray, params: RegimeParams, cap: float) -> FloatArray:
    """M^{−1} ∨ (Dη)^{1/(η+1)} |∂f|^{−2/(η+1)} ∧ M, the minimiser of r(∂f)² + D r^{−η}."""
    if cap < 1:
        raise DomainError(f"cap must be at least 1, got {cap}")
    size = np.abs(np.asarray(gradient, dtype=float))
    eta = params.eta
    with np.errstate(divide="ignore"):
        raw = (params.D * eta) ** (1.0 / (eta + 1.0)) * size ** (-2.0 / (eta + 1.0))
    return np.clip(raw, 1.0 / cap, cap)


def pointwise_cost(phi: FloatArray, gradient: FloatArray, params: RegimeParams) -> FloatArray:
    """φ(∂f)² + Dφ^{−η}."""
    return phi * np.asarray(gradient, dtype=float) ** 2 + params.D * phi ** (-params.eta)


@dataclass(frozen=True)
class OptimalProfile:
    """Capped optimal profile on the forward-difference cells of a grid function.

    Attributes:
        function: The grid function f.
        values: φ per axis, aligned with ``function.gradients()``.
        capped: Per-axis masks of cells where the cap is active.
        residual: max over uncapped cells of |φ(∂f)² + Dφ^{−η} − K|∂f|^p|.
        cap: The cap M.
    """

    function: GridFunction
    values: List[FloatArray]
    capped: List[NDArray[np.bool_]]
    residual: float
    cap: float

    def __call__(self, y: FloatArray, axis: int) -> FloatArray:
        """Piecewise-constant evaluation φ(y, e_axis) (cap value off the grid)."""
        pts = np.atleast_2d(np.asarray(y, dtype=float))
        f = self.function
        offset = pts - np.asarray(f.lower)
        index = np.floor(offset / f.h).astype(np.int64) - 1
        index[:, axis] = np.floor(offset[:, axis] / f.h).astype(np.int64)
        table = self.values[axis]
        inside = np.all((index >= 0) & (index < np.asarray(table.shape)), axis=1)
        out = np.full(pts.shape[0], self.cap)
        if np.any(inside):
            out[inside] = table[tuple(index[inside].T)]
        return out


def optimal_profile(f: GridFunction, params: RegimeParams, cap: float = 1e6) -> OptimalProfile:
    """φ = (Dη)^{1/(η+1)}|∂_e f|^{−2/(η+1)}, capped to [1/M, M], with the identity residual.

    Where the cap is inactive the pointwise cost φ(∂f)² + Dφ^{−η} equals
    K_{η,D}|∂f|^p, which identifies the rate function J^c.
    """
    values = []
    masks = []
    residual = 0.0
    for grad in f.gradients():
        phi = profile_from_gradient(grad, params, cap)
        capped = (phi <= 1.0 / cap) | (phi >= cap)
        free = ~capped
        if np.any(free):
            gap = pointwise_cost(phi[free], grad[free], params) - params.K * np.abs(grad[free]) ** params.p
            residual = max(residual, float(np.max(np.abs(gap))))
        values.append(phi)
        masks.append(capped)
    return OptimalProfile(function=f, values=values, capped=masks, residual=residual, cap=float(cap))
