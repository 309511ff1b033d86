"""p-energies and the rate functions J^d, J^c and I^c_φ."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.quadrature import Profile, as_profile
from rwrc_lab.varprob.params import RegimeParams

FloatArray = NDArray[np.float64]


def as_grid(g: FloatArray, box: Optional[LatticeBox] = None) -> FloatArray:
    """A site vector (with its box) or an already shaped grid, as a grid array."""
    values = np.asarray(g, dtype=float)
    if box is None:
        return values
    if values.size != box.size:
        raise DomainError(f"g has {values.size} entries, box has {box.size} sites")
    return values.reshape(box.shape)


def edge_differences(grid: FloatArray) -> List[FloatArray]:
    """g(z+e_i) − g(z) for every edge touching the grid, with g ≡ 0 outside."""
    padded = np.pad(grid, 1)
    diffs = []
    for axis in range(grid.ndim):
        keep = [slice(1, -1)] * grid.ndim
        keep[axis] = slice(None)
        diffs.append(np.diff(padded[tuple(keep)], axis=axis))
    return diffs


def p_energy(g: FloatArray, p: float, box: Optional[LatticeBox] = None) -> float:
    """Σ_e Σ_z |g(z+e) − g(z)|^p with g ≡ 0 outside the box.

    Raises:
        DomainError: If p is not positive.
    """
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    return float(sum(np.sum(np.abs(diff) ** p) for diff in edge_differences(as_grid(g, box))))


def rate_J_d(g: FloatArray, params: RegimeParams, box: Optional[LatticeBox] = None) -> float:
    """J^d(g) = K_{η,D}·Σ_e Σ_z |g(z+e) − g(z)|^p."""
    return params.K * p_energy(g, params.p, box)


@dataclass(frozen=True)
class GridFunction:
    """Values of a function on the interior nodes of a uniform grid over G.

    Node ``k`` sits at ``lower + (k + 1)·h``; the function vanishes on the
    boundary nodes, so forward differences use the zero extension.
    """

    values: FloatArray
    h: float
    lower: Tuple[float, ...]

    @classmethod
    def from_callable(
        cls,
        f: Callable[[FloatArray], FloatArray],
        G: Sequence[Tuple[float, float]],
        h: float,
    ) -> "GridFunction":
        """Sample ``f`` (vectorised over ``(m, d)`` points) on the interior nodes of G."""
        if h <= 0:
            raise DomainError(f"h must be positive, got {h}")
        counts = [int(round((hi - lo) / h)) - 1 for lo, hi in G]
        if min(counts) < 1:
            raise DomainError(f"grid spacing {h} leaves no interior node in G={list(G)}")
        axes = [lo + h * np.arange(1, n + 1) for (lo, _), n in zip(G, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        values = np.asarray(f(points), dtype=float).reshape(counts)
        return cls(values=values, h=float(h), lower=tuple(float(lo) for lo, _ in G))

    @property
    def d(self) -> int:
        return self.values.ndim

    def gradients(self) -> List[FloatArray]:
        """Forward-difference partial derivatives, one array per axis."""
        return [diff / self.h for diff in edge_differences(self.values)]

    def midpoints(self, axis: int) -> FloatArray:
        """Points where the ``axis`` forward difference is attributed, ``(m, d)``."""
        shape = list(self.values.shape)
        axes = []
        for i, (lo, n) in enumerate(zip(self.lower, shape)):
            if i == axis:
                axes.append(lo + self.h * (np.arange(n + 1) + 0.5))
            else:
                axes.append(lo + self.h * np.arange(1, n + 1))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def l2_norm(self) -> float:
        """Riemann-sum L² norm."""
        return float(np.sqrt(np.sum(self.values**2) * self.h**self.d))


def rate_J_c(f: GridFunction, params: RegimeParams) -> float:
    """J^c(f) = K_{η,D}·Σ_i Σ_cells h^d |∂_i f|^p."""
    cell = f.h**f.d
    return params.K * float(sum(np.sum(np.abs(grad) ** params.p) for grad in f.gradients()) * cell)


def rate_I_c_phi(f: GridFunction, phi: Union[float, Profile]) -> float:
    """I^c_φ(f) = Σ_i Σ_cells h^d φ(y, e_i)(∂_i f)², φ taken at the difference midpoints."""
    profile = as_profile(phi)
    cell = f.h**f.d
    total = 0.0
    for axis, grad in enumerate(f.gradients()):
        weights = np.asarray(profile(f.midpoints(axis), axis), dtype=float).reshape(grad.shape)
        total += float(np.sum(weights * grad**2))
    return total * cell
