"""Discrete Sobolev inequality and cutoff approximation of χ^d(Z^d)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.exceptions import DomainError
from rwrc_lab.varprob.energy import edge_differences, p_energy

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class SobolevCheck:
    lhs: float
    rhs: float
    holds: bool


def discrete_sobolev_check(g: FloatArray) -> SobolevCheck:
    """Σ_z g^{d/(d−1)} ≤ (Σ_{z,e} |g(z+e) − g(z)|)^{d/(d−1)} for g ≥ 0 on Z^d.

    ``g`` is a d-dimensional array holding the values on a window of Z^d;
    g vanishes outside the window.

    Raises:
        DomainError: If d < 2 or g has negative entries.
    """
    values = np.asarray(g, dtype=float)
    d = values.ndim
    if d < 2:
        raise DomainError(f"the discrete Sobolev inequality needs d >= 2, got {d}")
    if np.any(values < 0):
        raise DomainError("g must be non-negative")
    q = d / (d - 1.0)
    lhs = float(np.sum(values**q))
    variation = float(sum(np.sum(np.abs(diff)) for diff in edge_differences(values)))
    rhs = variation**q
    return SobolevCheck(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1.0 + 1e-12))


def cutoff(x: FloatArray) -> FloatArray:
    """ξ(x) = 1 on |x| ≤ 1, 2 − |x| on 1 < |x| < 2, 0 beyond (Euclidean norm)."""
    r = np.linalg.norm(np.atleast_2d(x), axis=1)
    return np.clip(2.0 - r, 0.0, 1.0)


@dataclass(frozen=True)
class CutoffRow:
    n: int
    renormalisation: float
    energy: float


@dataclass(frozen=True)
class CutoffTable:
    """Energies of g_n = g·ξ(·/n)/‖g·ξ(·/n)‖ against the energy of g itself."""

    rows: List[CutoffRow]
    reference: float


def cutoff_convergence(
    g: FloatArray,
    n_grid: Sequence[int],
    p: float,
    origin: Optional[Tuple[int, ...]] = None,
) -> CutoffTable:
    """Cut off a finitely supported g at radius n and report the p-energies.

    Args:
        g: d-dimensional array, zero outside the window.
        n_grid: Cutoff radii.
        p: Energy exponent.
        origin: Array index of the lattice origin (defaults to the centre).

    Raises:
        DomainError: If g vanishes or a radius is not positive.
    """
    values = np.asarray(g, dtype=float)
    norm = float(np.linalg.norm(values))
    if norm == 0:
        raise DomainError("g must not vanish")
    centre = np.asarray(origin if origin is not None else [s // 2 for s in values.shape])
    axes = [np.arange(s) - c for s, c in zip(values.shape, centre)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1).astype(float)

    rows = []
    for n in n_grid:
        if n <= 0:
            raise DomainError(f"cutoff radius must be positive, got {n}")
        cut = values * cutoff(coords / n).reshape(values.shape)
        size = float(np.linalg.norm(cut))
        if size == 0:
            rows.append(CutoffRow(int(n), float("inf"), float("nan")))
            continue
        rows.append(CutoffRow(int(n), 1.0 / size, p_energy(cut / size, p)))
    return CutoffTable(rows=rows, reference=p_energy(values / norm, p))
