"""Dirichlet operators −scale·Δ^a + V on a lattice box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox

FloatArray = NDArray[np.float64]
PotentialInput = Union[None, float, FloatArray]


@dataclass(frozen=True)
class DirichletOperator:
    """Symmetric operator h(g)(z) = s·Σ_e a(z→z+e)(g(z) − g(z+e)) + V(z)g(z), g ≡ 0 off B.

    Attributes:
        box: Lattice box.
        matrix: CSR matrix of the full operator.
        laplace_scale: Factor s multiplying the Laplacian part.
        potential: Per-site potential vector.
    """

    box: LatticeBox
    matrix: sp.csr_matrix
    laplace_scale: float
    potential: FloatArray

    @property
    def size(self) -> int:
        return self.box.size

    def __call__(self, g: FloatArray) -> FloatArray:
        """Apply the operator to a site vector."""
        return np.asarray(self.matrix @ np.asarray(g, dtype=float))

    def as_linear_operator(self, shift: float = 0.0) -> LinearOperator:
        """Matrix-free view of ``h − shift·I``."""
        n = self.size
        return LinearOperator(
            (n, n),
            matvec=lambda x: self.matrix @ x - shift * x,
            dtype=float,
        )

    def dense(self) -> FloatArray:
        """Dense matrix (small boxes only)."""
        return np.asarray(self.matrix.toarray())

    def diagonal(self) -> FloatArray:
        return np.asarray(self.matrix.diagonal())

    def quadratic_form(self, g: FloatArray) -> float:
        """⟨h(g), g⟩."""
        g = np.asarray(g, dtype=float)
        return float(g @ self(g))

    def norm_bound(self) -> float:
        """Row-sum bound on the operator norm."""
        return float(abs(self.matrix).sum(axis=1).max())


def _potential_vector(box: LatticeBox, V: PotentialInput) -> FloatArray:
    if V is None:
        return np.zeros(box.size)
    values = np.asarray(V, dtype=float)
    if values.ndim == 0:
        values = np.full(box.size, float(values))
    values = values.ravel()
    if values.size != box.size:
        raise DomainError(f"Potential has {values.size} entries, box has {box.size} sites")
    if not np.all(np.isfinite(values)):
        raise DomainError("Potential must be finite")
    return values


def interior_edges(box: LatticeBox) -> List[Tuple[NDArray[np.int64], NDArray[np.int64], Tuple[slice, ...]]]:
    """Per axis: (source index, target index, halo slice) of edges with both ends in the box.

    The halo slice selects the weights of those edges from ``field.weights[axis]``.
    """
    idx = np.arange(box.size).reshape(box.shape)
    edges = []
    for axis in range(box.d):
        lo = [slice(None)] * box.d
        hi = [slice(None)] * box.d
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        halo = [slice(1, None)] * box.d
        halo[axis] = slice(1, -1)
        edges.append((idx[tuple(lo)].ravel(), idx[tuple(hi)].ravel(), tuple(halo)))
    return edges


def assemble(
    field: ConductanceField,
    box: Optional[LatticeBox] = None,
    V: PotentialInput = None,
    laplace_scale: float = 1.0,
) -> DirichletOperator:
    """Assemble −laplace_scale·Δ^a + V with zero boundary condition.

    Edges leaving the box contribute killing terms a(z→outside)·g(z) on the diagonal.

    Args:
        field: Conductance field.
        box: Box (defaults to the field's box; must match it).
        V: Potential per site, a constant, or None for zero.
        laplace_scale: Factor multiplying the Laplacian part (e.g. α²).

    Returns:
        The assembled operator.

    Raises:
        DomainError: If the scale is not positive, V is malformed or boxes differ.
    """
    box = box or field.box
    if box != field.box:
        raise DomainError("field and operator box differ")
    if laplace_scale <= 0:
        raise DomainError(f"laplace_scale must be positive, got {laplace_scale}")
    potential = _potential_vector(box, V)

    n = box.size
    diag = laplace_scale * field.holding_rates() + potential
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [diag]
    for axis, (src, dst, halo) in enumerate(interior_edges(box)):
        w = -laplace_scale * field.weights[axis][halo].ravel()
        rows += [src, dst]
        cols += [dst, src]
        vals += [w, w]
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return DirichletOperator(box=box, matrix=matrix, laplace_scale=float(laplace_scale), potential=potential)


def dense_batch(box: LatticeBox, weights: FloatArray) -> FloatArray:
    """Dense operators −Δ^a for a batch of weight arrays ``(m, d, *halo_shape)``."""
    m = weights.shape[0]
    n = box.size
    out = np.zeros((m, n, n))
    diag = np.zeros((m, *box.shape))
    for axis in range(box.d):
        fwd = [slice(None), axis] + [slice(1, None)] * box.d
        bwd = [slice(None), axis] + [slice(1, None)] * box.d
        bwd[2 + axis] = slice(0, -1)
        diag += weights[tuple(fwd)] + weights[tuple(bwd)]
    sites = np.arange(n)
    out[:, sites, sites] = diag.reshape(m, n)
    for axis, (src, dst, halo) in enumerate(interior_edges(box)):
        w = weights[(slice(None), axis, *halo)].reshape(m, -1)
        out[:, src, dst] = -w
        out[:, dst, src] = -w
    return out


def dirichlet_form(field: ConductanceField, box: Optional[LatticeBox], g: FloatArray) -> float:
    """Σ_e Σ_z a(z,e)(g(z+e) − g(z))² with g ≡ 0 outside the box.

    Raises:
        DomainError: If g does not match the box.
    """
    box = box or field.box
    if box != field.box:
        raise DomainError("field and box differ")
    values = np.asarray(g, dtype=float).ravel()
    if values.size != box.size:
        raise DomainError(f"g has {values.size} entries, box has {box.size} sites")
    padded = np.pad(box.to_grid(values), 1)
    total = 0.0
    for axis in range(box.d):
        diff = np.diff(padded, axis=axis)
        # diff slot k along axis pairs halo cells k and k+1 → edge stored at halo k
        keep = [slice(0, -1)] * box.d
        keep[axis] = slice(None)
        total += float(np.sum(field.weights[axis] * diff[tuple(keep)] ** 2))
    return total
