"""Finite lattice geometry: boxes alpha*G ∩ Z^d, neighbours and embedding.

A box is always a rectangular block of integer sites, so sites are stored as
an index grid (lower corner plus shape) in C order. Vectors on the box are
flat arrays aligned with ``LatticeBox.sites``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from rwrc_lab.exceptions import DegenerateBoxError, DomainError, SiteNotInBoxError

Site = Tuple[int, ...]


class BoxSpec(BaseModel):
    """Serializable box description ``{"d": int, "alpha": float, "G": [[lo, hi], ...]}``."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    d: int = Field(..., ge=1, le=6, description="Lattice dimension")
    alpha: float = Field(..., gt=0, description="Spatial scale")
    G: List[Tuple[float, float]] = Field(
        ..., description="Open interval (lo, hi) per axis of the domain G"
    )

    @model_validator(mode="after")
    def validate_domain(self) -> "BoxSpec":
        """G must have one non-empty interval per axis."""
        if len(self.G) != self.d:
            raise ValueError(f"G has {len(self.G)} intervals but d={self.d}")
        for axis, (lo, hi) in enumerate(self.G):
            if not lo < hi:
                raise ValueError(f"G interval on axis {axis} is empty: ({lo}, {hi})")
        return self


class Neighbor(NamedTuple):
    """One of the 2d nearest neighbours of a site."""

    axis: int
    sign: int
    site: Site
    in_box: bool

    @property
    def direction(self) -> Site:
        """The unit vector ``±e_axis`` as an integer tuple."""
        vec = [0] * len(self.site)
        vec[self.axis] = self.sign
        return tuple(vec)


def _axis_range(lo: float, hi: float, alpha: float) -> Tuple[int, int]:
    """Integers k with lo < k/alpha < hi, as an inclusive (first, last) pair."""
    candidates = range(math.floor(alpha * lo), math.ceil(alpha * hi) + 1)
    inside = [k for k in candidates if lo < k / alpha < hi]
    if not inside:
        return 0, -1
    return inside[0], inside[-1]


@dataclass(frozen=True)
class LatticeBox:
    """The discrete region alpha*G ∩ Z^d.

    Attributes:
        d: Dimension.
        alpha: Spatial scale.
        G: Open interval per axis.
        lower: Smallest site coordinate per axis.
        shape: Number of sites per axis.
    """

    d: int
    alpha: float
    G: Tuple[Tuple[float, float], ...]
    lower: Site
    shape: Site

    @property
    def size(self) -> int:
        """Number of sites |B|."""
        return int(np.prod(self.shape))

    @property
    def upper(self) -> Site:
        """Largest site coordinate per axis."""
        return tuple(lo + n - 1 for lo, n in zip(self.lower, self.shape))

    @cached_property
    def sites(self) -> NDArray[np.int64]:
        """All sites as an ``(|B|, d)`` integer array in C order."""
        axes = [np.arange(lo, lo + n, dtype=np.int64) for lo, n in zip(self.lower, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @property
    def halo_lower(self) -> Site:
        """Lower corner of the cell grid covering G (one layer below the box)."""
        return tuple(lo - 1 for lo in self.lower)

    @property
    def halo_shape(self) -> Site:
        """Shape of the cell grid covering G."""
        return tuple(n + 1 for n in self.shape)

    @cached_property
    def halo_cells(self) -> NDArray[np.int64]:
        """Corners of the cells ``z + [0,1)^d`` that cover ``alpha*G``, C order."""
        axes = [
            np.arange(lo, lo + n, dtype=np.int64)
            for lo, n in zip(self.halo_lower, self.halo_shape)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def spec(self) -> BoxSpec:
        """JSON-serializable description of this box."""
        return BoxSpec(d=self.d, alpha=self.alpha, G=[tuple(iv) for iv in self.G])

    def contains(self, z: Sequence[int]) -> bool:
        """True iff ``z`` is a site of the box."""
        z = tuple(int(c) for c in z)
        if len(z) != self.d:
            return False
        return all(lo <= c < lo + n for c, lo, n in zip(z, self.lower, self.shape))

    def index(self, z: Sequence[int]) -> int:
        """Dense index of site ``z``.

        Raises:
            SiteNotInBoxError: If ``z`` is not a site of the box.
        """
        if not self.contains(z):
            raise SiteNotInBoxError(z)
        offset = tuple(int(c) - lo for c, lo in zip(z, self.lower))
        return int(np.ravel_multi_index(offset, self.shape))

    def site(self, index: int) -> Site:
        """Site with the given dense index."""
        offset = np.unravel_index(int(index), self.shape)
        return tuple(int(o) + lo for o, lo in zip(offset, self.lower))

    def to_grid(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        """Reshape a flat site vector to the box grid."""
        return np.asarray(values, dtype=float).reshape(self.shape)

    def origin_site(self) -> Site:
        """The site closest to the origin (ties broken toward the smallest index)."""
        norms = np.sum(self.sites.astype(float) ** 2, axis=1)
        return self.site(int(np.argmin(norms)))


def build_box(d: int, alpha: float, G: Sequence[Sequence[float]]) -> LatticeBox:
    """Build the box alpha*G ∩ Z^d.

    Membership is the strict inequality lo < z_i/alpha < hi on every axis.

    Args:
        d: Dimension (≥ 1).
        alpha: Spatial scale (> 0).
        G: One open interval ``(lo, hi)`` per axis.

    Returns:
        The lattice box.

    Raises:
        DomainError: If the inputs are malformed.
        DegenerateBoxError: If no lattice point lies in alpha*G.
    """
    try:
        spec = BoxSpec(d=d, alpha=alpha, G=[tuple(iv) for iv in G])
    except ValueError as e:
        raise DomainError(f"Invalid box specification: {e}") from e

    lower: List[int] = []
    shape: List[int] = []
    for lo, hi in spec.G:
        first, last = _axis_range(lo, hi, spec.alpha)
        if last < first:
            raise DegenerateBoxError(
                f"Degenerate box: no lattice point in ({lo * spec.alpha:g}, {hi * spec.alpha:g})"
            )
        lower.append(first)
        shape.append(last - first + 1)

    return LatticeBox(
        d=spec.d,
        alpha=spec.alpha,
        G=tuple((float(lo), float(hi)) for lo, hi in spec.G),
        lower=tuple(lower),
        shape=tuple(shape),
    )


def box_from_spec(spec: BoxSpec) -> LatticeBox:
    """Build a box from its serialized description."""
    return build_box(spec.d, spec.alpha, spec.G)


def unit_cube(d: int, alpha: float) -> LatticeBox:
    """The box alpha*(0,1)^d ∩ Z^d."""
    return build_box(d, alpha, [(0.0, 1.0)] * d)


def centred_cube(d: int, n: int) -> LatticeBox:
    """Q_n = [-n, n]^d ∩ Z^d, represented at alpha = 1."""
    if n < 0:
        raise DomainError(f"Cube radius must be non-negative, got {n}")
    return build_box(d, 1.0, [(-n - 0.5, n + 0.5)] * d)


def neighbors(box: LatticeBox, z: Sequence[int]) -> List[Neighbor]:
    """The 2d nearest neighbours of ``z``, ordered +e_1, -e_1, ..., +e_d, -e_d.

    Raises:
        SiteNotInBoxError: If ``z`` is not a site of the box.
    """
    if not box.contains(z):
        raise SiteNotInBoxError(z)
    site = tuple(int(c) for c in z)
    result: List[Neighbor] = []
    for axis in range(box.d):
        for sign in (1, -1):
            other = list(site)
            other[axis] += sign
            other_site = tuple(other)
            result.append(Neighbor(axis, sign, other_site, box.contains(other_site)))
    return result


def embed(box: LatticeBox, z: Sequence[int]) -> NDArray[np.float64]:
    """Map site ``z`` to the continuum point ``z/alpha``.

    Raises:
        SiteNotInBoxError: If ``z`` is not a site of the box.
    """
    if not box.contains(z):
        raise SiteNotInBoxError(z)
    return np.asarray(z, dtype=float) / box.alpha


def cell_of(box: LatticeBox, y: Sequence[float]) -> Site:
    """The lattice cell ⌊alpha*y⌋ containing the continuum point ``y``."""
    return tuple(int(c) for c in floor_scaled(np.asarray(y, dtype=float), box.alpha))


def floor_scaled(y: NDArray[np.float64], alpha: float) -> NDArray[np.int64]:
    """⌊alpha*y⌋ with lattice points snapped, so ``floor_scaled(z/alpha) == z``."""
    x = alpha * np.asarray(y, dtype=float)
    nearest = np.rint(x)
    snap = np.abs(x - nearest) <= 1e-9 * np.maximum(1.0, np.abs(x))
    return np.floor(np.where(snap, nearest, x)).astype(np.int64)
