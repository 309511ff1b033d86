"""Trajectory and local-time records of the random walk."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.lattice import LatticeBox, Site, floor_scaled


@dataclass(frozen=True)
class TrajectorySample:
    """One path of the walk up to the horizon or the exit.

    Attributes:
        start: Starting site.
        jump_times: Strictly increasing jump times.
        sites: Destination site of every jump, shape ``(jumps, d)``.
        horizon: Time horizon t.
        exited: Whether the walk jumped out of the box.
        exit_time: Time of the exit jump, if any.
        rejected: Jumps out of the box that were suppressed (``stop_on_exit=False``).
    """

    start: Site
    jump_times: NDArray[np.float64]
    sites: NDArray[np.int64]
    horizon: float
    exited: bool = False
    exit_time: Optional[float] = None
    rejected: int = 0

    @property
    def jumps(self) -> int:
        return int(self.jump_times.size)

    def position(self, time: float) -> Site:
        """Site occupied at ``time`` (the last site before the exit)."""
        k = int(np.searchsorted(self.jump_times, time, side="right"))
        if k == 0:
            return self.start
        return tuple(int(c) for c in self.sites[k - 1])


@dataclass(frozen=True)
class LocalTimeRecord:
    """Occupation times ℓ_t(z) = ∫_0^t 1{X_s = z} ds of every box site.

    Attributes:
        box: The lattice box.
        local_times: Flat array aligned with ``box.sites``.
        horizon: Time horizon t.
        exit_time: Exit time, or None if the walk stayed in the box.
    """

    box: LatticeBox
    local_times: NDArray[np.float64]
    horizon: float
    exit_time: Optional[float] = None

    @property
    def total(self) -> float:
        return float(self.local_times.sum())

    @property
    def elapsed(self) -> float:
        """min(t, exit time)."""
        return self.horizon if self.exit_time is None else min(self.horizon, self.exit_time)

    def support(self) -> NDArray[np.int64]:
        """Sites with positive local time."""
        return self.box.sites[self.local_times > 0]


@dataclass(frozen=True)
class LocalTimeProfile:
    """The step function L_t(x) = (α^d / t) ℓ_t(⌊αx⌋) on G."""

    box: LatticeBox
    values: NDArray[np.float64]
    _grid: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_grid", self.box.to_grid(self.values))

    def __call__(self, y: Union[Sequence[float], NDArray[np.float64]]) -> NDArray[np.float64]:
        """Evaluate at one point ``(d,)`` or many points ``(m, d)``; zero off the box cells."""
        pts = np.asarray(y, dtype=float)
        single = pts.ndim == 1
        cells = np.atleast_2d(floor_scaled(np.atleast_2d(pts), self.box.alpha))
        offset = cells - np.asarray(self.box.lower)
        inside = np.all((offset >= 0) & (offset < np.asarray(self.box.shape)), axis=1)
        out = np.zeros(cells.shape[0])
        if np.any(inside):
            out[inside] = self._grid[tuple(offset[inside].T)]
        return out[0] if single else out

    def integral(self) -> float:
        """∫ L_t as the exact cell sum α^{−d} Σ_z L_t(z/α)."""
        return float(self.values.sum() / self.box.alpha**self.box.d)
