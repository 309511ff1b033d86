"""Continuous-time simulation of the random walk among conductances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog
from numpy.typing import NDArray

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.exceptions import DomainError, SiteNotInBoxError
from rwrc_lab.utils.streams import stream
from rwrc_lab.walker.models import LocalTimeProfile, LocalTimeRecord, TrajectorySample

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

WALK_STREAM = 5


@dataclass(frozen=True)
class JumpTable:
    """Per-site jump rates and targets in the order +e_1, −e_1, ..., +e_d, −e_d.

    Attributes:
        rates: ``(|B|, 2d)`` conductances of the incident edges.
        targets: ``(|B|, 2d)`` dense index of each neighbour, −1 outside the box.
        cumulative: Row-wise cumulative sums of ``rates``.
        holding: π_z, the total rate of every site.
    """

    rates: FloatArray
    targets: NDArray[np.int64]
    cumulative: FloatArray
    holding: FloatArray


def jump_table(field: ConductanceField) -> JumpTable:
    """Build the jump table of a field; cached on the field."""
    cached = field._cache.get("jump_table")
    if cached is not None:
        return cached  # type: ignore[no-any-return]
    box = field.box
    idx = np.arange(box.size).reshape(box.shape)
    rates = []
    targets = []
    for axis in range(box.d):
        for sign in (1, -1):
            rates.append((field.forward(axis) if sign > 0 else field.backward(axis)).ravel())
            shifted = np.full(box.shape, -1, dtype=np.int64)
            src = [slice(None)] * box.d
            dst = [slice(None)] * box.d
            if sign > 0:
                src[axis], dst[axis] = slice(1, None), slice(0, -1)
            else:
                src[axis], dst[axis] = slice(0, -1), slice(1, None)
            shifted[tuple(dst)] = idx[tuple(src)]
            targets.append(shifted.ravel())
    rate_arr = np.stack(rates, axis=1)
    cumulative = np.cumsum(rate_arr, axis=1)
    table = JumpTable(
        rates=rate_arr,
        targets=np.stack(targets, axis=1),
        cumulative=cumulative,
        holding=cumulative[:, -1].copy(),
    )
    field._cache["jump_table"] = table
    return table


def start_index(field: ConductanceField, start: Optional[Sequence[int]]) -> int:
    """Dense index of the start site (default: the site nearest the origin)."""
    box = field.box
    site = box.origin_site() if start is None else tuple(int(c) for c in start)
    if not box.contains(site):
        raise SiteNotInBoxError(site)
    return box.index(site)


def simulate(
    field: ConductanceField,
    start: Optional[Sequence[int]],
    horizon: float,
    stop_on_exit: bool = True,
    seed: int = 0,
    replica: int = 0,
) -> Tuple[TrajectorySample, LocalTimeRecord]:
    """Simulate one path with exact exponential holding times.

    At site y the walk waits Exp(π_y), π_y summing all 2d incident
    conductances (edges leaving the box included), then moves along an edge
    with probability a/π_y. A move out of the box kills the walk when
    ``stop_on_exit``; otherwise the move is rejected and counted.

    Args:
        field: Conductance field.
        start: Start site (defaults to the site nearest the origin).
        horizon: Time horizon t > 0.
        stop_on_exit: Kill at exit (True) or reject outward jumps (False).
        seed: Seed.
        replica: Replica index; each replica has its own stream.

    Raises:
        SiteNotInBoxError: If start is not a site of the box.
        DomainError: If horizon is not positive.
    """
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    box = field.box
    table = jump_table(field)
    current = start_index(field, start)
    rng = stream(seed, WALK_STREAM, replica)

    local = np.zeros(box.size)
    times = []
    visited = []
    clock = 0.0
    exit_time = None
    rejected = 0
    while True:
        hold = rng.exponential(1.0 / table.holding[current])
        if clock + hold >= horizon:
            local[current] += horizon - clock
            break
        local[current] += hold
        clock += hold
        u = rng.random() * table.holding[current]
        k = min(int(np.searchsorted(table.cumulative[current], u, side="right")), 2 * box.d - 1)
        target = int(table.targets[current, k])
        if target < 0:
            if stop_on_exit:
                exit_time = clock
                break
            rejected += 1
            continue
        times.append(clock)
        visited.append(target)
        current = target

    sites = box.sites[np.asarray(visited, dtype=np.int64)] if visited else np.zeros((0, box.d), dtype=np.int64)
    trajectory = TrajectorySample(
        start=box.site(start_index(field, start)),
        jump_times=np.asarray(times, dtype=float),
        sites=sites,
        horizon=float(horizon),
        exited=exit_time is not None,
        exit_time=exit_time,
        rejected=rejected,
    )
    record = LocalTimeRecord(box=box, local_times=local, horizon=float(horizon), exit_time=exit_time)
    return trajectory, record


def rescale_local_times(rec: LocalTimeRecord) -> LocalTimeProfile:
    """L_t = (α^d / t) ℓ_t(⌊α·⌋) as a step function on G."""
    box = rec.box
    return LocalTimeProfile(box=box, values=rec.local_times * box.alpha**box.d / rec.horizon)


def batch_walks(
    field: ConductanceField,
    start: Optional[Sequence[int]],
    horizon: float,
    n_walks: int,
    rng: np.random.Generator,
    potential: Optional[FloatArray] = None,
) -> Tuple[NDArray[np.bool_], FloatArray]:
    """Run ``n_walks`` killed walks side by side.

    Returns:
        Survival flags and, when a per-site ``potential`` is given, the
        accumulated integrals ∫_0^t potential(X_s) ds (zeros otherwise).
    """
    if n_walks < 1:
        raise DomainError(f"n_walks must be at least 1, got {n_walks}")
    table = jump_table(field)
    current = np.full(n_walks, start_index(field, start), dtype=np.int64)
    clock = np.zeros(n_walks)
    integral = np.zeros(n_walks)
    alive = np.ones(n_walks, dtype=bool)
    active = np.arange(n_walks)
    if horizon <= 0:
        return alive, integral

    while active.size:
        sites = current[active]
        hold = rng.exponential(1.0 / table.holding[sites])
        done = clock[active] + hold >= horizon
        step = np.where(done, horizon - clock[active], hold)
        if potential is not None:
            integral[active] += potential[sites] * step
        clock[active] += step

        moving = active[~done]
        if moving.size == 0:
            break
        from_sites = current[moving]
        u = rng.random(moving.size) * table.holding[from_sites]
        k = (table.cumulative[from_sites] <= u[:, None]).sum(axis=1)
        k = np.minimum(k, table.targets.shape[1] - 1)
        target = table.targets[from_sites, k]
        left = target < 0
        alive[moving[left]] = False
        current[moving[~left]] = target[~left]
        active = moving[~left]
    return alive, integral


def batch_nonexit(
    field: ConductanceField,
    start: Optional[Sequence[int]],
    horizon: float,
    n_walks: int,
    rng: np.random.Generator,
) -> int:
    """Number of ``n_walks`` independent walks that stay in the box up to ``horizon``."""
    alive, _ = batch_walks(field, start, horizon, n_walks, rng)
    return int(alive.sum())
