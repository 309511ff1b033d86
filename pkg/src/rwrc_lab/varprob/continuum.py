"""Continuum limit χ^c(G) from rescaled discrete problems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import structlog

from rwrc_lab.lattice import build_box
from rwrc_lab.varprob.params import RegimeParams
from rwrc_lab.varprob.solver import ChiConfig, solve_chi_d
from rwrc_lab.varprob.witnesses import WitnessCurve, witness_curve

log = structlog.get_logger()


@dataclass(frozen=True)
class ContinuumLevel:
    """One refinement level: s(α) = α^{κ} χ^d(αG ∩ Z^d)."""

    alpha: float
    sites: int
    chi_d: float
    scaled: float
    converged: bool


@dataclass(frozen=True)
class ContinuumResult:
    """Per-level table, extrapolated limit and regime diagnostics.

    Attributes:
        levels: Refinement table in the given order.
        exponent: κ = (2η − d)/(η + 1), or 2 when p is forced to 2.
        extrapolated: Aitken extrapolation of the last three levels (last value otherwise).
        trend: "decreasing", "increasing" or "mixed" along the levels.
        relative_change: |s_last − s_prev| / |s_last| over the last two levels.
        zero_infimum: True when η ≤ d/2, where χ^c(G) = 0.
        witness: Energy decay of the witness family in the zero-infimum regime.
    """

    levels: List[ContinuumLevel]
    exponent: float
    p: float
    extrapolated: Optional[float]
    trend: str
    relative_change: Optional[float]
    zero_infimum: bool = False
    witness: Optional[WitnessCurve] = field(default=None, repr=False)


def aitken(values: Sequence[float]) -> float:
    """Aitken Δ² extrapolation of the last three values (last value if degenerate)."""
    if len(values) < 3:
        return float(values[-1])
    s1, s2, s3 = values[-3:]
    denom = (s3 - s2) - (s2 - s1)
    if denom == 0 or (s3 - s2) * (s2 - s1) <= 0:
        return float(s3)
    return float(s3 - (s3 - s2) ** 2 / denom)


def _trend(values: Sequence[float]) -> str:
    steps = [b - a for a, b in zip(values, values[1:])]
    if steps and all(s < 0 for s in steps):
        return "decreasing"
    if steps and all(s > 0 for s in steps):
        return "increasing"
    return "mixed"


def solve_chi_c(
    G: Sequence[Tuple[float, float]],
    params: RegimeParams,
    levels: Sequence[float],
    config: Optional[ChiConfig] = None,
    force_p: Optional[float] = None,
    witness_grid: Optional[Sequence[float]] = None,
) -> ContinuumResult:
    """Approximate χ^c(G) by s(α) = α^{(2η−d)/(η+1)} χ^d(αG ∩ Z^d) on growing α.

    ``force_p=2`` runs the Dirichlet-eigenvalue analogue, for which the scale
    factor is α². When η ≤ d/2 the infimum is zero; the result is marked and
    carries the witness decay curve next to whatever levels were requested.
    """
    d = len(G)
    p = params.p if force_p is None else float(force_p)
    if force_p is not None and force_p == 2.0:
        exponent = 2.0
    else:
        exponent = (2.0 * params.eta - d) / (params.eta + 1.0)
    zero_infimum = force_p is None and params.eta <= d / 2.0

    table: List[ContinuumLevel] = []
    for alpha in levels:
        box = build_box(d, float(alpha), G)
        result = solve_chi_d(box, p, config)
        table.append(
            ContinuumLevel(
                alpha=float(alpha),
                sites=box.size,
                chi_d=result.value,
                scaled=float(alpha) ** exponent * result.value,
                converged=result.converged,
            )
        )
        log.info("chi_c_level_done", alpha=alpha, sites=box.size, scaled=table[-1].scaled)

    scaled = [level.scaled for level in table]
    relative = None
    if len(scaled) >= 2 and scaled[-1] != 0:
        relative = abs(scaled[-1] - scaled[-2]) / abs(scaled[-1])

    witness = None
    if zero_infimum:
        grid = witness_grid or ([16.0, 64.0, 256.0] if d == 1 else [0.2, 0.1, 0.05])
        if d > 1 or p < 2.0 / 3.0:
            witness = witness_curve(d, p, grid)
        log.info("chi_c_zero_infimum", d=d, eta=params.eta)

    return ContinuumResult(
        levels=table,
        exponent=exponent,
        p=p,
        extrapolated=None if zero_infimum or not scaled else aitken(scaled),
        trend=_trend(scaled),
        relative_change=relative,
        zero_infimum=zero_infimum,
        witness=witness,
    )
