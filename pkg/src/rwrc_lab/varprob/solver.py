"""Multi-start minimisation of the p-energy on the unit sphere (χ^d)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from rwrc_lab.conductance.models import constant_field
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.spectrum.eigen import principal_eigen
from rwrc_lab.spectrum.operator import assemble
from rwrc_lab.utils.streams import stream
from rwrc_lab.varprob.energy import edge_differences, p_energy

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

CHI_STREAM = 8
_ARMIJO = 1e-4
_TIE = 1e-10


class ChiConfig(BaseModel):
    """Solver settings for χ^d."""

    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default=4, ge=1, description="Number of starts")
    max_iter: int = Field(default=2000, ge=1, description="Iterations per smoothing level")
    smoothing_levels: int = Field(default=8, ge=1, description="Geometric μ levels")
    tol: float = Field(default=1e-8, gt=0, description="Stationarity tolerance")
    seed: int = Field(default=0, ge=0, description="Seed of the pseudo-random starts")


@dataclass(frozen=True)
class VariationalResult:
    """Certified upper bound on χ^d(B) with its minimiser and diagnostics.

    Attributes:
        value: p-energy of ``minimizer``, recomputed exactly.
        minimizer: ℓ²-normalised vector on the box.
        p: Energy exponent.
        restarts: Number of starts used.
        restart_values: Final exact energy of every start.
        smoothing: Smoothing parameter μ at termination (0 when unsmoothed).
        residual: Norm of the projected gradient at termination.
        converged: Stationarity reached (p > 1) or the last level stalled (p ≤ 1).
        best_restart: Index of the winning start.
    """

    value: float
    minimizer: FloatArray
    p: float
    restarts: int
    restart_values: List[float]
    smoothing: float
    residual: float
    converged: bool
    best_restart: int = 0
    box: Optional[LatticeBox] = field(default=None, repr=False)

    @property
    def spread(self) -> float:
        """max − min of the restart values."""
        return float(max(self.restart_values) - min(self.restart_values))


def _smoothed(grid: FloatArray, p: float, mu: float) -> Tuple[float, FloatArray]:
    """Σ(δ² + μ²)^{p/2} − (μ²)^{p/2} per edge, and its gradient on the grid."""
    energy = 0.0
    grad = np.zeros_like(grid)
    for axis, delta in enumerate(edge_differences(grid)):
        sq = delta**2 + mu * mu
        if mu == 0.0 and p < 2.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                factor = np.where(delta != 0.0, np.abs(delta) ** (p - 2.0), 0.0)
            energy += float(np.sum(np.abs(delta) ** p))
        else:
            factor = sq ** (p / 2.0 - 1.0)
            energy += float(np.sum(sq ** (p / 2.0) - (mu * mu) ** (p / 2.0)))
        psi = p * delta * factor
        grad -= np.diff(psi, axis=axis)
    return energy, grad


def _descend(
    g: FloatArray,
    p: float,
    mu: float,
    max_iter: int,
    tol: float,
    accept_stall: bool = False,
) -> Tuple[FloatArray, float, bool, FloatArray, float]:
    """Riemannian gradient descent with Barzilai-Borwein steps and Armijo backtracking.

    Returns the final iterate, its projected-gradient norm, whether it is
    stationary, and the best exact-energy iterate seen with its energy. A stall
    counts as stationary only when the residual at the stalled iterate is below
    ``tol``, or when ``accept_stall`` is set (p ≤ 1, where no gradient exists).
    """
    energy, grad = _smoothed(g, p, mu)
    best, best_value = g, p_energy(g, p)
    step = 1.0 / max(1.0, float(np.abs(grad).max()))
    prev_g: Optional[FloatArray] = None
    prev_r: Optional[FloatArray] = None
    residual = np.inf
    for _ in range(max_iter):
        r = grad - float(np.sum(grad * g)) * g
        residual = float(np.linalg.norm(r))
        if residual <= tol * max(1.0, energy):
            return g, residual, True, best, best_value
        if prev_g is not None and prev_r is not None:
            s, y = g - prev_g, r - prev_r
            sy = float(np.sum(s * y))
            if sy > 0:
                step = float(np.sum(s * s)) / sy
        while True:
            trial = g - step * r
            trial = trial / np.linalg.norm(trial)
            trial_energy, trial_grad = _smoothed(trial, p, mu)
            if trial_energy <= energy - _ARMIJO * step * residual**2 or step < 1e-16:
                break
            step *= 0.5
        stalled = abs(energy - trial_energy) <= 1e-15 * max(1.0, abs(energy))
        prev_g, prev_r = g, r
        g, energy, grad = trial, trial_energy, trial_grad
        exact = p_energy(g, p)
        if exact < best_value:
            best, best_value = g, exact
        if stalled:
            r = grad - float(np.sum(grad * g)) * g
            residual = float(np.linalg.norm(r))
            converged = accept_stall or residual <= tol * max(1.0, energy)
            return g, residual, converged, best, best_value
    return g, residual, False, best, best_value


def _starts(box: LatticeBox, config: ChiConfig, extra: Sequence[FloatArray]) -> List[FloatArray]:
    n = box.size
    starts = [np.full(n, 1.0 / np.sqrt(n))]
    if config.restarts >= 2 and n > 1:
        starts.append(principal_eigen(assemble(constant_field(box))).eigenvector)
    k = 0
    while len(starts) < config.restarts:
        vec = stream(config.seed, CHI_STREAM, k).standard_normal(n)
        starts.append(vec / np.linalg.norm(vec))
        k += 1
    for vec in extra:
        vec = np.asarray(vec, dtype=float).ravel()
        starts.append(vec / np.linalg.norm(vec))
    return starts


def solve_chi_d(
    box: LatticeBox,
    p: float,
    config: Optional[ChiConfig] = None,
    initial: Sequence[FloatArray] = (),
) -> VariationalResult:
    """Minimise Σ_e Σ_z |g(z+e) − g(z)|^p over ℓ²-normalised g supported in the box.

    Starts are the normalised all-ones vector, the principal eigenvector of the
    unit-conductance Laplacian, seeded Gaussian vectors and any ``initial``
    vectors. For p < 2 the energy is smoothed to Σ(δ² + μ²)^{p/2} with
    μ_k = μ_0·2^{−k}, μ_0 = 0.1·E_0^{1/p}; for p > 1 a final unsmoothed phase
    drives the projected gradient below ``tol``. The value is the exact energy
    of the best iterate, hence always an upper bound on χ^d(B).

    Raises:
        DomainError: If p is outside (0, 2].
    """
    if not 0 < p <= 2:
        raise DomainError(f"p must lie in (0, 2], got {p}")
    config = config or ChiConfig()
    n = box.size

    if n == 1:
        value = 2.0 * box.d
        return VariationalResult(value, np.ones(1), p, 1, [value], 0.0, 0.0, True, box=box)

    values: List[float] = []
    best_result: Optional[VariationalResult] = None
    for index, start in enumerate(_starts(box, config, initial)):
        g = box.to_grid(start)
        e0 = p_energy(g, p)
        levels = [] if p == 2 else [0.1 * e0 ** (1.0 / p) * 2.0**-k for k in range(config.smoothing_levels)]
        best, best_value = g, e0
        mu, residual, converged = 0.0, np.inf, False
        for mu in levels:
            g, residual, converged, cand, cand_value = _descend(
                g, p, mu, config.max_iter, config.tol, accept_stall=p <= 1
            )
            if cand_value < best_value:
                best, best_value = cand, cand_value
        if p > 1 or not levels:
            mu = 0.0
            g, residual, converged, cand, cand_value = _descend(g, p, 0.0, config.max_iter, config.tol)
            if cand_value < best_value:
                best, best_value = cand, cand_value
        value = p_energy(best, p)
        values.append(value)
        log.debug("chi_d_restart_finished", restart=index, value=value, residual=residual, mu=mu)
        if best_result is None or value < best_result.value - _TIE * max(1.0, best_result.value):
            best_result = VariationalResult(
                value=value,
                minimizer=best.ravel().copy(),
                p=p,
                restarts=0,
                restart_values=[],
                smoothing=mu,
                residual=residual,
                converged=converged,
                best_restart=index,
                box=box,
            )

    assert best_result is not None
    result = VariationalResult(
        value=best_result.value,
        minimizer=best_result.minimizer,
        p=p,
        restarts=len(values),
        restart_values=values,
        smoothing=best_result.smoothing,
        residual=best_result.residual,
        converged=best_result.converged,
        best_restart=best_result.best_restart,
        box=box,
    )
    if not result.converged:
        log.warning("chi_d_not_converged", sites=n, p=p, residual=result.residual)
    log.info("chi_d_solved", sites=n, p=p, value=result.value, spread=result.spread)
    return result


def transfer(values: FloatArray, source: LatticeBox, target: LatticeBox) -> FloatArray:
    """Zero-extend (or restrict) a site vector from one box to another by coordinates."""
    out = np.zeros(target.shape)
    grid = source.to_grid(values)
    lo = np.maximum(source.lower, target.lower)
    hi = np.minimum(np.asarray(source.upper) + 1, np.asarray(target.upper) + 1)
    if np.any(hi <= lo):
        return out.ravel()
    src = tuple(slice(a - s, b - s) for a, b, s in zip(lo, hi, source.lower))
    dst = tuple(slice(a - t, b - t) for a, b, t in zip(lo, hi, target.lower))
    out[dst] = grid[src]
    return out.ravel()


def chi_d_sequence(
    boxes: Sequence[LatticeBox],
    p: float,
    config: Optional[ChiConfig] = None,
) -> List[VariationalResult]:
    """Solve along growing boxes, seeding each solve with the previous minimiser.

    For nested boxes the previous minimiser is feasible on the next box with
    the same energy, so the returned values are non-increasing.
    """
    results: List[VariationalResult] = []
    for box in boxes:
        initial = []
        if results and results[-1].box is not None:
            moved = transfer(results[-1].minimizer, results[-1].box, box)
            if np.linalg.norm(moved) > 0:
                initial.append(moved)
        results.append(solve_chi_d(box, p, config, initial))
    return results
