"""Spectral homogenisation experiments and effective conductivity estimates.

Units: the homogenised operator is −(c_eff/2)Δ + V, with c_eff fixed by the
a ≡ 1 calibration (c_eff = 2 for unit conductances, so α²λ_1 → π² on (0,1)).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from numpy.typing import NDArray

from rwrc_lab.conductance.models import ConductanceField, ConstantModel, EllipticModel, constant_field
from rwrc_lab.conductance.sampler import sample_field
from rwrc_lab.exceptions import DomainError, InsufficientDataError
from rwrc_lab.lattice import LatticeBox, build_box, unit_cube
from rwrc_lab.parallel import ordered_map
from rwrc_lab.quadrature import Potential
from rwrc_lab.spectrum.eigen import lowest_eigenpairs, principal_eigen
from rwrc_lab.spectrum.operator import assemble
from rwrc_lab.spectrum.rescaled import discretise_potential
from rwrc_lab.utils.streams import derive_seed
from rwrc_lab.varprob.energy import GridFunction, rate_I_c_phi

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

HOMOG_STREAM = 9
CEFF_STREAM = 10
Z_95 = 1.959963984540054

ElasticModel = Union[EllipticModel, ConstantModel]


def _constant_value(V: Union[None, float, Potential]) -> Optional[float]:
    if V is None:
        return 0.0
    if not callable(V):
        return float(V)
    return None


def extrapolate(sizes: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares limit α → ∞ of values ≈ c0 + c1/α (+ c2/α² with three or more sizes)."""
    x = 1.0 / np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("no sizes to extrapolate from")
    if x.size == 1 or np.ptp(x) == 0:
        return float(y.mean())
    degree = 2 if x.size >= 3 else 1
    design = np.vander(x, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coeffs[0])


def extrapolate_with_error(
    sizes: Sequence[float],
    values: Sequence[float],
    errors: Sequence[float],
) -> Tuple[float, float]:
    """Weighted fit of values ≈ c0 + c1/α (+ c2/α²); returns c0 and its standard error.

    Weights are 1/σ² when every σ is positive. Otherwise the unweighted fit is
    used and the σ are propagated through it, so exact values give error 0.

    Raises:
        InsufficientDataError: If no sizes are given.
        DomainError: If the lengths differ or an error is negative.
    """
    x = 1.0 / np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    sigma = np.asarray(errors, dtype=float)
    if x.size == 0:
        raise InsufficientDataError("no sizes to extrapolate from")
    if not x.size == y.size == sigma.size:
        raise DomainError(f"got {x.size} sizes, {y.size} values and {sigma.size} errors")
    if np.any(sigma < 0):
        raise DomainError("standard errors must be non-negative")
    if x.size == 1 or np.ptp(x) == 0:
        weights = np.full(x.size, 1.0 / x.size)
        return float(weights @ y), float(np.sqrt(weights**2 @ sigma**2))
    degree = 2 if x.size >= 3 else 1
    design = np.vander(x, degree + 1, increasing=True)
    w = 1.0 / sigma**2 if np.all(sigma > 0) else np.ones_like(sigma)
    # c = L y with L = (XᵀWX)⁻¹XᵀW; Cov(c) = L Σ Lᵀ
    estimator = np.linalg.solve(design.T @ (w[:, None] * design), design.T * w)
    row = estimator[0]
    return float(row @ y), float(np.sqrt(row**2 @ sigma**2))


def continuum_eigenvalues(
    c_eff: float,
    V: Union[None, float, Potential],
    d: int,
    j_max: int,
    resolution: Optional[int] = None,
) -> List[float]:
    """The j_max lowest Dirichlet eigenvalues of −(c_eff/2)Δ + V on (0,1)^d.

    Constant V uses the closed form (c_eff/2)π²|k|² + V; otherwise a fine
    unit-conductance lattice at scale ``resolution`` is solved.
    """
    if c_eff <= 0:
        raise DomainError(f"c_eff must be positive, got {c_eff}")
    shift = _constant_value(V)
    if shift is not None:
        kmax = j_max + 1
        levels = sorted(
            sum(k * k for k in ks) for ks in itertools.product(range(1, kmax + 1), repeat=d)
        )
        return [0.5 * c_eff * math.pi**2 * lv + shift for lv in levels[:j_max]]
    alpha = resolution or {1: 512, 2: 64}.get(d, 16)
    box = unit_cube(d, alpha)
    op = assemble(constant_field(box, 0.5 * c_eff), box, discretise_potential(V, box), alpha**2)
    return [pair.eigenvalue for pair in lowest_eigenpairs(op, j_max)]


def _reference_eigenfunction(box: LatticeBox) -> FloatArray:
    """α^{−d/2} Π_i √2 sin(π x_i/(α+1)) at the box sites x.

    This is v_1 of the unit cube rescaled to the box; the lattice eigenvector
    for a ≡ 1 differs from it by O(1/α) in ℓ².
    """
    x = box.sites.astype(float)
    values = np.prod(np.sqrt(2.0) * np.sin(np.pi * x / (box.alpha + 1.0)), axis=1)
    return values / box.alpha ** (box.d / 2.0)


@dataclass(frozen=True)
class CEffEstimate:
    """Effective conductivity with its 95% interval and per-size calibration ratios.

    Attributes:
        c_eff: Estimate 2·lim λ_env/λ_unit.
        ci_low: Lower end of the 95% interval.
        ci_high: Upper end of the 95% interval.
        ratios: Environment-averaged λ_env/λ_unit per size.
        stderrs: Standard error of each ratio over environments.
        stderr: Standard error of the extrapolated ratio limit.
        oracle: 2·(harmonic mean) in d = 1, None otherwise.
    """

    c_eff: float
    ci_low: float
    ci_high: float
    sizes: List[float]
    ratios: List[float]
    stderrs: List[float]
    stderr: float
    oracle: Optional[float] = None


def _principal_ratio_samples(
    model: ElasticModel,
    box: LatticeBox,
    n_env: int,
    seed: int,
    size_index: int,
    threads: int,
    tol: float,
) -> FloatArray:
    unit = principal_eigen(assemble(constant_field(box), box), tol).eigenvalue

    def one(k: int) -> float:
        env = sample_field(box, model, derive_seed(seed, CEFF_STREAM, size_index, k))
        return principal_eigen(assemble(env, box), tol).eigenvalue / unit

    return np.asarray(ordered_map(one, range(n_env), threads))


def estimate_c_eff(
    model: ElasticModel,
    d: int,
    sizes: Sequence[float],
    n_env: int,
    seed: int,
    threads: int = 1,
    tol: float = 1e-10,
) -> CEffEstimate:
    """Fit c_eff from α²λ_1 on growing unit cubes, calibrated by the a ≡ 1 run.

    Per size the environment average of λ_1^a/λ_1^{a≡1} is formed; c_eff is
    twice its limit in 1/α (the value itself with a single size). The 95%
    interval is 2·(limit ± 1.96·se), with se propagated from the per-size
    standard errors through the weighted fit.

    Raises:
        InsufficientDataError: If no sizes are given.
    """
    if not sizes:
        raise InsufficientDataError("estimate_c_eff needs at least one size")
    if n_env < 1:
        raise DomainError(f"n_env must be at least 1, got {n_env}")
    ratios: List[float] = []
    errors: List[float] = []
    for index, alpha in enumerate(sizes):
        box = unit_cube(d, float(alpha))
        samples = _principal_ratio_samples(model, box, n_env, seed, index, threads, tol)
        ratios.append(float(samples.mean()))
        errors.append(float(samples.std(ddof=1) / math.sqrt(n_env)) if n_env > 1 else 0.0)
        log.info("c_eff_size_done", alpha=alpha, ratio=ratios[-1], stderr=errors[-1])
    limit, stderr = extrapolate_with_error(sizes, ratios, errors)
    oracle = 2.0 * model.harmonic_mean() if d == 1 else None
    return CEffEstimate(
        c_eff=2.0 * limit,
        ci_low=2.0 * (limit - Z_95 * stderr),
        ci_high=2.0 * (limit + Z_95 * stderr),
        sizes=[float(a) for a in sizes],
        ratios=ratios,
        stderrs=errors,
        stderr=stderr,
        oracle=oracle,
    )


@dataclass(frozen=True)
class HomogenisationResult:
    """Eigenvalue tables across sizes with limits, c_eff and eigenfunction distances.

    Attributes:
        sizes: Scales α.
        eigenvalues: Environment-averaged λ_j^{(α)}, one row per size.
        extrapolated: Fitted limits per j.
        c_eff: Effective conductivity estimate.
        continuum: Eigenvalues of −(c_eff/2)Δ + V.
        gaps: Mean λ_2 − λ_1 per size.
        distances: Mean ‖v_1^{(α)} − α^{−d/2}v_1(·/(α+1))‖₂ per size (constant V only).
        origin_positive: Whether v_1 was positive at the site nearest the origin for every run.
    """

    sizes: List[float]
    eigenvalues: List[List[float]]
    extrapolated: List[float]
    c_eff: CEffEstimate
    continuum: List[float]
    gaps: List[float]
    distances: Optional[List[float]] = None
    origin_positive: bool = True


def spectral_convergence_experiment(
    model: ElasticModel,
    V: Union[None, float, Potential],
    j_max: int,
    sizes: Sequence[float],
    n_env: int,
    seed: int,
    d: int = 1,
    threads: int = 1,
    tol: float = 1e-10,
) -> HomogenisationResult:
    """Eigenvalues of −α²Δ^a + V_t on α(0,1)^d ∩ Z^d against −(c_eff/2)Δ + V.

    Raises:
        InsufficientDataError: If no sizes are given.
    """
    if not sizes:
        raise InsufficientDataError("spectral_convergence_experiment needs at least one size")
    constant_v = _constant_value(V) is not None
    table: List[List[float]] = []
    distances: List[float] = []
    gaps: List[float] = []
    origin_positive = True

    for index, alpha in enumerate(sizes):
        box = unit_cube(d, float(alpha))
        potential = discretise_potential(V, box)
        reference = _reference_eigenfunction(box)
        k = min(j_max, box.size)

        def one(env_index: int):
            env = sample_field(box, model, derive_seed(seed, HOMOG_STREAM, index, env_index))
            pairs = lowest_eigenpairs(assemble(env, box, potential, box.alpha**2), k, tol)
            return [p.eigenvalue for p in pairs], pairs[0].eigenvector

        runs = ordered_map(one, range(n_env), threads)
        values = np.asarray([r[0] for r in runs])
        table.append(values.mean(axis=0).tolist())
        if k >= 2:
            gaps.append(float(np.mean(values[:, 1] - values[:, 0])))
        origin = box.index(box.origin_site())
        origin_positive &= all(r[1][origin] > 0 for r in runs)
        if constant_v:
            distances.append(float(np.mean([np.linalg.norm(r[1] - reference) for r in runs])))
        log.info("homog_size_done", alpha=alpha, sites=box.size, eigenvalues=table[-1])

    width = min(len(row) for row in table)
    extrapolated = [extrapolate(sizes, [row[j] for row in table]) for j in range(width)]
    c_eff = estimate_c_eff(model, d, sizes, n_env, seed, threads, tol)
    continuum = continuum_eigenvalues(c_eff.c_eff, V, d, width)
    return HomogenisationResult(
        sizes=[float(a) for a in sizes],
        eigenvalues=table,
        extrapolated=extrapolated,
        c_eff=c_eff,
        continuum=continuum,
        distances=distances if constant_v else None,
        gaps=gaps,
        origin_positive=bool(origin_positive),
    )


def quenched_rate(f: GridFunction, c_eff: float, norm_tol: float = 1e-6) -> float:
    """c_eff·(‖∇f‖₂² − min over normalised grid functions of the same energy).

    Raises:
        DomainError: If f is not L²-normalised or c_eff is not positive.
    """
    if c_eff <= 0:
        raise DomainError(f"c_eff must be positive, got {c_eff}")
    norm = f.l2_norm()
    if abs(norm - 1.0) > norm_tol:
        raise DomainError(
            f"f must be L2-normalised, got norm {norm:.8g}",
            hint="Divide the grid values by GridFunction.l2_norm().",
        )
    energy = rate_I_c_phi(f, 1.0)
    grid_box = build_box(f.d, 1.0, [(0.0, n + 1.0) for n in f.values.shape])
    floor = principal_eigen(assemble(constant_field(grid_box), grid_box)).eigenvalue / f.h**2
    return c_eff * (energy - floor)


@dataclass(frozen=True)
class EllipticityBracket:
    lower: float
    value: float
    upper: float

    @property
    def holds(self) -> bool:
        slack = 1e-10 * self.upper
        return self.lower - slack <= self.value <= self.upper + slack


def ellipticity_bracket(
    field: ConductanceField,
    box: Optional[LatticeBox],
    lam: float,
    tol: float = 1e-10,
) -> EllipticityBracket:
    """λ·λ_1^{a≡1} ≤ λ_1^a ≤ λ^{−1}·λ_1^{a≡1} for a field with values in [λ, 1/λ]."""
    if not 0 < lam <= 1:
        raise DomainError(f"lam must lie in (0, 1], got {lam}")
    box = box or field.box
    if box != field.box:
        raise DomainError("field and box differ")
    unit = principal_eigen(assemble(constant_field(box), box), tol).eigenvalue
    value = principal_eigen(assemble(field, box), tol).eigenvalue
    return EllipticityBracket(lower=lam * unit, value=value, upper=unit / lam)
