"""Analytic witness families for χ^c and the discretised profiles g^{(n)}."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.quadrature import DEFAULT_ORDER, cell_average, unit_rule

FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class WitnessResult:
    """Norm and p-energy of one witness function.

    Attributes:
        norm: ‖f‖₂ (1 up to quadrature error).
        energy: Σ_i ∫|∂_i f|^p.
        exact_energy: Closed-form energy when available.
        bound_exponent: Exponent of the decay bound for this family.
        boundary_case: True on the boundary p = 2/3 of the one-dimensional family.
    """

    norm: float
    energy: float
    exact_energy: Optional[float] = None
    bound_exponent: Optional[float] = None
    boundary_case: bool = False


def witness_d1(r: float, eps0: float, p: float, h: float = 1e-5) -> WitnessResult:
    """f_r(x) = A_r(ε_0 − |x|)^r on (−ε_0, ε_0), A_r² = (2r+1)/(2ε_0^{2r+1}).

    Norm and energy use a Gauss-Legendre rule on every grid cell of width h.
    The energy decays like r^{3p/2−1}.

    Raises:
        DomainError: If r ≤ 1/2, or eps0, p or h is not positive.
    """
    if r <= 0.5:
        raise DomainError(f"r must exceed 1/2, got {r}")
    if eps0 <= 0 or p <= 0 or h <= 0:
        raise DomainError(f"eps0, p and h must be positive, got {eps0}, {p}, {h}")
    amplitude = math.sqrt((2.0 * r + 1.0) / (2.0 * eps0 ** (2.0 * r + 1.0)))

    # symmetric in x, so integrate over (0, eps0) and double
    cells = max(1, int(round(eps0 / h)))
    width = eps0 / cells
    nodes, weights = unit_rule(DEFAULT_ORDER)
    x = (np.arange(cells)[:, None] + nodes[None, :]) * width
    u = eps0 - x
    norm_sq = 2.0 * width * float(np.sum((amplitude * u**r) ** 2 @ weights))
    slope = amplitude * r * u ** (r - 1.0)
    energy = 2.0 * width * float(np.sum(slope**p @ weights))

    exponent = p * (r - 1.0) + 1.0
    exact = 2.0 * (amplitude * r) ** p * eps0**exponent / exponent if exponent > 0 else None
    return WitnessResult(
        norm=math.sqrt(norm_sq),
        energy=energy,
        exact_energy=exact,
        bound_exponent=1.5 * p - 1.0,
        boundary_case=abs(p - 2.0 / 3.0) < 1e-12,
    )


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def angular_factor(d: int, p: float) -> float:
    """Σ_i ∫_{S^{d−1}} |ω_i|^p dω = d·2π^{(d−1)/2} Γ((p+1)/2) / Γ((d+p)/2)."""
    log_value = (
        math.log(2.0 * d)
        + 0.5 * (d - 1) * math.log(math.pi)
        + special.gammaln(0.5 * (p + 1.0))
        - special.gammaln(0.5 * (d + p))
    )
    return math.exp(log_value)


def printed_witness_exponent(d: int, p: float, gamma: float) -> float:
    """The decay exponent (−2pγ − pd − 4p + 4d)/4 as stated for the family f_ε."""
    return (-2.0 * p * gamma - p * d - 4.0 * p + 4.0 * d) / 4.0


def exact_witness_exponent(d: int, p: float) -> float:
    """Exact scaling exponent d − p − pd/2 of the energy of f_ε in ε."""
    return d - p - 0.5 * p * d


def witness_dge2(eps: float, gamma: float, d: int, p: float) -> WitnessResult:
    """f_ε(x) = A_ε(|x|^{−2γ} − ε^{−2γ})^{1/2} on the ball |x| < ε, d ≥ 2.

    The norm and Σ_i ∫|∂_i f|^p reduce to radial integrals on (0, 1) after
    x = ε·s, evaluated by adaptive quadrature (the integrands carry integrable
    endpoint singularities).

    Raises:
        DomainError: If d < 2, γ ∉ (d/4, d/2), p > 2d/(d+2), or the energy diverges.
    """
    if d < 2:
        raise DomainError(f"witness_dge2 needs d >= 2, got {d}")
    if not d / 4.0 < gamma < d / 2.0:
        raise DomainError(f"gamma must lie in ({d / 4}, {d / 2}), got {gamma}")
    if not 0 < p <= 2.0 * d / (d + 2.0):
        raise DomainError(f"p must lie in (0, {2 * d / (d + 2)}], got {p}")
    if d - p * (gamma + 1.0) <= 0:
        raise DomainError(f"energy of f_eps diverges at the origin for gamma={gamma}, p={p}")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")

    area = sphere_area(d)
    amp_sq = d * (d - 2.0 * gamma) / (2.0 * gamma * area * eps ** (d - 2.0 * gamma))
    amplitude = math.sqrt(amp_sq)

    def mass(s: float) -> float:
        return (s ** (-2.0 * gamma) - 1.0) * s ** (d - 1.0)

    norm_sq, _ = integrate.quad(mass, 0.0, 1.0, limit=200)
    norm_sq *= amp_sq * area * eps**d * eps ** (-2.0 * gamma)

    def slope_p(s: float) -> float:
        inner = s ** (-2.0 * gamma) - 1.0
        if inner <= 0.0:
            return 0.0
        return (gamma * s ** (-2.0 * gamma - 1.0) / math.sqrt(inner)) ** p * s ** (d - 1.0)

    radial, _ = integrate.quad(slope_p, 0.0, 1.0, limit=400)
    # f'(εs) = A ε^{−γ−1}·γ s^{−2γ−1}(s^{−2γ} − 1)^{−1/2}
    energy = angular_factor(d, p) * (amplitude * eps ** (-gamma - 1.0)) ** p * eps**d * radial
    return WitnessResult(
        norm=math.sqrt(norm_sq),
        energy=float(energy),
        bound_exponent=exact_witness_exponent(d, p),
    )


@dataclass(frozen=True)
class WitnessCurve:
    """Energies of a witness family along its parameter (r for d = 1, ε for d ≥ 2)."""

    d: int
    p: float
    parameter: str
    grid: List[float]
    energies: List[float]
    exponent: float


def witness_curve(d: int, p: float, grid: Sequence[float], gamma: Optional[float] = None) -> WitnessCurve:
    """Energy decay of the witness family showing that χ^c(G) = 0.

    In d = 1 the grid holds exponents r of f_r (decay r^{3p/2−1}, needs p < 2/3);
    in d ≥ 2 it holds radii ε of f_ε (decay ε^{d−p−pd/2}).
    """
    values = [float(v) for v in grid]
    if d == 1:
        energies = [witness_d1(r, 0.5, p).energy for r in values]
        return WitnessCurve(d, p, "r", values, energies, 1.5 * p - 1.0)
    if gamma is None:
        upper = min(d / 2.0, d / p - 1.0)
        gamma = 0.5 * (d / 4.0 + upper)
    energies = [witness_dge2(eps, gamma, d, p).energy for eps in values]
    return WitnessCurve(d, p, "eps", values, energies, exact_witness_exponent(d, p))


def discretise_profile(
    g: Callable[[FloatArray], FloatArray],
    n: int,
    box: LatticeBox,
    order: int = DEFAULT_ORDER,
) -> FloatArray:
    """g^{(n)}(z) = [n^{−d} ∫_{[0,1]^d} g²((z+y)/n) dy]^{1/2} on the sites of ``box``.

    If g is L²-normalised and supported in the region covered by the box
    cells, g^{(n)} is ℓ²-normalised.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    squares = cell_average(lambda y: np.asarray(g(y), dtype=float) ** 2, box.sites, float(n), order)
    return np.sqrt(squares / n**box.d)
