"""Eigenvalue and non-exit comparison bounds as numerical diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.exceptions import DomainError
from rwrc_lab.spectrum.operator import assemble
from rwrc_lab.spectrum.semigroup import semigroup_apply


def holder_lower_bound(
    field: ConductanceField,
    eta: float,
    chi_d: float,
    beta: float = 1.0,
) -> float:
    """β^{−1} χ^d(B)^{(η+1)/η} (Σ_e (β a)^{−η})^{−1/η} over edges touching the box.

    Hölder's inequality applied to the Rayleigh quotient gives
    λ^a(B) ≥ this value whenever ``chi_d`` is the true χ^d(B) at p = 2η/(1+η).
    With the rescaled field a_t the sum equals α^d·Σ_e∫_G a_t^{−η}.

    Raises:
        DomainError: If eta, chi_d or beta is not positive.
    """
    if eta <= 0 or chi_d <= 0 or beta <= 0:
        raise DomainError(f"eta, chi_d and beta must be positive, got {eta}, {chi_d}, {beta}")
    total = float(np.sum((beta * field.touching_weights()) ** (-eta)))
    return chi_d ** ((eta + 1.0) / eta) * total ** (-1.0 / eta) / beta


@dataclass(frozen=True)
class PerturbationCheck:
    """Outcome of the perturbation comparison P^φ ≥ e^{−4dεt} P^{ψ−ε}."""

    p_phi: float
    p_lowered: float
    factor: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.p_phi - self.factor * self.p_lowered


def _survival(field: ConductanceField, t: float, index: int) -> float:
    op = assemble(field)
    return float(semigroup_apply(op, t, np.ones(op.size))[index])


def perturbation_bound_check(
    phi: ConductanceField,
    psi: ConductanceField,
    eps: float,
    t: float,
    start: Optional[Sequence[int]] = None,
) -> PerturbationCheck:
    """Compare exact non-exit probabilities of φ and ψ − ε.

    Requires ψ − ε ≤ φ ≤ ψ + ε and ψ > ε on every edge touching the box.

    Raises:
        DomainError: If the fields live on different boxes or violate the band.
    """
    if phi.box != psi.box:
        raise DomainError("phi and psi live on different boxes")
    if eps <= 0 or t < 0:
        raise DomainError(f"eps must be positive and t non-negative, got {eps}, {t}")
    mask = psi.edge_mask
    upper, lower, value = psi.weights[mask] + eps, psi.weights[mask] - eps, phi.weights[mask]
    if np.any(lower <= 0):
        raise DomainError("psi - eps must stay positive on every touching edge")
    slack = 1e-12 * max(1.0, float(np.max(upper)))
    if np.any(value < lower - slack) or np.any(value > upper + slack):
        raise DomainError("phi must lie within [psi - eps, psi + eps] on every touching edge")

    box = phi.box
    index = box.index(start if start is not None else box.origin_site())
    lowered = ConductanceField(
        box=box,
        weights=np.where(mask, psi.weights - eps, psi.weights),
        source="perturbed",
    )
    p_phi = _survival(phi, t, index)
    p_lowered = _survival(lowered, t, index)
    factor = math.exp(-4.0 * box.d * eps * t)
    holds = p_phi >= factor * p_lowered * (1.0 - 1e-10) - 1e-14
    return PerturbationCheck(p_phi=p_phi, p_lowered=p_lowered, factor=factor, holds=bool(holds))
