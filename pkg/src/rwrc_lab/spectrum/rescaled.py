"""Rescaled operators −α²Δ^{φ_t} + V_t built from continuum data."""

from __future__ import annotations

from typing import Optional, Union

from rwrc_lab.conductance.profiles import unscaled_profile
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.quadrature import DEFAULT_ORDER, Potential, Profile, as_potential, cell_average
from rwrc_lab.spectrum.eigen import principal_eigen
from rwrc_lab.spectrum.operator import DirichletOperator, assemble


def discretise_potential(V: Union[None, float, Potential], box: LatticeBox, order: int = DEFAULT_ORDER):
    """V_t(z) = ∫_{[0,1]^d} V((z+y)/α) dy for every site, or None for V ≡ 0."""
    if V is None:
        return None
    return cell_average(as_potential(V), box.sites, box.alpha, order)


def rescaled_operator(
    phi: Union[float, Profile],
    V: Union[None, float, Potential],
    box: LatticeBox,
    order: int = DEFAULT_ORDER,
) -> DirichletOperator:
    """Assemble −α²Δ^{φ_t} + V_t on the box."""
    field = unscaled_profile(phi, box, order)
    return assemble(field, box, discretise_potential(V, box, order), laplace_scale=box.alpha**2)


def rescaled_eigen(
    phi: Union[float, Profile],
    V: Union[None, float, Potential],
    box: LatticeBox,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
) -> float:
    """Principal eigenvalue λ_1^{(t)}(φ, V) of −α²Δ^{φ_t} + V_t."""
    op = rescaled_operator(phi, V, box)
    if max_iter is None:
        return principal_eigen(op, tol).eigenvalue
    return principal_eigen(op, tol, max_iter).eigenvalue
