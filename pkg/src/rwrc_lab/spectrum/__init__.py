"""Dirichlet operators, eigenpairs, semigroups and Lifshitz tails."""

from rwrc_lab.spectrum.bounds import PerturbationCheck, holder_lower_bound, perturbation_bound_check
from rwrc_lab.spectrum.eigen import (
    SpectralResult,
    dense_eigen,
    dense_matrix,
    lowest_eigenpairs,
    principal_eigen,
)
from rwrc_lab.spectrum.lifshitz import (
    LifshitzRow,
    LifshitzTable,
    lifshitz_mc,
    lifshitz_singleton_oracle,
)
from rwrc_lab.spectrum.operator import DirichletOperator, assemble, dense_batch, dirichlet_form
from rwrc_lab.spectrum.rescaled import discretise_potential, rescaled_eigen, rescaled_operator
from rwrc_lab.spectrum.semigroup import semigroup_apply

__all__ = [
    "DirichletOperator",
    "LifshitzRow",
    "LifshitzTable",
    "PerturbationCheck",
    "SpectralResult",
    "assemble",
    "dense_batch",
    "dense_eigen",
    "dense_matrix",
    "dirichlet_form",
    "discretise_potential",
    "holder_lower_bound",
    "lifshitz_mc",
    "lifshitz_singleton_oracle",
    "lowest_eigenpairs",
    "perturbation_bound_check",
    "principal_eigen",
    "rescaled_eigen",
    "rescaled_operator",
    "semigroup_apply",
]
