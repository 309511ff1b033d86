"""Rate functions and the characteristic variational problems χ^d and χ^c."""

from rwrc_lab.varprob.continuum import ContinuumLevel, ContinuumResult, aitken, solve_chi_c
from rwrc_lab.varprob.energy import GridFunction, p_energy, rate_I_c_phi, rate_J_c, rate_J_d
from rwrc_lab.varprob.params import RegimeParams, eta_from_p
from rwrc_lab.varprob.profile import OptimalProfile, optimal_profile, pointwise_cost, profile_from_gradient
from rwrc_lab.varprob.sobolev import (
    CutoffRow,
    CutoffTable,
    SobolevCheck,
    cutoff,
    cutoff_convergence,
    discrete_sobolev_check,
)
from rwrc_lab.varprob.solver import ChiConfig, VariationalResult, chi_d_sequence, solve_chi_d, transfer
from rwrc_lab.varprob.witnesses import (
    WitnessCurve,
    WitnessResult,
    discretise_profile,
    exact_witness_exponent,
    printed_witness_exponent,
    witness_curve,
    witness_d1,
    witness_dge2,
)

__all__ = [
    "ChiConfig",
    "ContinuumLevel",
    "ContinuumResult",
    "CutoffRow",
    "CutoffTable",
    "GridFunction",
    "OptimalProfile",
    "RegimeParams",
    "SobolevCheck",
    "VariationalResult",
    "WitnessCurve",
    "WitnessResult",
    "aitken",
    "chi_d_sequence",
    "cutoff",
    "cutoff_convergence",
    "discrete_sobolev_check",
    "discretise_profile",
    "eta_from_p",
    "exact_witness_exponent",
    "optimal_profile",
    "p_energy",
    "pointwise_cost",
    "printed_witness_exponent",
    "profile_from_gradient",
    "rate_I_c_phi",
    "rate_J_c",
    "rate_J_d",
    "solve_chi_c",
    "solve_chi_d",
    "transfer",
    "witness_curve",
    "witness_d1",
    "witness_dge2",
]
