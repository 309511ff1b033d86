"""Kuhn interpolation and quenched spectral homogenisation."""

from rwrc_lab.homogenise.interpolation import (
    EnergyMatch,
    InterpolatedFunction,
    InterpolationResidual,
    energy_match_check,
    interpolation_residual,
    kuhn_interpolate,
)
from rwrc_lab.homogenise.spectral import (
    CEffEstimate,
    EllipticityBracket,
    HomogenisationResult,
    continuum_eigenvalues,
    ellipticity_bracket,
    estimate_c_eff,
    extrapolate,
    extrapolate_with_error,
    quenched_rate,
    spectral_convergence_experiment,
)

__all__ = [
    "CEffEstimate",
    "EllipticityBracket",
    "EnergyMatch",
    "HomogenisationResult",
    "InterpolatedFunction",
    "InterpolationResidual",
    "continuum_eigenvalues",
    "ellipticity_bracket",
    "energy_match_check",
    "estimate_c_eff",
    "extrapolate",
    "extrapolate_with_error",
    "interpolation_residual",
    "kuhn_interpolate",
    "quenched_rate",
    "spectral_convergence_experiment",
]
