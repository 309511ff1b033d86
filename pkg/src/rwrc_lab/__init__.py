"""
rwrc-lab - Numerical laboratory for random walks among random conductances.

This package builds finite lattice boxes with i.i.d. random conductances and
cross-validates the computable objects attached to them: principal Dirichlet
eigenvalues, p-energy variational problems, non-exit probabilities of the
continuous-time walk, Lifshitz-tail frequencies and spectral homogenisation.

Features:
- Exact heavy-lower-tail and uniformly elliptic conductance samplers
- Sparse Dirichlet operators with CG-based inverse iteration
- Gillespie simulation and two-level Monte Carlo estimators
- Smoothed projected gradient descent for the non-convex p-energy
- Config-driven, byte-deterministic experiment runs
"""

__version__ = "0.3.0"
__all__ = ["__version__"]
