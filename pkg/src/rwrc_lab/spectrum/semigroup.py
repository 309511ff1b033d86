"""Action of the Dirichlet semigroup e^{−t·h} on a vector."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray

from rwrc_lab.exceptions import ConvergenceError, DomainError
from rwrc_lab.spectrum.operator import DirichletOperator

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

DEFAULT_DENSE_THRESHOLD = 200
KRYLOV_DIM = 40
_MAX_STEPS = 100_000


def _lanczos_step(op: DirichletOperator, w: FloatArray, tau: float, m: int):
    """One Krylov step: (approximation of e^{−τh}w, error estimate).

    Lanczos with full reorthogonalisation; the error estimate is the usual
    β_m·|e_m^T e^{−τT} e_1|·‖w‖ term.
    """
    n = w.size
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        return np.zeros(n), 0.0
    m = min(m, n)
    basis = np.zeros((n, m))
    diag = np.zeros(m)
    off = np.zeros(m)
    basis[:, 0] = w / norm
    size = m
    for j in range(m):
        u = op(basis[:, j])
        diag[j] = basis[:, j] @ u
        u = u - basis[:, : j + 1] @ (basis[:, : j + 1].T @ u)
        u = u - basis[:, : j + 1] @ (basis[:, : j + 1].T @ u)
        off[j] = np.linalg.norm(u)
        if j + 1 == m:
            break
        if off[j] <= 1e-14 * max(1.0, abs(diag[j])):
            size = j + 1
            off[j] = 0.0
            break
        basis[:, j + 1] = u / off[j]

    theta, vecs = scipy.linalg.eigh_tridiagonal(diag[:size], off[: size - 1])
    coeffs = vecs @ (np.exp(-tau * theta) * vecs[0, :])
    error = norm * off[size - 1] * abs(coeffs[-1])
    return norm * (basis[:, :size] @ coeffs), float(error)


def semigroup_apply(
    op: DirichletOperator,
    t: float,
    g: FloatArray,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
    rtol: float = 1e-10,
) -> FloatArray:
    """Compute e^{−t·h} g.

    Boxes with at most ``dense_threshold`` sites use the dense
    scaling-and-squaring matrix exponential; larger boxes use Krylov steps
    whose length is halved until the local error estimate meets ``rtol``.

    Raises:
        DomainError: If t < 0 or g does not match the box.
        ConvergenceError: If the step size collapses.
    """
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    vector = np.asarray(g, dtype=float).ravel()
    if vector.size != op.size:
        raise DomainError(f"g has {vector.size} entries, box has {op.size} sites")
    if t == 0:
        return vector.copy()

    if op.size <= dense_threshold:
        return scipy.linalg.expm(-t * op.dense()) @ vector

    w = vector.copy()
    elapsed = 0.0
    tau = min(t, KRYLOV_DIM / max(op.norm_bound(), np.finfo(float).tiny))
    steps = 0
    while elapsed < t:
        tau = min(tau, t - elapsed)
        candidate, error = _lanczos_step(op, w, tau, KRYLOV_DIM)
        scale = max(float(np.linalg.norm(candidate)), np.finfo(float).tiny)
        if error <= rtol * scale * max(tau / t, 1e-3):
            w = candidate
            elapsed += tau
            tau *= 1.5
        else:
            tau *= 0.5
        steps += 1
        if steps > _MAX_STEPS or tau <= 1e-14 * t:
            raise ConvergenceError(
                f"Krylov step size collapsed at t={elapsed:.3e} of {t:.3e}",
                best=w,
            )
    log.debug("semigroup_krylov_done", sites=op.size, t=t, steps=steps)
    return w
