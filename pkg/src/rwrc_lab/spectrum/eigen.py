"""Principal and low-lying Dirichlet eigenpairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import structlog
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, cg, splu

from rwrc_lab.exceptions import ConvergenceError, DomainError
from rwrc_lab.spectrum.operator import DirichletOperator
from rwrc_lab.utils.streams import stream

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

# Residuals below this multiple of machine precision times ‖h‖ are not attainable
_FLOOR_FACTOR = 1e3


@dataclass(frozen=True)
class SpectralResult:
    """An eigenpair with its convergence record.

    Attributes:
        eigenvalue: Eigenvalue λ.
        eigenvector: ℓ²-normalised eigenvector (positive for the principal pair).
        residual: ‖h(v) − λv‖₂.
        iterations: Outer iterations used.
        converged: Whether the residual met the tolerance.
    """

    eigenvalue: float
    eigenvector: FloatArray
    residual: float
    iterations: int
    converged: bool = True


def _effective_tol(op: DirichletOperator, tol: float) -> float:
    floor = _FLOOR_FACTOR * np.finfo(float).eps * op.norm_bound()
    return max(tol, floor)


def _orient(v: FloatArray) -> FloatArray:
    """Fix the sign so that the largest-magnitude entry is positive."""
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def principal_eigen(
    op: DirichletOperator,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> SpectralResult:
    """Smallest eigenpair by shifted inverse iteration with CG inner solves.

    The shift is min V, so ``h − shift`` is positive definite (the Laplacian
    part has killing at the boundary). The start vector is the normalised
    all-ones vector, which is never orthogonal to the positive principal
    eigenfunction.

    Args:
        op: Dirichlet operator.
        tol: Absolute residual tolerance (raised to the attainable floor
            ~1e3·eps·‖h‖ for strongly scaled operators).
        max_iter: Maximum outer iterations.

    Returns:
        SpectralResult with a positive eigenvector.

    Raises:
        ConvergenceError: If the residual does not reach the tolerance; the
            best iterate is attached as ``best``.
    """
    n = op.size
    if n == 1:
        value = float(op.matrix[0, 0])
        return SpectralResult(value, np.ones(1), 0.0, 0)

    tol_eff = _effective_tol(op, tol)
    shift = float(op.potential.min())
    shifted = op.as_linear_operator(shift)
    diag = op.diagonal() - shift
    precond = LinearOperator((n, n), matvec=lambda x: x / diag, dtype=float)

    v = np.full(n, 1.0 / np.sqrt(n))
    hv = op(v)
    rho = float(v @ hv)
    residual = float(np.linalg.norm(hv - rho * v))
    best = SpectralResult(rho, v, residual, 0, converged=False)

    for iteration in range(1, max_iter + 1):
        if residual <= tol_eff:
            break
        guess = v / max(rho - shift, np.finfo(float).tiny)
        inner_tol = min(1e-3, max(1e-14, 1e-2 * tol_eff / max(abs(rho), 1.0)))
        x, info = cg(shifted, v, x0=guess, rtol=inner_tol, atol=0.0, maxiter=10 * n + 100, M=precond)
        if info < 0:
            raise ConvergenceError("CG breakdown in inverse iteration", best=best, residual=residual)
        v = x / np.linalg.norm(x)
        hv = op(v)
        rho = float(v @ hv)
        residual = float(np.linalg.norm(hv - rho * v))
        if residual < best.residual:
            best = SpectralResult(rho, v, residual, iteration, converged=False)
    else:
        iteration = max_iter

    if residual > tol_eff:
        log.warning(
            "principal_eigen_not_converged",
            sites=n,
            residual=best.residual,
            tol=tol_eff,
            iterations=max_iter,
        )
        raise ConvergenceError(
            f"Inverse iteration did not reach residual {tol_eff:.3e} after {max_iter} iterations "
            f"(best {best.residual:.3e})",
            best=best,
            residual=best.residual,
        )

    v = _orient(v)
    log.debug(
        "principal_eigen_converged",
        sites=n,
        eigenvalue=rho,
        residual=residual,
        iterations=iteration,
    )
    return SpectralResult(rho, v, residual, iteration)


def dense_eigen(op: DirichletOperator) -> tuple:
    """All eigenvalues and eigenvectors from a dense symmetric solve (oracle)."""
    values, vectors = scipy.linalg.eigh(op.dense())
    return values, vectors


def lowest_eigenpairs(
    op: DirichletOperator,
    k: int,
    tol: float = 1e-10,
    max_iter: int = 1000,
    guard: int = 3,
) -> List[SpectralResult]:
    """The ``k`` smallest eigenpairs, sorted by eigenvalue.

    Block inverse iteration with Rayleigh-Ritz extraction: the shifted operator
    is factorised once (sparse LU), and each sweep re-orthonormalises the block
    so higher pairs are deflated against the lower ones. ``guard`` extra block
    vectors keep the k-th pair converging at rate λ_k/λ_{k+guard+1}, which
    also covers (near-)degenerate eigenvalues. Small boxes use a dense solve.

    Raises:
        DomainError: If k is not in [1, |B|].
        ConvergenceError: If some pair does not converge.
    """
    n = op.size
    if not 1 <= k <= n:
        raise DomainError(f"k must be in [1, {n}], got {k}")
    m = min(n, k + guard)
    tol_eff = _effective_tol(op, tol)

    if n <= 2 * m:
        values, vectors = dense_eigen(op)
        results = []
        for j in range(k):
            vec = _orient(vectors[:, j])
            res = float(np.linalg.norm(op(vec) - values[j] * vec))
            results.append(SpectralResult(float(values[j]), vec, res, 0))
        return results

    shift = float(op.potential.min()) - 1e-12 * max(1.0, op.norm_bound())
    lu = splu((op.matrix - shift * sp.identity(n, format="csr")).tocsc())

    X = stream(0, 4242).standard_normal((n, m))
    X[:, 0] = 1.0
    X, _ = np.linalg.qr(X)

    for iteration in range(1, max_iter + 1):
        Q, _ = np.linalg.qr(lu.solve(X))
        AQ = op.matrix @ Q
        theta, S = scipy.linalg.eigh(Q.T @ AQ)
        X = Q @ S
        residuals = np.linalg.norm(AQ @ S - X * theta, axis=0)
        if np.all(residuals[:k] <= tol_eff):
            break
    else:
        best = [
            SpectralResult(float(theta[j]), X[:, j], float(residuals[j]), max_iter, False)
            for j in range(k)
        ]
        raise ConvergenceError(
            f"Block inverse iteration did not converge in {max_iter} sweeps "
            f"(max residual {float(residuals[:k].max()):.3e})",
            best=best,
            residual=float(residuals[:k].max()),
        )

    log.debug("lowest_eigenpairs_converged", sites=n, k=k, iterations=iteration)
    return [
        SpectralResult(float(theta[j]), _orient(X[:, j]), float(residuals[j]), iteration)
        for j in range(k)
    ]


def dense_matrix(op: DirichletOperator) -> FloatArray:
    """Dense copy of the operator matrix (oracle for small boxes)."""
    return op.dense()
