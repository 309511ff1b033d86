"""Monte Carlo Lifshitz tails Pr(λ^a(B) ≤ ε) and the singleton-box oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy import integrate, stats

from rwrc_lab.conductance.models import ConductanceField, TailModel
from rwrc_lab.exceptions import ConvergenceError, DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.parallel import ordered_map
from rwrc_lab.spectrum.eigen import principal_eigen
from rwrc_lab.spectrum.operator import assemble, dense_batch
from rwrc_lab.spectrum.semigroup import DEFAULT_DENSE_THRESHOLD
from rwrc_lab.utils.streams import stream

log = structlog.get_logger()

FloatArray = NDArray[np.float64]

LIFSHITZ_STREAM = 2
# Dense batches are capped at this many matrix entries
_BATCH_ENTRIES = 1 << 22


@dataclass(frozen=True)
class LifshitzRow:
    """Empirical tail frequency at one ε.

    Attributes:
        eps: Threshold ε.
        hits: Environments with λ^a(B) ≤ ε.
        trials: Number of environments.
        frequency: hits / trials.
        ci_low: Lower end of the 95% Wilson interval.
        ci_high: Upper end of the 95% Wilson interval.
        predicted_log: −D χ^d(B)^{η+1} ε^{−η}, when χ^d(B) is known.
    """

    eps: float
    hits: int
    trials: int
    frequency: float
    ci_low: float
    ci_high: float
    predicted_log: Optional[float] = None

    @property
    def log_frequency(self) -> float:
        return math.log(self.frequency) if self.hits else -math.inf

    @property
    def log_stderr(self) -> float:
        """Delta-method standard error of log(frequency)."""
        if self.hits == 0:
            return math.inf
        p = self.frequency
        return math.sqrt(max(1.0 - p, 0.0) / (self.trials * p))


@dataclass(frozen=True)
class LifshitzTable:
    """Result of :func:`lifshitz_mc`."""

    model: TailModel
    rows: List[LifshitzRow]
    chi_d: Optional[float]
    eigenvalues: FloatArray = field(repr=False)

    def as_records(self) -> List[dict]:
        return [
            {
                "eps": row.eps,
                "hits": row.hits,
                "trials": row.trials,
                "frequency": row.frequency,
                "ci_low": row.ci_low,
                "ci_high": row.ci_high,
                "log_frequency": row.log_frequency if row.hits else None,
                "log_stderr": row.log_stderr if row.hits else None,
                "predicted_log": row.predicted_log,
            }
            for row in self.rows
        ]


def _chunk_size(box: LatticeBox) -> int:
    return max(1, min(4096, _BATCH_ENTRIES // (box.size * box.size)))


def _chunk_eigenvalues(
    box: LatticeBox,
    model: TailModel,
    seed: int,
    chunk: int,
    count: int,
    dense_threshold: int,
    tol: float,
) -> FloatArray:
    rng = stream(seed, LIFSHITZ_STREAM, chunk)
    weights = model.draw(rng, (count, box.d, *box.halo_shape))
    if box.size <= dense_threshold:
        return np.linalg.eigvalsh(dense_batch(box, weights))[:, 0]
    values = np.empty(count)
    for j in range(count):
        env = ConductanceField(box=box, weights=weights[j], source="sample")
        try:
            values[j] = principal_eigen(assemble(env), tol).eigenvalue
        except ConvergenceError as e:
            values[j] = e.best.eigenvalue
            log.warning("lifshitz_eigen_unconverged", chunk=chunk, env=j, residual=e.residual)
    return values


def lifshitz_mc(
    model: TailModel,
    box: LatticeBox,
    eps_grid: Sequence[float],
    n_env: int,
    seed: int,
    chi_d: Optional[float] = None,
    threads: int = 1,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
    tol: float = 1e-10,
) -> LifshitzTable:
    """Empirical Pr(λ^a(B) ≤ ε) over ``n_env`` i.i.d. environments.

    Environments are drawn in fixed-size chunks from the streams
    ``(seed, 2, chunk)``, so the table does not depend on ``threads``. Every ε
    uses the same eigenvalue sample, so frequencies are monotone in ε.

    Args:
        model: Tail law.
        box: Lattice box.
        eps_grid: Positive thresholds.
        n_env: Number of environments.
        seed: Seed.
        chi_d: χ^d(B) for the companion predictor; omitted when None.
        threads: Worker count over chunks.
        dense_threshold: Largest |B| handled by batched dense eigensolves.
        tol: Eigen tolerance for the iterative path.

    Raises:
        DomainError: If the ε-grid is empty or not positive, or n_env < 1.
    """
    eps_values = [float(e) for e in eps_grid]
    if not eps_values or min(eps_values) <= 0:
        raise DomainError(f"eps grid must be non-empty and positive, got {eps_values}")
    if n_env < 1:
        raise DomainError(f"n_env must be at least 1, got {n_env}")

    size = _chunk_size(box)
    chunks = [(k, min(size, n_env - k * size)) for k in range((n_env + size - 1) // size)]
    parts = ordered_map(
        lambda item: _chunk_eigenvalues(box, model, seed, item[0], item[1], dense_threshold, tol),
        chunks,
        threads,
    )
    eigenvalues = np.concatenate(parts)

    rows = []
    for eps in eps_values:
        hits = int(np.count_nonzero(eigenvalues <= eps))
        ci = stats.binomtest(hits, n_env).proportion_ci(confidence_level=0.95, method="wilson")
        predicted = None
        if chi_d is not None:
            predicted = -model.D * chi_d ** (model.eta + 1.0) * eps ** (-model.eta)
        rows.append(
            LifshitzRow(
                eps=eps,
                hits=hits,
                trials=n_env,
                frequency=hits / n_env,
                ci_low=float(ci.low),
                ci_high=float(ci.high),
                predicted_log=predicted,
            )
        )
    log.info(
        "lifshitz_mc_finished",
        sites=box.size,
        n_env=n_env,
        eps=eps_values,
        hits=[row.hits for row in rows],
    )
    return LifshitzTable(model=model, rows=rows, chi_d=chi_d, eigenvalues=eigenvalues)


def lifshitz_singleton_oracle(model: TailModel, eps: float) -> float:
    """Exact Pr(a_1 + a_2 ≤ ε) for the singleton box in d = 1.

    The capped law has density Dη x^{−η−1} e^{−Dx^{−η}} on (0, M) and an atom
    1 − e^{−DM^{−η}} at M; the convolution with the CDF is integrated by
    adaptive quadrature with the atom's jump as a breakpoint.
    """
    if eps <= 0:
        return 0.0
    eta, D, cap = model.eta, model.D, model.cap

    def density(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return D * eta * x ** (-eta - 1.0) * math.exp(-D * x ** (-eta))

    upper = min(eps, cap)
    points = [eps - cap] if 0.0 < eps - cap < upper else None
    continuous, _ = integrate.quad(
        lambda x: density(x) * float(model.cdf(eps - x)),
        0.0,
        upper,
        points=points,
        limit=200,
        epsabs=1e-14,
        epsrel=1e-12,
    )
    atom = 1.0 - math.exp(-D * cap ** (-eta))
    from_atom = atom * float(model.cdf(eps - cap)) if eps >= cap else 0.0
    return float(continuous + from_atom)
