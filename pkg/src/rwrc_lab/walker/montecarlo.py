"""Monte Carlo estimators of non-exit probabilities and Feynman-Kac functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import structlog
from numpy.typing import NDArray

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.conductance.sampler import AnyModel, sample_field
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.parallel import ordered_map
from rwrc_lab.quadrature import Potential
from rwrc_lab.spectrum.operator import assemble
from rwrc_lab.spectrum.rescaled import discretise_potential
from rwrc_lab.spectrum.semigroup import DEFAULT_DENSE_THRESHOLD, semigroup_apply
from rwrc_lab.utils.streams import derive_seed, stream
from rwrc_lab.walker.simulate import start_index, batch_walks

log = structlog.get_logger()

ENV_STREAM = 6
MC_WALK_STREAM = 7
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class NonExitEstimate:
    """Two-level Monte Carlo estimate of ⟨P_0^a(supp ℓ_t ⊂ B)⟩.

    Attributes:
        estimate: Mean over environments of the per-environment survival frequency.
        ci_low: Lower end of the 95% interval.
        ci_high: Upper end of the 95% interval.
        stderr: Standard error at the environment level.
        n_env: Number of environments.
        n_walks: Walks per environment.
        n_exit: Total number of walks that left the box.
        one_sided: True when no walk survived; the interval is then [0, ci_high].
        per_env: Survival frequency of every environment.
    """

    estimate: float
    ci_low: float
    ci_high: float
    stderr: float
    n_env: int
    n_walks: int
    n_exit: int
    one_sided: bool = False
    per_env: List[float] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        values = np.asarray(self.per_env)
        return {
            "estimate": self.estimate,
            "ci": [self.ci_low, self.ci_high],
            "n_exit": self.n_exit,
            "one_sided": self.one_sided,
            "per_env_summary": {
                "min": float(values.min()) if values.size else None,
                "max": float(values.max()) if values.size else None,
                "mean": float(values.mean()) if values.size else None,
                "zero_envs": int(np.count_nonzero(values == 0)),
            },
        }


@dataclass(frozen=True)
class FeynmanKacEstimate:
    """Monte Carlo estimate of E_0[exp(−α^{−2} Σ_z V_t(z) ℓ_t(z)); stay in B]."""

    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    n_walks: int
    survivors: int


def nonexit_mc(
    model: AnyModel,
    box: LatticeBox,
    horizon: float,
    n_env: int,
    n_walks: int,
    seed: int,
    start: Optional[Sequence[int]] = None,
    threads: int = 1,
) -> NonExitEstimate:
    """Annealed non-exit probability by averaging quenched survival frequencies.

    Environment ``k`` is sampled with seed ``derive_seed(seed, 6, k)`` and its
    walks use the stream ``(seed, 7, k)``; environments run on the worker pool
    and are reduced in index order.

    Raises:
        DomainError: If n_env or n_walks is below 1, or horizon is negative.
    """
    if n_env < 1 or n_walks < 1:
        raise DomainError(f"n_env and n_walks must be at least 1, got {n_env}, {n_walks}")
    if horizon < 0:
        raise DomainError(f"horizon must be non-negative, got {horizon}")
    if horizon == 0:
        return NonExitEstimate(1.0, 1.0, 1.0, 0.0, n_env, n_walks, 0, per_env=[1.0] * n_env)

    def one_environment(k: int) -> int:
        env = sample_field(box, model, derive_seed(seed, ENV_STREAM, k))
        alive, _ = batch_walks(env, start, horizon, n_walks, stream(seed, MC_WALK_STREAM, k))
        return int(alive.sum())

    survivors = np.asarray(ordered_map(one_environment, range(n_env), threads), dtype=float)
    freqs = survivors / n_walks
    total = n_env * n_walks
    n_exit = int(total - survivors.sum())
    mean = float(freqs.mean())

    if survivors.sum() == 0:
        # exact one-sided 95% bound for zero successes among all walks
        upper = 1.0 - 0.05 ** (1.0 / total)
        log.warning("nonexit_no_survivors", n_env=n_env, n_walks=n_walks, horizon=horizon)
        return NonExitEstimate(
            0.0, 0.0, upper, 0.0, n_env, n_walks, n_exit, one_sided=True, per_env=freqs.tolist()
        )

    if n_env > 1:
        stderr = float(freqs.std(ddof=1) / math.sqrt(n_env))
    else:
        stderr = math.sqrt(mean * (1.0 - mean) / n_walks)
    result = NonExitEstimate(
        estimate=mean,
        ci_low=max(0.0, mean - Z_95 * stderr),
        ci_high=min(1.0, mean + Z_95 * stderr),
        stderr=stderr,
        n_env=n_env,
        n_walks=n_walks,
        n_exit=n_exit,
        per_env=freqs.tolist(),
    )
    log.info(
        "nonexit_mc_finished",
        sites=box.size,
        horizon=horizon,
        n_env=n_env,
        n_walks=n_walks,
        estimate=mean,
        stderr=stderr,
    )
    return result


def feynman_kac_mc(
    field: ConductanceField,
    V: Union[None, float, Potential],
    horizon: float,
    n_walks: int,
    seed: int,
    start: Optional[Sequence[int]] = None,
    box: Optional[LatticeBox] = None,
) -> FeynmanKacEstimate:
    """Estimate E_0[exp{−(t/α²) ∫_G V L_t}; walk stays in B].

    With L_t the rescaled local time, the exponent equals
    −α^{−2} Σ_z V_t(z) ℓ_t(z), V_t being the cell average of V.

    Raises:
        DomainError: If ``box`` differs from the field's box.
    """
    box = box or field.box
    if box != field.box:
        raise DomainError("field and box differ")
    potential = discretise_potential(V, box)
    if potential is None:
        potential = np.zeros(box.size)
    rng = stream(seed, MC_WALK_STREAM, 0)
    alive, integral = batch_walks(field, start, horizon, n_walks, rng, potential=potential)
    samples = np.where(alive, np.exp(-integral / box.alpha**2), 0.0)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(n_walks)) if n_walks > 1 else 0.0
    return FeynmanKacEstimate(
        estimate=mean,
        stderr=stderr,
        ci_low=mean - Z_95 * stderr,
        ci_high=mean + Z_95 * stderr,
        n_walks=n_walks,
        survivors=int(alive.sum()),
    )


def exact_feynman_kac(
    field: ConductanceField,
    V: Union[None, float, Potential],
    horizon: float,
    start: Optional[Sequence[int]] = None,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
) -> float:
    """(exp{t(Δ^a − α^{−2}V_t)} 1)(start), the quenched oracle for :func:`feynman_kac_mc`."""
    box = field.box
    potential = discretise_potential(V, box)
    if potential is not None:
        potential = potential / box.alpha**2
    op = assemble(field, box, potential)
    values = semigroup_apply(op, horizon, np.ones(box.size), dense_threshold=dense_threshold)
    return float(values[start_index(field, start)])


def exact_nonexit(
    field: ConductanceField,
    start: Optional[Sequence[int]],
    horizon: float,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
) -> float:
    """Quenched P_start^a(walk stays in B up to ``horizon``) = (e^{tΔ^a} 1)(start)."""
    return exact_feynman_kac(field, None, horizon, start, dense_threshold)


def quenched_decay_rate(
    field: ConductanceField,
    start: Optional[Sequence[int]],
    horizon: float,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
) -> float:
    """−(1/t) log P_start^a(stay in B up to t); tends to λ^a(B) as t grows.

    Raises:
        DomainError: If horizon is not positive.
    """
    if horizon <= 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    return -math.log(exact_nonexit(field, start, horizon, dense_threshold)) / horizon
