"""Environment events {β·a ∈ A(B, φ_t, δ)} and their probability bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import structlog

from rwrc_lab.conductance.models import ConductanceField, TailModel
from rwrc_lab.conductance.sampler import draw_conductances
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox
from rwrc_lab.quadrature import Profile, as_profile, box_integral

log = structlog.get_logger()

_EVENT_KEY = 3


@dataclass(frozen=True)
class EventFrequency:
    """Monte Carlo frequency of the profile event.

    Attributes:
        hits: Number of environments in the event.
        trials: Number of sampled environments.
        frequency: hits / trials.
        stderr: Binomial standard error.
        log_rate: log(frequency) / (β^η α^d), or -inf without hits.
        exact: Exact probability for i.i.d. tail laws.
        exact_log_rate: log(exact) / (β^η α^d).
    """

    hits: int
    trials: int
    frequency: float
    stderr: float
    log_rate: float
    exact: float
    exact_log_rate: float


def _check_delta(phi_t: ConductanceField, delta: float) -> np.ndarray:
    values = phi_t.touching_weights()
    floor = float(values.min())
    if delta >= floor:
        raise DomainError(
            f"delta={delta} must be smaller than min φ_t={floor}",
            hint="Use e.g. delta = 0.5 * min(phi_t).",
        )
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return values


def profile_event_check(
    field: ConductanceField,
    beta: float,
    phi_t: ConductanceField,
    delta: float,
) -> bool:
    """True iff φ_t(z,e) − δ ≤ β·a(z,e) ≤ φ_t(z,e) on every edge touching the box.

    Raises:
        DomainError: If δ ≥ min φ_t or the boxes differ.
    """
    if field.box != phi_t.box:
        raise DomainError("field and profile live on different boxes")
    upper = _check_delta(phi_t, delta)
    scaled = beta * field.touching_weights()
    return bool(np.all((upper - delta <= scaled) & (scaled <= upper)))


def profile_event_logprob_bound(
    phi: Union[float, Profile],
    eta: float,
    D: float,
    G: Sequence[Tuple[float, float]],
) -> float:
    """The lower bound −D Σ_e ∫_G φ(y,e)^{−η} dy on the normalised log-probability."""
    profile = as_profile(phi)
    lower = [iv[0] for iv in G]
    upper = [iv[1] for iv in G]
    panels = max(8, 256 // 4 ** (len(G) - 1))
    total = 0.0
    for axis in range(len(G)):
        total += box_integral(
            lambda y, i=axis: np.asarray(profile(y, i), dtype=float) ** (-eta),
            lower,
            upper,
            panels=panels,
        )
    return -D * total


def event_probability_mc(
    box: LatticeBox,
    model: TailModel,
    beta: float,
    phi_t: ConductanceField,
    delta: float,
    n: int,
    seed: int,
    batch: int = 100_000,
) -> EventFrequency:
    """Estimate Pr(β·a ∈ A(B, φ_t, δ)) by sampling the touching edges only.

    The event involves only edges with an endpoint in the box, so each trial
    draws exactly those conductances. The exact i.i.d. product probability is
    reported alongside as an oracle.
    """
    if phi_t.box != box:
        raise DomainError("profile lives on a different box")
    upper = _check_delta(phi_t, delta)
    lower = upper - delta
    hits = 0
    done = 0
    chunk = 0
    while done < n:
        size = min(batch, n - done)
        a = draw_conductances(model, (size, upper.size), seed, _EVENT_KEY, chunk)
        scaled = beta * a
        hits += int(np.sum(np.all((lower <= scaled) & (scaled <= upper), axis=1)))
        done += size
        chunk += 1

    freq = hits / n
    stderr = math.sqrt(max(freq * (1.0 - freq), 0.0) / n)
    normaliser = beta**model.eta * box.alpha**box.d
    exact = float(np.prod(model.cdf(upper / beta) - model.cdf(lower / beta)))
    result = EventFrequency(
        hits=hits,
        trials=n,
        frequency=freq,
        stderr=stderr,
        log_rate=math.log(freq) / normaliser if hits else -math.inf,
        exact=exact,
        exact_log_rate=math.log(exact) / normaliser if exact > 0 else -math.inf,
    )
    log.info(
        "profile_event_estimated",
        hits=hits,
        trials=n,
        frequency=freq,
        exact=exact,
    )
    return result
