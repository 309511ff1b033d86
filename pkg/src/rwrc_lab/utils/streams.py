"""Counter-based random streams keyed by integer tuples."""

from __future__ import annotations

import numpy as np

from rwrc_lab.exceptions import DomainError


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Philox generator for the stream identified by ``(seed, *keys)``.

    Distinct key tuples give statistically independent streams, and the same
    tuple always reproduces the same draws.

    Raises:
        DomainError: If the seed or a key is negative.
    """
    entropy = [int(seed), *(int(k) for k in keys)]
    if any(k < 0 for k in entropy):
        raise DomainError(f"Seeds and stream keys must be non-negative, got {entropy}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the sub-experiment ``(seed, *keys)``.

    Used where an API takes a plain seed (e.g. one field per environment index).
    """
    entropy = [int(seed), *(int(k) for k in keys)]
    if any(k < 0 for k in entropy):
        raise DomainError(f"Seeds and stream keys must be non-negative, got {entropy}")
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
