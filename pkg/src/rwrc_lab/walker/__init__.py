"""Continuous-time random walk, local times and Monte Carlo estimators."""

from rwrc_lab.walker.models import LocalTimeProfile, LocalTimeRecord, TrajectorySample
from rwrc_lab.walker.montecarlo import (
    FeynmanKacEstimate,
    NonExitEstimate,
    exact_feynman_kac,
    exact_nonexit,
    feynman_kac_mc,
    nonexit_mc,
    quenched_decay_rate,
)
from rwrc_lab.walker.simulate import batch_nonexit, batch_walks, jump_table, rescale_local_times, simulate

__all__ = [
    "FeynmanKacEstimate",
    "LocalTimeProfile",
    "LocalTimeRecord",
    "NonExitEstimate",
    "TrajectorySample",
    "batch_nonexit",
    "batch_walks",
    "exact_feynman_kac",
    "exact_nonexit",
    "feynman_kac_mc",
    "jump_table",
    "nonexit_mc",
    "quenched_decay_rate",
    "rescale_local_times",
    "simulate",
]
