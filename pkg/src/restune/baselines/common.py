"""Shared pieces for the comparison methods: trace records and the
observation-discrepancy objective they all minimize."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sim import Observation
from ..tunenet import resample


@dataclass(frozen=True)
class TraceRecord:
    """One per-iteration progress record of a tuning/search method."""

    rollouts: int
    estimate: np.ndarray
    discrepancy: float

    def __post_init__(self):
        object.__setattr__(
            self, "estimate", np.atleast_1d(np.asarray(self.estimate, dtype=np.float64))
        )


def observation_mse(o_a: Observation, o_b: Observation, transform=None) -> float:
    """Mean squared difference between two observations.

    ``o_b`` is linearly resampled to ``o_a``'s length when they differ.
    ``transform``, if given, maps each observation to the flat normalized
    input vector the residual estimator would see, so search methods compare
    observations in exactly that space.
    """
    if o_b.length != o_a.length:
        o_b = resample(o_b, o_a.length)
    if transform is not None:
        a, b = transform(o_a), transform(o_b)
    else:
        if o_a.n_channels != o_b.n_channels:
            raise ValueError("observations must have the same channel count")
        a, b = o_a.channels, o_b.channels
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.mean((a - b) ** 2))
