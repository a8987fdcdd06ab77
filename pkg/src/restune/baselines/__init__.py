"""Comparison methods: constant-mean prediction, direct one-shot network
prediction, CMA-ES, and greedy entropy search over a GP surrogate."""

from __future__ import annotations

import numpy as np

from ..params import as_values
from .cmaes import CmaEs, CmaResult, EsState, cmaes_tune
from .common import TraceRecord, observation_mse
from .direct import DirectModel, direct_predict, direct_predict_train, load_direct, save_direct
from .entropy import EntropyResult, entropy_search_tune
from .gp import GpNumericalError, GpSurrogate


def mean_baseline(test_targets) -> np.ndarray:
    """Componentwise arithmetic mean of the test targets."""
    targets = [as_values(t) for t in test_targets]
    if not targets:
        raise ValueError("mean_baseline needs at least one target")
    return np.mean(np.stack(targets), axis=0)


__all__ = [
    "CmaEs",
    "CmaResult",
    "DirectModel",
    "EntropyResult",
    "EsState",
    "GpNumericalError",
    "GpSurrogate",
    "TraceRecord",
    "cmaes_tune",
    "direct_predict",
    "direct_predict_train",
    "entropy_search_tune",
    "load_direct",
    "mean_baseline",
    "observation_mse",
    "save_direct",
]
