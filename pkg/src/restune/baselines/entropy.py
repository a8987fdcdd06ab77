"""Greedy entropy search over a discretized scalar parameter space.

The method keeps a Gaussian-process surrogate of parameter -> observation
discrepancy, discretizes the parameter interval into bins, and tracks the
distribution of the discrepancy minimizer's bin implied by posterior
function samples.  Each step queries the bin whose (fantasized) outcome is
expected to shrink that distribution's entropy the most; the running
estimate is the distribution's mode.  The search stops early once the
estimate has been unchanged for two consecutive steps, or when the rollout
budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SimulationError
from ..params import ParamSpace, as_values
from ..sim import Observation
from .common import TraceRecord, observation_mse
from .gp import GpSurrogate

REFIT_EVERY = 5
LS_GRID = (0.05, 0.1, 0.2, 0.4)


@dataclass
class EntropyResult:
    """Outcome of one greedy entropy-search run."""

    best_params: np.ndarray
    best_discrepancy: float
    trace: list
    rollouts_used: int


def _argmin_pmf(gp: GpSurrogate, grid: np.ndarray, n_samples: int, rng) -> np.ndarray:
    samples = gp.sample_functions(grid, n_samples, rng)
    counts = np.bincount(samples.argmin(axis=1), minlength=grid.size)
    return counts / counts.sum()


def _entropy(pmf: np.ndarray) -> float:
    p = pmf[pmf > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_search_tune(
    o_t: Observation,
    simulator,
    initial,
    budget: int,
    bounds: ParamSpace,
    n_bins: int = 50,
    n_posterior: int = 100,
    n_fantasy: int = 5,
    seed: int = 0,
    transform=None,
) -> EntropyResult:
    """Tune a scalar parameter by entropy search; one rollout per step."""
    if bounds.dim != 1:
        raise ValueError("entropy search supports scalar parameters only")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    initial = as_values(initial)
    lo = float(bounds.lo[0])
    width = float(bounds.width[0])
    centers = lo + (np.arange(n_bins) + 0.5) * width / n_bins
    grid = (centers - lo) / width  # GP operates on [0, 1]

    rng = np.random.default_rng(seed)
    gp = GpSurrogate(length_scale=0.1, signal_var=1.0, noise_var=1e-4)
    query = float(bounds.clamp(initial)[0])
    trace: list[TraceRecord] = []
    estimate_bins: list[int] = []
    best_x = np.array([query])
    best_f = np.inf
    rollouts = 0

    for step in range(budget):
        try:
            o_p = simulator(np.array([query]))
        except Exception as e:  # noqa: BLE001 - annotate with rollout index
            raise SimulationError(rollouts, e) from e
        y = observation_mse(o_p, o_t, transform)
        rollouts += 1
        if y < best_f:
            best_f = y
            best_x = np.array([query])
        gp.add_observation((query - lo) / width, y)
        emp_var = float(np.var(gp.y))
        gp.set_signal_var(max(emp_var, 1e-4))
        if step > 0 and step % REFIT_EVERY == 0:
            gp.refit(LS_GRID, [max(emp_var, 1e-4)])

        pmf = _argmin_pmf(gp, grid, n_posterior, rng)
        est_bin = int(np.argmax(pmf))
        estimate_bins.append(est_bin)
        trace.append(TraceRecord(rollouts, np.array([centers[est_bin]]), best_f))
        if len(estimate_bins) >= 3 and estimate_bins[-1] == estimate_bins[-2] == estimate_bins[-3]:
            break
        if rollouts >= budget:
            break

        # Greedy acquisition: expected posterior entropy of the argmin
        # distribution after a fantasized observation at each candidate bin.
        mean, cov = gp.posterior(grid)
        sd = np.sqrt(np.maximum(np.diag(cov), 0.0) + gp.noise_var)
        expected = np.empty(n_bins)
        for c in range(n_bins):
            fantasies = mean[c] + sd[c] * rng.standard_normal(n_fantasy)
            h = 0.0
            for y_f in fantasies:
                gp_f = gp.copy_with(grid[c], y_f)
                h += _entropy(_argmin_pmf(gp_f, grid, n_posterior, rng))
            expected[c] = h / n_fantasy
        query = float(centers[int(np.argmin(expected))])

    final = np.array([centers[estimate_bins[-1]]])
    return EntropyResult(final, best_f, trace, rollouts)
