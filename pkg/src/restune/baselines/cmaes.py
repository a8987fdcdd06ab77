"""Covariance matrix adaptation evolution strategy, (mu/mu_w, lambda) form.

A compact in-repo implementation of the standard update equations: rank-mu
and rank-one covariance updates, cumulative step-size adaptation, and
recombination of the best half of each population with log-linear weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SimulationError
from ..params import ParamSpace, as_values
from ..sim import Observation
from .common import TraceRecord, observation_mse


@dataclass
class EsState:
    """Mutable state of one evolution-strategy run."""

    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    p_sigma: np.ndarray
    p_cov: np.ndarray
    pop_size: int
    generation: int = 0


class CmaEs:
    """Minimize a black-box function by sampling, ranking, and adapting.

    Usage: repeatedly call :meth:`ask` for a population, evaluate it, and
    feed the fitness values to :meth:`tell`.  ``best`` tracks the best
    point seen across all evaluations.
    """

    def __init__(self, initial_mean, sigma0: float, pop_size: int = 10, seed: int = 0, cov0=None):
        mean = np.atleast_1d(np.asarray(initial_mean, dtype=np.float64))
        n = mean.size
        if pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        cov = np.eye(n) if cov0 is None else np.asarray(cov0, dtype=np.float64).copy()
        self.state = EsState(
            mean=mean.copy(),
            sigma=float(sigma0),
            cov=cov,
            p_sigma=np.zeros(n),
            p_cov=np.zeros(n),
            pop_size=pop_size,
        )
        self.n = n
        self.mu = pop_size // 2
        w = np.log((pop_size + 1) / 2.0) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mu_eff = 1.0 / np.sum(self.weights**2)
        self.c_sigma = (self.mu_eff + 2.0) / (n + self.mu_eff + 5.0)
        self.d_sigma = (
            1.0
            + 2.0 * max(0.0, np.sqrt((self.mu_eff - 1.0) / (n + 1.0)) - 1.0)
            + self.c_sigma
        )
        self.c_c = (4.0 + self.mu_eff / n) / (n + 4.0 + 2.0 * self.mu_eff / n)
        self.c_1 = 2.0 / ((n + 1.3) ** 2 + self.mu_eff)
        self.c_mu = min(
            1.0 - self.c_1,
            2.0 * (self.mu_eff - 2.0 + 1.0 / self.mu_eff) / ((n + 2.0) ** 2 + self.mu_eff),
        )
        self.chi_n = np.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
        self._rng = np.random.default_rng(seed)
        self._eig_b = None
        self._eig_d = None
        self.best_x = mean.copy()
        self.best_f = np.inf
        self._evals = 0

    def _decompose(self):
        cov = (self.state.cov + self.state.cov.T) / 2.0
        vals, vecs = np.linalg.eigh(cov)
        vals = np.maximum(vals, 1e-30)
        self._eig_b = vecs
        self._eig_d = np.sqrt(vals)

    def ask(self) -> np.ndarray:
        """Sample one population, shape (pop_size, n)."""
        self._decompose()
        z = self._rng.standard_normal((self.state.pop_size, self.n))
        y = z * self._eig_d @ self._eig_b.T
        return self.state.mean + self.state.sigma * y

    def tell(self, xs: np.ndarray, fitnesses) -> None:
        """Rank the evaluated population and apply the standard updates."""
        s = self.state
        xs = np.asarray(xs, dtype=np.float64)
        fs = np.asarray(fitnesses, dtype=np.float64)
        if xs.shape != (s.pop_size, self.n) or fs.shape != (s.pop_size,):
            raise ValueError("population shape does not match this optimizer")
        order = np.argsort(fs)
        i_best = order[0]
        self._evals += s.pop_size
        if fs[i_best] < self.best_f:
            self.best_f = float(fs[i_best])
            self.best_x = xs[i_best].copy()

        sel = xs[order[: self.mu]]
        y_sel = (sel - s.mean) / s.sigma
        y_w = self.weights @ y_sel
        s.mean = s.mean + s.sigma * y_w

        inv_sqrt = self._eig_b * (1.0 / self._eig_d) @ self._eig_b.T
        s.p_sigma = (1.0 - self.c_sigma) * s.p_sigma + np.sqrt(
            self.c_sigma * (2.0 - self.c_sigma) * self.mu_eff
        ) * (inv_sqrt @ y_w)
        s.generation += 1
        ps_norm = np.linalg.norm(s.p_sigma)
        denom = np.sqrt(1.0 - (1.0 - self.c_sigma) ** (2 * s.generation))
        h_sigma = ps_norm / denom < (1.4 + 2.0 / (self.n + 1.0)) * self.chi_n
        s.p_cov = (1.0 - self.c_c) * s.p_cov + h_sigma * np.sqrt(
            self.c_c * (2.0 - self.c_c) * self.mu_eff
        ) * y_w

        rank_mu = (self.weights[:, None] * y_sel).T @ y_sel
        delta_h = (1.0 - h_sigma) * self.c_c * (2.0 - self.c_c)
        s.cov = (
            (1.0 - self.c_1 - self.c_mu) * s.cov
            + self.c_1 * (np.outer(s.p_cov, s.p_cov) + delta_h * s.cov)
            + self.c_mu * rank_mu
        )
        s.cov = (s.cov + s.cov.T) / 2.0
        s.sigma = s.sigma * np.exp((self.c_sigma / self.d_sigma) * (ps_norm / self.chi_n - 1.0))

    def spread(self) -> float:
        """Largest standard deviation of the search distribution."""
        return self.state.sigma * np.sqrt(
            float(np.max(np.linalg.eigvalsh((self.state.cov + self.state.cov.T) / 2.0)))
        )


@dataclass
class CmaResult:
    """Outcome of a simulator-in-the-loop CMA-ES run."""

    best_params: np.ndarray
    best_discrepancy: float
    trace: list
    rollouts_used: int


def cmaes_tune(
    o_t: Observation,
    simulator,
    initial,
    budget: int,
    bounds: ParamSpace,
    pop_size: int = 10,
    tol: float = 0.1,
    seed: int = 0,
    transform=None,
) -> CmaResult:
    """Fit simulator parameters to a target observation with CMA-ES.

    Each generation costs exactly ``pop_size`` simulator rollouts; the run
    stops when the search spread (largest standard deviation of the sampling
    distribution, in parameter units) falls below ``tol`` or the rollout
    budget cannot fund another full generation.
    Candidates are clamped into ``bounds`` before evaluation; the best
    clamped candidate ever evaluated is returned.
    """
    if budget < pop_size:
        raise ValueError(f"budget {budget} is less than one generation ({pop_size})")
    initial = as_values(initial)
    width = bounds.width
    scale = float(np.max(width))
    es = CmaEs(
        initial,
        sigma0=0.3 * scale,
        pop_size=pop_size,
        seed=seed,
        cov0=np.diag((width / scale) ** 2),
    )
    best_x = bounds.clamp(initial)
    best_f = np.inf
    trace: list[TraceRecord] = []
    rollouts = 0
    while rollouts + pop_size <= budget:
        xs = es.ask()
        fs = np.empty(es.state.pop_size)
        for i, x in enumerate(xs):
            candidate = bounds.clamp(x)
            try:
                o_p = simulator(candidate)
            except Exception as e:  # noqa: BLE001 - annotate with rollout index
                raise SimulationError(rollouts + i, e) from e
            fs[i] = observation_mse(o_p, o_t, transform)
            if fs[i] < best_f:
                best_f = float(fs[i])
                best_x = candidate.copy()
        rollouts += es.state.pop_size
        es.tell(xs, fs)
        trace.append(TraceRecord(rollouts, best_x, best_f))
        if es.spread() < tol:
            break
    return CmaResult(best_x, best_f, trace, rollouts)
