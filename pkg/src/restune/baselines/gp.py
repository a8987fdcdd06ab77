"""Gaussian-process regression with an RBF kernel, for 1-D surrogates.

Supports exact posterior inference, joint posterior function sampling over a
grid, and marginal-likelihood grid search over hyperparameters.  Numerical
trouble in the Cholesky factorization is handled by escalating diagonal
jitter; if that fails the error is raised rather than masked.
"""

from __future__ import annotations

import numpy as np


class GpNumericalError(RuntimeError):
    """Kernel matrix stayed non-positive-definite after jitter escalation."""


def _chol_with_jitter(k: np.ndarray, jitter0: float = 1e-10, max_jitter: float = 1e-2):
    jitter = jitter0
    while jitter <= max_jitter:
        try:
            return np.linalg.cholesky(k + jitter * np.eye(k.shape[0])), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise GpNumericalError(
        f"kernel matrix not positive definite even with jitter {max_jitter}"
    )


class GpSurrogate:
    """RBF-kernel GP over scalar inputs with fixed observation noise.

    The prior mean is the empirical mean of the observations (zero before
    any data), so the posterior reverts to the average observed value far
    from the data instead of to an arbitrary constant — important when the
    targets are non-negative discrepancies.
    """

    def __init__(self, length_scale: float, signal_var: float, noise_var: float = 1e-4):
        if length_scale <= 0 or signal_var <= 0 or noise_var < 0:
            raise ValueError("hyperparameters must be positive (noise >= 0)")
        self.length_scale = float(length_scale)
        self.signal_var = float(signal_var)
        self.noise_var = float(noise_var)
        self.x = np.empty(0)
        self.y = np.empty(0)
        self._chol = None
        self._alpha = None
        self._jitter = 0.0

    @property
    def n_observations(self) -> int:
        return self.x.size

    def _kernel(self, a: np.ndarray, b: np.ndarray, length_scale=None, signal_var=None):
        ls = self.length_scale if length_scale is None else length_scale
        sv = self.signal_var if signal_var is None else signal_var
        d = a[:, None] - b[None, :]
        return sv * np.exp(-0.5 * (d / ls) ** 2)

    def _invalidate(self):
        self._chol = None
        self._alpha = None

    def add_observation(self, x: float, y: float) -> None:
        self.x = np.append(self.x, float(x))
        self.y = np.append(self.y, float(y))
        self._invalidate()

    def set_signal_var(self, signal_var: float) -> None:
        if signal_var <= 0:
            raise ValueError("signal_var must be positive")
        self.signal_var = float(signal_var)
        self._invalidate()

    def copy_with(self, x: float, y: float) -> "GpSurrogate":
        """A new surrogate with one extra observation (for lookahead)."""
        gp = GpSurrogate(self.length_scale, self.signal_var, self.noise_var)
        gp.x = np.append(self.x, float(x))
        gp.y = np.append(self.y, float(y))
        return gp

    @property
    def prior_mean(self) -> float:
        return float(self.y.mean()) if self.y.size else 0.0

    def _factorize(self):
        if self._chol is None:
            k = self._kernel(self.x, self.x) + self.noise_var * np.eye(self.x.size)
            self._chol, self._jitter = _chol_with_jitter(k)
            self._alpha = np.linalg.solve(
                self._chol.T, np.linalg.solve(self._chol, self.y - self.prior_mean)
            )
        return self._chol, self._alpha

    def posterior(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Joint posterior (mean, covariance) at the query points."""
        xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
        k_ss = self._kernel(xs, xs)
        if self.x.size == 0:
            return np.zeros(xs.size), k_ss
        chol, alpha = self._factorize()
        k_s = self._kernel(self.x, xs)
        mean = self.prior_mean + k_s.T @ alpha
        v = np.linalg.solve(chol, k_s)
        cov = k_ss - v.T @ v
        return mean, cov

    def sample_functions(self, xs, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        """Draw joint posterior sample functions; shape (n_samples, len(xs))."""
        mean, cov = self.posterior(xs)
        chol, _ = _chol_with_jitter((cov + cov.T) / 2.0)
        z = rng.standard_normal((n_samples, mean.size))
        return mean + z @ chol.T

    def log_marginal_likelihood(self, length_scale=None, signal_var=None) -> float:
        """Data log-likelihood under the given (or current) hyperparameters."""
        if self.x.size == 0:
            return 0.0
        k = self._kernel(self.x, self.x, length_scale, signal_var) + self.noise_var * np.eye(
            self.x.size
        )
        chol, _ = _chol_with_jitter(k)
        resid = self.y - self.prior_mean
        alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, resid))
        return float(
            -0.5 * resid @ alpha
            - np.sum(np.log(np.diag(chol)))
            - 0.5 * self.x.size * np.log(2.0 * np.pi)
        )

    def refit(self, length_scales, signal_vars) -> None:
        """Pick the hyperparameter pair maximizing marginal likelihood."""
        best = (self.length_scale, self.signal_var)
        best_lml = -np.inf
        for ls in length_scales:
            for sv in signal_vars:
                lml = self.log_marginal_likelihood(ls, sv)
                if lml > best_lml:
                    best_lml = lml
                    best = (float(ls), float(sv))
        self.length_scale, self.signal_var = best
        self._invalidate()
