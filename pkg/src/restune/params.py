"""Bounded parameter spaces.

Physical parameters are plain 1-D float arrays; a :class:`ParamSpace` carries
the per-dimension bounds used for clamping iterative estimates and for
normalising parameter values to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ParamSpace:
    """Per-dimension closed bounds for a parameter vector."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must have the same shape")
        if np.any(hi <= lo):
            raise ValueError("bounds must satisfy lo < hi in every dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def clamp(self, values) -> np.ndarray:
        return np.clip(np.atleast_1d(np.asarray(values, dtype=float)), self.lo, self.hi)

    def contains(self, values) -> bool:
        v = np.atleast_1d(np.asarray(values, dtype=float))
        return bool(np.all(v >= self.lo) and np.all(v <= self.hi))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class ParamVector:
    """Physical parameter values paired with the bounds they live in."""

    values: np.ndarray
    space: ParamSpace

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.shape != self.space.lo.shape:
            raise ValueError("values and space dimensions differ")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size

    def clamped(self) -> "ParamVector":
        return ParamVector(self.space.clamp(self.values), self.space)

    def normalized(self) -> np.ndarray:
        return (self.values - self.space.lo) / self.space.width

    def shifted(self, delta) -> "ParamVector":
        """Apply a residual update and clamp back into bounds."""
        return ParamVector(self.space.clamp(self.values + np.asarray(delta, dtype=float)), self.space)


def as_values(x) -> np.ndarray:
    """Accept a ParamVector or any array-like; return a 1-D float array."""
    return np.atleast_1d(np.asarray(getattr(x, "values", x), dtype=float))


def scalar_space(lo: float, hi: float) -> ParamSpace:
    return ParamSpace(np.array([lo]), np.array([hi]))
