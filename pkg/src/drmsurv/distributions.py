"""Parametric failure-time laws used as simulation truths."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DataError

__all__ = ["Family", "TrueDistSpec"]


class Family(str, enum.Enum):
    GAMMA = "gamma"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class TrueDistSpec:
    """Gamma-family failure law; exponential is the shape-one special case."""

    family: Family = Family.GAMMA
    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        family = Family(self.family)
        shape = float(self.shape)
        scale = float(self.scale)
        if shape <= 0 or scale <= 0:
            raise DataError("shape and scale must be positive")
        if family is Family.EXPONENTIAL and shape != 1.0:
            raise DataError("exponential requires shape 1")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "scale", scale)

    def _frozen(self):
        return stats.gamma(a=self.shape, scale=self.scale)

    def mean(self) -> float:
        return self.shape * self.scale

    def cdf(self, x) -> np.ndarray:
        return self._frozen().cdf(x)

    def ppf(self, q) -> np.ndarray:
        return self._frozen().ppf(q)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(self.shape, self.scale, size=n)

    def expected_min_with(self, cap: float) -> float:
        """E[min(T, cap)] via the partial-expectation identity for the gamma law."""
        upper = stats.gamma(a=self.shape + 1.0, scale=self.scale).cdf(cap)
        return self.mean() * upper + cap * (1.0 - self._frozen().cdf(cap))
