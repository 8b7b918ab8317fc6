"""Kolmogorov-Smirnov distance against a known truth over a fixed evaluation grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SurvivalCurve
from .distributions import TrueDistSpec
from .errors import DataError

__all__ = ["EvalGrid", "make_eval_grid", "ks_distance"]


@dataclass(frozen=True)
class EvalGrid:
    """Increasing positive evaluation points covering a target law's support."""

    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float).reshape(-1).copy()
        if points.size == 0:
            raise DataError("evaluation grid must be nonempty")
        if np.any(np.diff(points) <= 0) or np.any(points <= 0):
            raise DataError("evaluation points must be strictly increasing and positive")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)


def make_eval_grid(dist: TrueDistSpec, n_points: int = 200) -> EvalGrid:
    """Quantiles of the true law at probabilities evenly spaced on [0.005, 0.995].

    Depends only on the law, never on sample data, so every estimator in a
    comparison is scored on the same points.
    """
    if n_points < 2:
        raise DataError("n_points must be at least 2")
    probs = np.linspace(0.005, 0.995, n_points)
    return EvalGrid(dist.ppf(probs))


def ks_distance(curve: SurvivalCurve, truth: TrueDistSpec, grid: EvalGrid) -> float:
    """max over the grid of |F_hat(x) - F(x)|, with F_hat = 1 - S(x).

    Defective curves are compared as-is (their F_hat plateaus below one).
    """
    fhat = 1.0 - np.asarray(curve.survival(grid.points))
    return float(np.abs(fhat - truth.cdf(grid.points)).max())
