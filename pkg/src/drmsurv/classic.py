"""Single-sample comparator estimators: ECDF, Kaplan-Meier, and the
truncation-adjusted Kaplan-Meier for delayed-entry data."""
from __future__ import annotations

import numpy as np

from .core import ObservedSample, Scheme, SurvivalCurve
from .errors import DataError

__all__ = ["fit_ecdf", "fit_km", "fit_km_ltrc"]


def fit_ecdf(sample: ObservedSample) -> SurvivalCurve:
    """Empirical distribution of a fully observed sample: mass count/n per unique time."""
    if sample.scheme is not Scheme.IID:
        raise DataError(f"fit_ecdf expects scheme IID, got {sample.scheme.value}")
    points, counts = np.unique(sample.times, return_counts=True)
    return SurvivalCurve(points, counts / sample.n)


def _product_limit(points: np.ndarray, deaths: np.ndarray, at_risk: np.ndarray) -> SurvivalCurve:
    with np.errstate(invalid="ignore"):
        factors = 1.0 - deaths / at_risk
    surv = np.cumprod(factors)
    prev = np.concatenate(([1.0], surv[:-1]))
    return SurvivalCurve(points, prev - surv)


def fit_km(sample: ObservedSample) -> SurvivalCurve:
    """Kaplan-Meier product-limit estimator for a right-censored sample.

    Ties between events and censorings at the same time keep the censored
    subjects in the risk set (events precede censorings).  If the largest
    observation is censored the curve is defective.
    """
    if sample.scheme is not Scheme.RC:
        raise DataError(f"fit_km expects scheme RC, got {sample.scheme.value}")
    points = np.unique(sample.event_times)
    if points.size == 0:
        raise DataError("no events: Kaplan-Meier is undefined")
    deaths = np.array([(sample.event_times == t).sum() for t in points], dtype=float)
    at_risk = np.array([(sample.times >= t).sum() for t in points], dtype=float)
    return _product_limit(points, deaths, at_risk)


def fit_km_ltrc(sample: ObservedSample) -> SurvivalCurve:
    """Product-limit estimator with risk sets adjusted for delayed entry.

    The risk set at an event time t is {i : entry_i < t <= time_i}.  Ignores
    any structure in the entry-time distribution, so on LBRC data this is the
    naive comparator that discards the length-bias information.
    """
    if sample.scheme not in (Scheme.LTRC, Scheme.LBRC):
        raise DataError(f"fit_km_ltrc expects scheme LTRC or LBRC, got {sample.scheme.value}")
    points = np.unique(sample.event_times)
    if points.size == 0:
        raise DataError("no events: product-limit estimator is undefined")
    deaths = np.array([(sample.event_times == t).sum() for t in points], dtype=float)
    at_risk = np.array(
        [((sample.entries < t) & (sample.times >= t)).sum() for t in points], dtype=float
    )
    if np.any((at_risk <= 0) & (deaths > 0)):
        raise DataError("nonidentifiable risk set: event time with empty risk set")
    return _product_limit(points, deaths, at_risk)
