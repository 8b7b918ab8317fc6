"""Core data structures: observed samples, support grids, step survival curves,
and tilt basis functions.

All types are immutable after construction (arrays are frozen), so instances can
be shared freely across threads and worker processes.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError

__all__ = [
    "Scheme",
    "ObservedSample",
    "TimeGrid",
    "DiscreteDistribution",
    "SurvivalCurve",
    "BasisSpec",
    "TabulatedComponent",
    "DrmParams",
    "build_time_grid",
]


class Scheme(str, enum.Enum):
    """Sampling scheme of one data arm."""

    IID = "IID"
    RC = "RC"
    LTRC = "LTRC"
    LBRC = "LBRC"


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ObservedSample:
    """One arm of failure-time data.

    times    observed times (event or censoring), strictly positive
    status   1 = event observed, 0 = right-censored
    scheme   sampling scheme tag; LTRC/LBRC require entry times
    entries  delayed-entry (truncation) times, strictly below the observed times
    """

    times: np.ndarray
    status: np.ndarray
    scheme: Scheme = Scheme.RC
    entries: np.ndarray | None = None

    def __post_init__(self):
        times = _frozen(self.times)
        status = _frozen(self.status, dtype=int)
        scheme = Scheme(self.scheme)
        if times.size < 1:
            raise DataError("sample must contain at least one observation")
        if status.size != times.size:
            raise DataError("times and status must have equal length")
        if not np.all(np.isfinite(times)) or np.any(times <= 0):
            raise DataError("times must be finite and strictly positive")
        if not np.all((status == 0) | (status == 1)):
            raise DataError("status must contain only 0 (censored) and 1 (event)")

        entries = self.entries
        if scheme in (Scheme.LTRC, Scheme.LBRC):
            if entries is None:
                raise DataError(f"scheme {scheme.value} requires entry times")
            entries = _frozen(entries)
            if entries.size != times.size:
                raise DataError("entries must match times in length")
            if not np.all(np.isfinite(entries)) or np.any(entries < 0):
                raise DataError("entries must be finite and nonnegative")
            if np.any(entries >= times):
                raise DataError("entries must be strictly below the observed times")
        else:
            if entries is not None:
                raise DataError(f"scheme {scheme.value} does not take entry times")
            if scheme is Scheme.IID and np.any(status == 0):
                raise DataError("scheme IID requires all observations to be events")

        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def event_times(self) -> np.ndarray:
        return self.times[self.status == 1]

    @property
    def censored_times(self) -> np.ndarray:
        return self.times[self.status == 0]


@dataclass(frozen=True)
class TimeGrid:
    """Ordered unique support points with per-arm event/censoring tallies.

    Points collect the event times of the right-censored arm together with all
    observed times (events and censorings) of the length-biased arm; censoring
    in that arm is informative, so censoring times carry probability mass.
    Right-censored-arm censoring times are deliberately not support points; they
    only enter estimation through order comparisons against the grid.
    """

    points: np.ndarray
    rc_event_counts: np.ndarray
    rc_cens_counts: np.ndarray
    lb_event_counts: np.ndarray
    lb_cens_counts: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points)
        if points.size < 1:
            raise DataError("no support points")
        if np.any(np.diff(points) <= 0):
            raise DataError("grid points must be strictly increasing")
        if np.any(points <= 0):
            raise DataError("grid points must be strictly positive")
        object.__setattr__(self, "points", points)
        for name in ("rc_event_counts", "rc_cens_counts", "lb_event_counts", "lb_cens_counts"):
            counts = _frozen(getattr(self, name), dtype=int)
            if counts.size != points.size:
                raise DataError(f"{name} must align with grid points")
            if np.any(counts < 0):
                raise DataError(f"{name} must be nonnegative")
            object.__setattr__(self, name, counts)

    @property
    def k(self) -> int:
        return int(self.points.size)


def _counts_at(points: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Number of entries of `times` equal to each grid point (exact matches)."""
    counts = np.zeros(points.size, dtype=int)
    if times.size:
        idx = np.searchsorted(points, times)
        ok = (idx < points.size) & (points[np.minimum(idx, points.size - 1)] == times)
        counts += np.bincount(idx[ok], minlength=points.size)
    return counts


def build_time_grid(rc: ObservedSample | None = None,
                    lbrc: ObservedSample | None = None) -> TimeGrid:
    """Combined support grid for joint fits.

    The grid is the sorted union of the RC arm's event times and every observed
    time of the LBRC arm.  Ties across arms share a single point and accumulate
    in the per-arm counts.  Times are compared exactly; no fuzzy matching.
    """
    if rc is None and lbrc is None:
        raise DataError("no support points: both arms empty")
    if rc is not None and rc.scheme not in (Scheme.RC, Scheme.IID):
        raise DataError(f"rc slot expects an RC or IID sample, got {rc.scheme.value}")
    if lbrc is not None and lbrc.scheme is not Scheme.LBRC:
        raise DataError(f"lbrc slot expects an LBRC sample, got {lbrc.scheme.value}")

    pieces = []
    if rc is not None:
        pieces.append(rc.event_times)
    if lbrc is not None:
        pieces.append(lbrc.times)
    merged = np.concatenate(pieces) if pieces else np.empty(0)
    points = np.unique(merged)
    if points.size == 0:
        raise DataError("no support points")

    zeros = np.zeros(points.size, dtype=int)
    rc_ev = _counts_at(points, rc.event_times) if rc is not None else zeros
    rc_ce = _counts_at(points, rc.censored_times) if rc is not None else zeros
    lb_ev = _counts_at(points, lbrc.event_times) if lbrc is not None else zeros
    lb_ce = _counts_at(points, lbrc.censored_times) if lbrc is not None else zeros
    return TimeGrid(points, rc_ev, rc_ce, lb_ev, lb_ce)


@dataclass(frozen=True)
class SurvivalCurve:
    """Right-continuous step survival function defined by jump masses.

    S(x) = 1 - sum of masses at points <= x.  Masses may total less than one
    (a defective curve, e.g. Kaplan-Meier with the largest time censored); the
    missing mass sits beyond the last point and the curve plateaus there.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points)
        masses = _frozen(self.masses)
        if points.size != masses.size or points.size < 1:
            raise DataError("points and masses must be nonempty and aligned")
        if np.any(np.diff(points) <= 0):
            raise DataError("points must be strictly increasing")
        if np.any(masses < -1e-12):
            raise DataError("masses must be nonnegative")
        masses = _frozen(np.maximum(masses, 0.0))
        if masses.sum() > 1 + 1e-8:
            raise DataError("masses must not exceed total probability one")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses)
        cum = np.cumsum(masses)
        cum.setflags(write=False)
        object.__setattr__(self, "_cum", cum)

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    def survival(self, x) -> np.ndarray | float:
        """S(x) for scalar or array x >= 0; right-continuous in x."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs < 0):
            raise DomainError("survival is defined for x >= 0")
        idx = np.searchsorted(self.points, xs, side="right")
        cum = np.concatenate(([0.0], self._cum))
        out = 1.0 - cum[idx]
        return float(out) if np.isscalar(x) or xs.ndim == 0 else out

    def cdf(self, x) -> np.ndarray | float:
        s = self.survival(x)
        return 1.0 - s

    def quantile(self, q: float) -> float:
        """Smallest support point whose cumulative mass reaches q (0 < q < 1)."""
        if not 0 < q < 1:
            raise DomainError("quantile level must lie strictly between 0 and 1")
        # tiny slack absorbs float rounding in the cumulative sums
        j = int(np.searchsorted(self._cum, q - 1e-12, side="left"))
        if j >= self.points.size:
            raise DomainError("quantile beyond support of a defective curve")
        return float(self.points[j])


@dataclass(frozen=True)
class DiscreteDistribution:
    """Proper probability masses on a TimeGrid (the nonparametric F estimate)."""

    grid: TimeGrid
    masses: np.ndarray

    def __post_init__(self):
        masses = _frozen(self.masses)
        if masses.size != self.grid.k:
            raise DataError("masses must align with the grid")
        if np.any(masses < -1e-12):
            raise DataError("masses must be nonnegative")
        if abs(masses.sum() - 1.0) > 1e-10:
            raise DataError("masses must sum to one")
        object.__setattr__(self, "masses", masses)

    @property
    def curve(self) -> SurvivalCurve:
        return SurvivalCurve(self.grid.points, self.masses)

    def mean(self) -> float:
        return float(self.masses @ self.grid.points)


@dataclass(frozen=True)
class TabulatedComponent:
    """Basis component given as a table of (x, value) pairs, interpolated linearly."""

    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xs = _frozen(self.xs)
        values = _frozen(self.values)
        if xs.size != values.size or xs.size < 2:
            raise DataError("tabulated component needs at least two aligned points")
        if np.any(np.diff(xs) <= 0):
            raise DataError("tabulated component abscissae must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DataError("tabulated component values must be finite")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if np.any(x < self.xs[0]) or np.any(x > self.xs[-1]):
            raise DomainError("tabulated basis component evaluated outside its range")
        return np.interp(x, self.xs, self.values)


_NAMED_COMPONENTS = {
    "log": np.log,
    "sqrt": np.sqrt,
    "x": lambda x: x,
    "x2": np.square,
}


@dataclass(frozen=True)
class BasisSpec:
    """Tilt basis h(.): an ordered tuple of components, each finite on (0, inf).

    Components are the names "log", "sqrt", "x", "x2" or TabulatedComponent
    instances; the evaluation vector has one entry per component.
    """

    components: tuple = ("log",)

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise DataError("basis needs at least one component")
        for c in comps:
            if isinstance(c, TabulatedComponent):
                continue
            if not isinstance(c, str) or c not in _NAMED_COMPONENTS:
                raise DataError(
                    f"unknown basis component {c!r}; expected one of "
                    f"{sorted(_NAMED_COMPONENTS)} or a TabulatedComponent"
                )
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_names(cls, names) -> "BasisSpec":
        return cls(tuple(names))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def evaluate(self, x) -> np.ndarray:
        """h(x) for scalar x > 0, as a vector of length `dimension`."""
        return self.evaluate_many(np.asarray([x], dtype=float))[0]

    def evaluate_many(self, xs) -> np.ndarray:
        """Row-wise evaluation at positive points: returns shape (len(xs), d)."""
        xs = np.asarray(xs, dtype=float).reshape(-1)
        if np.any(~np.isfinite(xs)) or np.any(xs <= 0):
            raise DomainError("basis components are defined on x > 0 only")
        cols = []
        for c in self.components:
            fn = _NAMED_COMPONENTS[c] if isinstance(c, str) else c
            col = np.asarray(fn(xs), dtype=float)
            if not np.all(np.isfinite(col)):
                raise DomainError("basis evaluation produced a non-finite value")
            cols.append(col)
        return np.column_stack(cols)


@dataclass(frozen=True)
class DrmParams:
    """Exponential-tilt parameters: normalizing constant alpha and tilt vector theta."""

    alpha: float
    theta: np.ndarray

    def __post_init__(self):
        theta = _frozen(self.theta)
        if not math.isfinite(self.alpha):
            raise DataError("alpha must be finite")
        if theta.size and not np.all(np.isfinite(theta)):
            raise DataError("theta must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", float(self.alpha))
