"""Shared test utilities: independent likelihood oracles and random instances.

The oracles here deliberately avoid the package's EM code paths: likelihoods
are written directly from the data, and maximization is exhaustive simplex
grid search with local box refinement.
"""
from __future__ import annotations

import itertools

import numpy as np

from drmsurv import ObservedSample, Scheme


# ---------------------------------------------------------------------------
# direct observed-data log-likelihoods (vectorized over candidate mass rows)


def rc_terms(points, P, sample, proper=True):
    """Log-likelihood rows for a right-censored arm given mass rows P.

    proper=True: beyond-grid censoring contributes log(1) (mass spread over
    the grid).  proper=False expects P to carry a final tail-mass column.
    """
    k = len(points)
    if proper:
        masses = P
    else:
        masses = P[:, :k]
    ll = np.zeros(P.shape[0])
    for t, s in zip(sample.times, sample.status):
        if s == 1:
            j = int(np.searchsorted(points, t))
            with np.errstate(divide="ignore"):
                ll += np.log(masses[:, j])
        else:
            above = points > t
            tail = masses[:, above].sum(axis=1)
            if not proper:
                tail = tail + P[:, k]
            elif not above.any():
                tail = np.ones(P.shape[0])
            with np.errstate(divide="ignore"):
                ll += np.log(tail)
    return ll


def lbrc_terms(points, Q, sample):
    """Log-likelihood rows for a length-biased arm given tilted mass rows Q."""
    ll = np.zeros(Q.shape[0])
    for t, s in zip(sample.times, sample.status):
        if s == 1:
            j = int(np.searchsorted(points, t))
            with np.errstate(divide="ignore"):
                ll += np.log(Q[:, j])
        else:
            at_or_above = points >= t
            with np.errstate(divide="ignore"):
                ll += np.log(Q[:, at_or_above].sum(axis=1))
    mu = Q @ points
    with np.errstate(divide="ignore"):
        ll -= sample.n * np.log(mu)
    return ll


def tilt_rows(points, P, theta, h):
    """Normalized tilted masses q = p exp(theta h) / sum(p exp(theta h))."""
    w = P * np.exp(theta * h)[None, :]
    return w / w.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# exhaustive maximization


def simplex_rows(k, step):
    """All probability vectors on the k-simplex with coordinates on a step grid."""
    m = int(round(1.0 / step))
    rows = []
    for combo in itertools.combinations_with_replacement(range(k), m):
        counts = np.bincount(combo, minlength=k)
        rows.append(counts / m)
    return np.unique(np.asarray(rows), axis=0)


def _box_rows(center, step, span=2):
    """Feasible simplex rows in a box around a center point."""
    k = center.size
    if k == 1:
        return np.ones((1, 1))
    offsets = np.arange(-span, span + 1) * step
    free = [center[j] + offsets for j in range(k - 1)]
    grids = np.meshgrid(*free, indexing="ij")
    flat = np.column_stack([g.ravel() for g in grids])
    last = 1.0 - flat.sum(axis=1)
    rows = np.column_stack([flat, last])
    ok = np.all(rows >= -1e-12, axis=1)
    return np.clip(rows[ok], 0.0, 1.0)


def maximize_over_simplex(loglik_rows, k, coarse=0.02, stages=9):
    """argmax of a likelihood over the k-simplex by grid search + refinement."""
    P = simplex_rows(k, coarse)
    vals = loglik_rows(P)
    best = P[int(np.argmax(vals))]
    step = coarse
    for _ in range(stages):
        step /= 4.0
        P = _box_rows(best, step, span=4)
        P = P / P.sum(axis=1, keepdims=True)
        vals = loglik_rows(P)
        best = P[int(np.argmax(vals))]
    return best


def maximize_over_simplex_and_theta(loglik_rows_at_theta, k,
                                    theta_grid=np.arange(-6.0, 6.01, 0.25),
                                    coarse=0.02, stages=18):
    """Joint argmax over (simplex masses, scalar theta).

    loglik_rows_at_theta(P, theta) -> row likelihoods.  A coarse sweep over
    theta with a coarse simplex grid picks the basin; the pair is then refined
    by recentered joint box searches.  Halving steps with wide spans lets the
    walk travel along flat likelihood ridges where masses and theta trade off.
    """
    P0 = simplex_rows(k, coarse)
    best_val, best_p, best_t = -np.inf, None, None
    for theta in theta_grid:
        vals = loglik_rows_at_theta(P0, theta)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_p, best_t = vals[j], P0[j], theta
    p_step = coarse
    t_step = float(theta_grid[1] - theta_grid[0])
    for _ in range(stages):
        p_step /= 2.0
        t_step /= 2.0
        thetas = best_t + np.arange(-8, 9) * t_step
        P = _box_rows(best_p, p_step, span=6)
        P = P / P.sum(axis=1, keepdims=True)
        for theta in thetas:
            vals = loglik_rows_at_theta(P, theta)
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val, best_p, best_t = vals[j], P[j], theta
    return best_p, best_t, best_val


# ---------------------------------------------------------------------------
# random instances


def random_rc_sample(rng, n=None, times=None, min_events=1):
    n = n or int(rng.integers(3, 9))
    pool = times if times is not None else [1.0, 2.0, 3.0]
    t = rng.choice(pool, size=n)
    status = rng.integers(0, 2, size=n)
    while status.sum() < min_events:
        status[rng.integers(0, n)] = 1
    return ObservedSample(times=t, status=status, scheme=Scheme.RC)


def random_lbrc_sample(rng, n=None, times=None, min_events=1):
    n = n or int(rng.integers(3, 9))
    pool = times if times is not None else [1.0, 2.0, 3.0]
    t = rng.choice(pool, size=n)
    status = rng.integers(0, 2, size=n)
    while status.sum() < min_events:
        status[rng.integers(0, n)] = 1
    entries = rng.uniform(0.0, 0.9, size=n) * t
    return ObservedSample(times=t, status=status, scheme=Scheme.LBRC,
                          entries=entries)


def random_censored_rc(rng, n, cens_target=0.3, scale=2.0, shape=1.0):
    """Continuous-time RC sample with roughly the requested censoring level."""
    t = rng.gamma(shape, scale, size=n)
    if cens_target <= 0:
        return ObservedSample(times=t, status=np.ones(n, dtype=int), scheme=Scheme.RC)
    rate = (1.0 - cens_target) ** (-1.0 / shape) - 1.0
    c = rng.exponential(scale / rate, size=n)
    sample = ObservedSample(times=np.minimum(t, c), status=(t < c).astype(int),
                            scheme=Scheme.RC)
    if sample.event_times.size == 0:
        return random_censored_rc(rng, n, cens_target, scale, shape)
    return sample
