"""Empirical-likelihood EM fits.

Implements the self-consistency estimator for right-censored data, the NPMLE
for length-biased right-censored data, the pooled common-distribution NPMLE,
and the exponential-tilt (density ratio) fit that links a right-censored
reference arm to one or more tilted arms over a shared support grid.

Conventions used throughout:

* A right-censored subject's latent failure lies strictly beyond its censoring
  time (events precede censorings at ties), so censored-subject weight is
  redistributed over support points strictly above the censoring time.  This
  makes the self-consistency fixed point coincide with the product-limit
  estimator on every input, ties included.
* In a length-biased arm, censoring times are themselves support points and a
  censored subject's latent failure may fall on its censoring time, so weight
  is redistributed over points at or above it.
* In joint fits the reference masses form a proper distribution, so a
  reference-arm subject censored beyond the last support point contributes
  weight spread over the whole grid (its censoring time is uninformative about
  location within the support).  The one-sample self-consistency fit instead
  tracks an explicit beyond-grid tail mass, which is what makes defective
  product-limit curves reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BasisSpec,
    DiscreteDistribution,
    DrmParams,
    ObservedSample,
    Scheme,
    SurvivalCurve,
    TimeGrid,
    _counts_at,
    build_time_grid,
)
from .errors import DataError, DomainError, SeparationError

__all__ = [
    "EmOptions",
    "KmEmFit",
    "DrmFit",
    "MultiDrmFit",
    "fit_km_em",
    "fit_npmle_lbrc",
    "fit_pooled_npmle",
    "fit_drm",
    "fit_drm_multi",
    "observed_loglik",
]


@dataclass(frozen=True)
class EmOptions:
    """Controls for the EM iteration and the inner tilt-parameter solve.

    tol applies to the largest absolute change of any mass or tilt parameter
    between iterations; inner_tol bounds the gradient sup-norm of the profile
    objective.  theta_fixed_at_zero selects the pooled common-distribution
    mode.  theta_bound guards against empirical-likelihood separation.
    """

    max_iters: int = 5000
    tol: float = 1e-8
    inner_tol: float = 1e-10
    inner_max_iters: int = 100
    theta_fixed_at_zero: bool = False
    theta_bound: float = 50.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise DataError("max_iters must be at least 1")
        if self.tol <= 0 or self.inner_tol <= 0:
            raise DataError("tolerances must be positive")


@dataclass(frozen=True)
class KmEmFit:
    """Self-consistency fit for a right-censored sample."""

    curve: SurvivalCurve
    tail_mass: float
    loglik_trace: np.ndarray
    iterations: int
    converged: bool


@dataclass(frozen=True)
class DrmFit:
    """Two-sample fit: tilt parameters, reference masses p, tilted masses q."""

    params: DrmParams
    p: DiscreteDistribution
    q: np.ndarray
    pi_hat: float
    loglik_trace: np.ndarray
    iterations: int
    converged: bool

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).copy()
        if q.size != self.p.grid.k:
            raise DataError("q must align with the grid")
        if abs(q.sum() - 1.0) > 1e-8:
            raise DataError("tilted masses must sum to one")
        if not 0.0 < self.pi_hat <= 1.0 + 1e-12:
            raise DataError("pi_hat must lie in (0, 1]")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def reference_curve(self) -> SurvivalCurve:
        return self.p.curve

    @property
    def tilted_curve(self) -> SurvivalCurve:
        return SurvivalCurve(self.p.grid.points, self.q)


@dataclass(frozen=True)
class MultiDrmFit:
    """Shared reference masses with per-arm tilt parameters and masses.

    pi_hats holds the truncated-out probability estimate for length-biased
    arms and NaN for tilted right-censored arms.
    """

    params: tuple
    p: DiscreteDistribution
    q_arms: tuple
    pi_hats: tuple
    loglik_trace: np.ndarray
    iterations: int
    converged: bool

    def tilted_curve(self, arm: int) -> SurvivalCurve:
        return SurvivalCurve(self.p.grid.points, self.q_arms[arm])


# ---------------------------------------------------------------------------
# shared low-level pieces


def _suffix_sums(masses: np.ndarray) -> np.ndarray:
    """T[j] = sum of masses at indices >= j."""
    return np.cumsum(masses[::-1])[::-1]


class _ArmData:
    """Per-arm precomputed structures over a fixed grid.

    cens_cnt[j] counts censored subjects whose redistribution set starts at
    grid index j; index k collects subjects censored beyond the grid.
    """

    __slots__ = ("n", "lb", "r", "cens_cnt", "trunc")

    def __init__(self, sample: ObservedSample, points: np.ndarray, lb: bool):
        k = points.size
        self.n = sample.n
        self.lb = lb
        self.r = _counts_at(points, sample.event_times).astype(float)
        cens = sample.censored_times
        side = "left" if lb else "right"
        idx = np.searchsorted(points, cens, side=side)
        self.cens_cnt = np.bincount(idx, minlength=k + 1).astype(float)
        self.trunc = (1.0 - points / points[-1]) if lb else None


def _redistribute(masses: np.ndarray, cens_cnt: np.ndarray):
    """Expected latent-event counts from censored subjects.

    Returns the per-point contribution for subjects with support above their
    censoring time, plus the count of subjects whose set is empty (beyond the
    grid).  Masses are strictly positive during the EM, so the suffix sums
    used as denominators never vanish where they are needed.
    """
    k = masses.size
    tail = _suffix_sums(masses)
    cnt = cens_cnt[:k]
    ratio = np.divide(cnt, tail, out=np.zeros(k), where=cnt > 0)
    contrib = masses * np.cumsum(ratio)
    return contrib, float(cens_cnt[k])


def _event_loglik(counts: np.ndarray, masses: np.ndarray) -> float:
    """Sum of count-weighted log masses over points that carry events."""
    active = counts > 0
    if not np.any(active):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(counts[active] @ np.log(masses[active]))


def _censored_loglik(masses: np.ndarray, cens_cnt: np.ndarray) -> float:
    """Sum of log tail masses over censored subjects (spread subjects give 0)."""
    k = masses.size
    tail = _suffix_sums(masses)
    cnt = cens_cnt[:k]
    active = cnt > 0
    if not np.any(active):
        return 0.0
    with np.errstate(divide="ignore"):
        logs = np.log(tail[active])
    return float(cnt[active] @ logs)


# ---------------------------------------------------------------------------
# one-sample self-consistency fit (right-censored)


def fit_km_em(sample: ObservedSample, opts: EmOptions | None = None) -> KmEmFit:
    """Self-consistency EM for a right-censored sample.

    Iterates mass updates (events plus expected latent events at each point,
    divided by n) with an explicit beyond-grid tail cell; the fixed point is
    the product-limit estimator, defective mass included.
    """
    opts = opts or EmOptions()
    if sample.scheme is not Scheme.RC:
        raise DataError(f"fit_km_em expects scheme RC, got {sample.scheme.value}")
    points = np.unique(sample.event_times)
    if points.size == 0:
        raise DataError("no events: self-consistency estimator is undefined")
    k = points.size
    n = sample.n
    r = _counts_at(points, sample.event_times).astype(float)
    idx = np.searchsorted(points, sample.censored_times, side="right")
    cens_cnt = np.bincount(idx, minlength=k + 1).astype(float)

    p = np.full(k, 1.0 / (k + 1))
    tail_mass = 1.0 / (k + 1)

    def loglik(p, tail_mass):
        tails = np.append(_suffix_sums(p), 0.0) + tail_mass
        active = cens_cnt > 0
        ll = float(r @ np.log(p))
        if np.any(active):
            ll += float(cens_cnt[active] @ np.log(tails[active]))
        return ll

    trace = [loglik(p, tail_mass)]
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        denoms = np.append(_suffix_sums(p), 0.0) + tail_mass
        ratio = np.divide(cens_cnt, denoms, out=np.zeros(k + 1), where=cens_cnt > 0)
        contrib = p * np.cumsum(ratio[:k])
        new_p = (r + contrib) / n
        new_tail = tail_mass * ratio.sum() / n
        delta = max(np.abs(new_p - p).max(), abs(new_tail - tail_mass))
        p, tail_mass = new_p, new_tail
        trace.append(loglik(p, tail_mass))
        if delta < opts.tol:
            converged = True
            break

    return KmEmFit(
        curve=SurvivalCurve(points, p),
        tail_mass=float(tail_mass),
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# joint engine: reference arm + tilted arms over a shared grid


def _combined_grid(ref: ObservedSample | None, tilted: list[ObservedSample]) -> TimeGrid:
    """Union grid: reference event times plus, per tilted arm, all times for
    length-biased arms and event times for right-censored ones.  Tilted-arm
    tallies are aggregated into the lb_* slots."""
    pieces = []
    if ref is not None:
        pieces.append(ref.event_times)
    for s in tilted:
        pieces.append(s.times if s.scheme is Scheme.LBRC else s.event_times)
    merged = np.concatenate(pieces) if pieces else np.empty(0)
    points = np.unique(merged)
    if points.size == 0:
        raise DataError("no support points")
    zeros = np.zeros(points.size, dtype=int)
    rc_ev = _counts_at(points, ref.event_times) if ref is not None else zeros
    rc_ce = _counts_at(points, ref.censored_times) if ref is not None else zeros
    lb_ev = zeros.copy()
    lb_ce = zeros.copy()
    for s in tilted:
        lb_ev = lb_ev + _counts_at(points, s.event_times)
        lb_ce = lb_ce + _counts_at(points, s.censored_times)
    return TimeGrid(points, rc_ev, rc_ce, lb_ev, lb_ce)


class _EngineResult:
    __slots__ = ("grid", "p", "alphas", "thetas", "q_arms", "pi_hats",
                 "trace", "iterations", "converged")


def _logsumexp_rows(rows: np.ndarray) -> np.ndarray:
    """Columnwise log-sum-exp of a small stack of rows."""
    return np.logaddexp.reduce(rows, axis=0)


def _logsumexp_vec(v: np.ndarray) -> float:
    m = float(v.max())
    return m + math.log(float(np.exp(v - m).sum()))


def _profile_state(V, w1, W2, logc, lam_row, X):
    """Profile objective value at stacked tilt parameters V of shape
    (n_arms, 1 + d); row a holds (alpha_a, theta_a).  Also returns the
    log-numerators and log-denominators reused by the gradient."""
    U = V @ X.T                           # (n_arms, k)
    A = logc[:, None] + U
    rows = A if lam_row is None else np.concatenate([A, lam_row])
    logden = _logsumexp_rows(rows)
    G = float((W2 * U).sum() - w1 @ logden)
    return G, A, logden


def _profile_gradient(V, w1, W2, logc, lam_row, X):
    """Analytic gradient of the profile objective, flattened over arms."""
    _, A, logden = _profile_state(V, w1, W2, logc, lam_row, X)
    S = np.exp(A - logden)
    resid = W2 - w1[None, :] * S
    return (resid @ X).ravel()


def _profile_newton(V, w1, W2, logc, lam0, X, opts):
    """Maximize the profile objective over stacked tilt parameters.

    The objective is concave, so Newton ascent with a backtracking line
    search converges; analytic gradient and Hessian are used throughout.  The
    gradient tolerance is scaled by the total tilted weight, which bounds the
    constraint defect |sum q - 1| by inner_tol directly.  Returns the updated
    V, or None when a non-finite value is encountered.
    """
    n_arms, m = V.shape
    k = X.shape[0]
    lam_row = np.full((1, k), math.log(lam0)) if lam0 > 0 else None

    def parts(Vc):
        return _profile_state(Vc, w1, W2, logc, lam_row, X)

    G, A, logden = parts(V)
    if not math.isfinite(G):
        return None
    dim = n_arms * m
    gscale = max(1.0, float(W2.sum()))
    noise = 1e-12 * (1.0 + abs(G))
    for _ in range(opts.inner_max_iters):
        S = np.exp(A - logden)            # shares in (0, 1]
        resid = W2 - w1[None, :] * S
        grad = (resid @ X).reshape(dim)
        if np.abs(grad).max() <= opts.inner_tol * gscale:
            break
        # negated Hessian of the (concave) objective: positive semidefinite
        neg_hess = np.zeros((dim, dim))
        for a in range(n_arms):
            for b in range(n_arms):
                wvec = w1 * S[a] * ((1.0 if a == b else 0.0) - S[b])
                neg_hess[a * m:(a + 1) * m, b * m:(b + 1) * m] = X.T @ (wvec[:, None] * X)
        neg_hess[np.diag_indices(dim)] += 1e-12
        try:
            step = np.linalg.solve(neg_hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        gained = None
        for direction in (step, grad):
            slope = float(grad @ direction)
            if slope <= noise:
                continue  # no measurable ascent available along this direction
            t = 1.0
            for _ in range(40):
                trial = V + t * direction.reshape(n_arms, m)
                Gt, At, logdent = parts(trial)
                if math.isfinite(Gt) and Gt >= G + 1e-4 * t * slope:
                    gained = Gt - G
                    V, G, A, logden = trial, Gt, At, logdent
                    break
                t *= 0.5
            if gained is not None:
                break
        if gained is None or gained <= noise:
            break  # numerical stationarity
    if not np.all(np.isfinite(V)):
        return None
    return V


def _run_engine(ref: ObservedSample | None, tilted: list[ObservedSample],
                basis: BasisSpec | None, opts: EmOptions,
                fixed_zero_tilt: bool) -> _EngineResult:
    grid = _combined_grid(ref, tilted)
    points = grid.points
    k = grid.k
    t_over = points / points[-1]

    ref_arm = _ArmData(ref, points, lb=False) if ref is not None else None
    arms = [_ArmData(s, points, lb=(s.scheme is Scheme.LBRC)) for s in tilted]
    n_arms = len(arms)
    lam0 = float(ref_arm.n) if ref_arm is not None else 0.0

    if fixed_zero_tilt:
        X = None
        d = 0
    else:
        if basis is None:
            raise DataError("a basis is required unless the tilt is fixed at zero")
        H = basis.evaluate_many(points)
        X = np.column_stack([np.ones(k), H])
        d = basis.dimension

    p = np.full(k, 1.0 / k)
    V = np.zeros((n_arms, 1 + d))
    q_arms = [p.copy() for _ in arms]

    def current_pis(qs):
        return [float(q @ t_over) if arm.lb else math.nan for arm, q in zip(arms, qs)]

    def loglik(p, qs):
        ll = 0.0
        if ref_arm is not None:
            ll += _event_loglik(ref_arm.r, p)
            ll += _censored_loglik(p, ref_arm.cens_cnt)
        for arm, q in zip(arms, qs):
            ll += _event_loglik(arm.r, q)
            ll += _censored_loglik(q, arm.cens_cnt)
            if arm.lb:
                ll -= arm.n * math.log(float(q @ points))
        return ll

    trace = [loglik(p, q_arms)]
    converged = False
    iterations = 0
    inner_failed = False
    for iterations in range(1, opts.max_iters + 1):
        pis = current_pis(q_arms)

        # E-step: expected latent event counts at every support point
        w1 = ref_arm.r.copy() if ref_arm is not None else np.zeros(k)
        if ref_arm is not None:
            contrib, spread = _redistribute(p, ref_arm.cens_cnt)
            w1 += contrib + spread * p
        W2 = np.empty((n_arms, k))
        for a, (arm, q) in enumerate(zip(arms, q_arms)):
            contrib, spread = _redistribute(q, arm.cens_cnt)
            w2 = arm.r + contrib + spread * q
            if arm.lb:
                w2 = w2 + arm.n * q * arm.trunc / pis[a]
            W2[a] = w2
            w1 += w2

        # multiplier weights for the closed-form mass update
        c = np.array([arm.n / pis[a] if arm.lb else float(arm.n)
                      for a, arm in enumerate(arms)])

        if fixed_zero_tilt:
            new_p = w1 / (lam0 + c.sum())
            new_p /= new_p.sum()
            new_V = V
            new_q = [new_p] * n_arms
        else:
            logc = np.log(c)
            new_V = _profile_newton(V.copy(), w1, W2, logc, lam0, X, opts)
            if new_V is None:
                new_V = _profile_newton(np.zeros_like(V), w1, W2, logc, lam0, X, opts)
            if new_V is None:
                new_V = V  # keep previous tilt; masses still update below
                inner_failed = True
            if np.abs(new_V[:, 1:]).max() > opts.theta_bound:
                raise SeparationError(
                    "tilt unbounded / separation: |theta| exceeded "
                    f"{opts.theta_bound}")
            A = logc[:, None] + new_V @ X.T
            if lam0 > 0:
                A = np.concatenate([A, np.full((1, k), math.log(lam0))])
            logden = _logsumexp_rows(A)
            new_p = w1 * np.exp(-logden)
            new_p /= new_p.sum()
            # tiny floor: extreme transient tilts can underflow masses to an
            # exact zero, which would poison downstream logs and ratios
            new_p = np.maximum(new_p, 1e-300)
            # re-anchor each alpha as the exact normalizing constant of its tilt
            logp = np.log(new_p)
            new_q = []
            for a in range(n_arms):
                eta = X[:, 1:] @ new_V[a, 1:]
                new_V[a, 0] = -_logsumexp_vec(logp + eta)
                new_q.append(np.maximum(np.exp(logp + new_V[a, 0] + eta), 1e-300))

        delta = float(np.abs(new_p - p).max())
        if not fixed_zero_tilt:
            delta = max(delta, float(np.abs(new_V - V).max()))
        p, V, q_arms = new_p, new_V, new_q
        trace.append(loglik(p, q_arms))
        if delta < opts.tol:
            converged = True
            break

    res = _EngineResult()
    res.grid = grid
    res.p = p
    res.alphas = [float(V[a, 0]) for a in range(n_arms)]
    res.thetas = [V[a, 1:].copy() for a in range(n_arms)]
    res.q_arms = q_arms
    res.pi_hats = current_pis(q_arms)
    res.trace = np.asarray(trace)
    res.iterations = iterations
    res.converged = converged and not inner_failed
    return res


# ---------------------------------------------------------------------------
# public fits


def fit_npmle_lbrc(sample: ObservedSample, opts: EmOptions | None = None) -> DrmFit:
    """NPMLE for a single length-biased right-censored sample.

    Support points are the sample's event and censoring times; each iteration
    adds the expected counts of censored-out and truncated-out failures and
    rescales by the truncated-out probability estimate.
    """
    opts = opts or EmOptions()
    if sample.scheme is not Scheme.LBRC:
        raise DataError(f"fit_npmle_lbrc expects scheme LBRC, got {sample.scheme.value}")
    if sample.event_times.size == 0:
        raise DataError("no events: the NPMLE needs at least one observed failure")
    res = _run_engine(None, [sample], None, opts, fixed_zero_tilt=True)
    return _two_sample_fit(res, theta_dim=0)


def fit_pooled_npmle(rc: ObservedSample | None, lbrc: ObservedSample,
                     opts: EmOptions | None = None) -> DrmFit:
    """Common-distribution NPMLE for combined RC and LBRC samples.

    Equivalent to the tilted fit with the tilt pinned to zero, so the two
    arms share one set of masses.  The RC arm may be omitted, in which case
    this reduces to the one-sample LBRC NPMLE.
    """
    opts = opts or EmOptions()
    if rc is not None and rc.scheme is not Scheme.RC:
        raise DataError(f"fit_pooled_npmle expects an RC reference arm, got {rc.scheme.value}")
    if lbrc.scheme is not Scheme.LBRC:
        raise DataError(f"fit_pooled_npmle expects an LBRC arm, got {lbrc.scheme.value}")
    res = _run_engine(rc, [lbrc], None, opts, fixed_zero_tilt=True)
    return _two_sample_fit(res, theta_dim=0)


def fit_drm(rc: ObservedSample, lbrc: ObservedSample, basis: BasisSpec,
            opts: EmOptions | None = None) -> DrmFit:
    """Density-ratio-model fit of an RC reference arm and an LBRC tilted arm.

    Returns reference masses p, tilted masses q = p * exp(alpha + theta' h),
    the tilt parameters, and the truncated-out probability estimate.  With
    opts.theta_fixed_at_zero the tilt is pinned (alpha = 0, theta = 0) and the
    masses equal the pooled NPMLE.
    """
    opts = opts or EmOptions()
    if rc is None or lbrc is None:
        raise DataError("fit_drm requires both the rc and lbrc arms")
    if rc.scheme is not Scheme.RC:
        raise DataError(f"fit_drm expects an RC reference arm, got {rc.scheme.value}")
    if lbrc.scheme is not Scheme.LBRC:
        raise DataError(f"fit_drm expects an LBRC tilted arm, got {lbrc.scheme.value}")
    if opts.theta_fixed_at_zero:
        res = _run_engine(rc, [lbrc], None, opts, fixed_zero_tilt=True)
        return _two_sample_fit(res, theta_dim=basis.dimension)
    res = _run_engine(rc, [lbrc], basis, opts, fixed_zero_tilt=False)
    return _two_sample_fit(res, theta_dim=basis.dimension)


def fit_drm_multi(reference: ObservedSample, tilted: list[ObservedSample],
                  basis: BasisSpec, opts: EmOptions | None = None) -> MultiDrmFit:
    """Shared-reference fit with one tilt parameter set per additional arm.

    The reference arm is right-censored (or fully observed); each tilted arm
    is right-censored or length-biased right-censored and contributes its own
    weights to the shared masses.
    """
    opts = opts or EmOptions()
    if reference.scheme not in (Scheme.RC, Scheme.IID):
        raise DataError("reference arm must be RC or IID")
    if not tilted:
        raise DataError("at least one tilted arm is required")
    for s in tilted:
        if s.scheme not in (Scheme.RC, Scheme.LBRC):
            raise DataError(f"tilted arms must be RC or LBRC, got {s.scheme.value}")
    res = _run_engine(reference, list(tilted), basis, opts,
                      fixed_zero_tilt=opts.theta_fixed_at_zero)
    d = basis.dimension
    params = tuple(
        DrmParams(res.alphas[a],
                  res.thetas[a] if res.thetas[a].size else np.zeros(d))
        for a in range(len(tilted))
    )
    return MultiDrmFit(
        params=params,
        p=DiscreteDistribution(res.grid, res.p),
        q_arms=tuple(np.asarray(q) for q in res.q_arms),
        pi_hats=tuple(res.pi_hats),
        loglik_trace=res.trace,
        iterations=res.iterations,
        converged=res.converged,
    )


def _two_sample_fit(res: _EngineResult, theta_dim: int) -> DrmFit:
    theta = res.thetas[0]
    if theta.size == 0:
        theta = np.zeros(theta_dim)
    return DrmFit(
        params=DrmParams(res.alphas[0], theta),
        p=DiscreteDistribution(res.grid, res.p),
        q=res.q_arms[0],
        pi_hat=res.pi_hats[0],
        loglik_trace=res.trace,
        iterations=res.iterations,
        converged=res.converged,
    )


# ---------------------------------------------------------------------------
# observed-data log-likelihood (reference implementation)


def _match_events(points: np.ndarray, masses: np.ndarray, times: np.ndarray) -> float:
    idx = np.searchsorted(points, times)
    ok = (idx < points.size) & (points[np.minimum(idx, points.size - 1)] == times)
    if not np.all(ok):
        raise DomainError("support violation: event time off the support grid")
    vals = masses[idx]
    if np.any(vals <= 0):
        raise DomainError("support violation: zero mass at an observed event time")
    return float(np.log(vals).sum())


def observed_loglik(masses, grid: TimeGrid, rc: ObservedSample | None = None,
                    lbrc: ObservedSample | None = None, *, alpha: float = 0.0,
                    theta=(), basis: BasisSpec | None = None) -> float:
    """Observed-data log-likelihood of proper reference masses for the arms.

    The RC arm contributes mass at event times and strict tail mass at
    censoring times (a censoring time beyond the grid contributes nothing);
    the LBRC arm contributes tilted mass at event times, inclusive tilted tail
    mass at censoring times, and one discrete-mean denominator per subject.
    """
    p = np.asarray(masses, dtype=float)
    if p.size != grid.k:
        raise DataError("masses must align with the grid")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-8:
        raise DataError("masses must be a proper distribution over the grid")
    points = grid.points

    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size or alpha != 0.0:
        if basis is None:
            raise DataError("a basis is required when tilt parameters are given")
        eta = basis.evaluate_many(points) @ theta
        with np.errstate(under="ignore"):
            q = p * np.exp(alpha + eta)
    else:
        q = p

    ll = 0.0
    if rc is not None:
        if rc.event_times.size:
            ll += _match_events(points, p, rc.event_times)
        cens = rc.censored_times
        if cens.size:
            tail = np.append(_suffix_sums(p), 0.0)
            idx = np.searchsorted(points, cens, side="right")
            vals = tail[idx]
            vals[idx == grid.k] = 1.0  # beyond-grid censoring is uninformative
            with np.errstate(divide="ignore"):
                ll += float(np.log(vals).sum())
    if lbrc is not None:
        if lbrc.event_times.size:
            ll += _match_events(points, q, lbrc.event_times)
        cens = lbrc.censored_times
        if cens.size:
            tail = np.append(_suffix_sums(q), 0.0)
            idx = np.searchsorted(points, cens, side="left")
            vals = tail[np.minimum(idx, grid.k)]
            with np.errstate(divide="ignore"):
                ll += float(np.log(vals).sum())
        ll -= lbrc.n * math.log(float(q @ points))
    return ll
