"""HTTP service exposing the estimators, the simulation harness, and the bootstrap.

The handlers are plain functions over the pydantic models in `schemas`, so the
CLI can call them in-process with identical semantics to the HTTP surface.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .bootstrap import bootstrap_drm
from .classic import fit_ecdf, fit_km, fit_km_ltrc
from .core import ObservedSample
from .em import EmOptions, fit_drm, fit_drm_multi, fit_npmle_lbrc, fit_pooled_npmle
from .errors import DrmsurvError
from .schemas import (
    ArmFitPayload,
    BootstrapRequest,
    BootstrapResponse,
    CellResultPayload,
    EstimatePayload,
    FitRequest,
    FitResponse,
    SimulateRequest,
    SimulateResponse,
    basis_from_names,
    nan_to_none,
)
from .simulate import ScenarioConfig, derive_cell_seed, run_scenario

app = FastAPI(title="drmsurv", version=__version__)


def _require(arm, name: str, estimator: str) -> ObservedSample:
    if arm is None:
        raise HTTPException(status_code=400,
                            detail=f"estimator {estimator} requires the {name} arm")
    return arm


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/fit", response_model=FitResponse)
def fit_endpoint(req: FitRequest) -> FitResponse:
    opts = (req.options.to_options() if req.options is not None
            else None)
    try:
        if req.estimator == "ecdf":
            sample = _require(req.rc, "rc", "ecdf").to_sample("IID")
            return _curve_response("ecdf", fit_ecdf(sample))
        if req.estimator == "km":
            sample = _require(req.rc, "rc", "km").to_sample("RC")
            return _curve_response("km", fit_km(sample))
        if req.estimator == "km-ltrc":
            sample = _require(req.lbrc, "lbrc", "km-ltrc").to_sample("LBRC")
            return _curve_response("km-ltrc", fit_km_ltrc(sample))
        if req.estimator == "npmle-lbrc":
            sample = _require(req.lbrc, "lbrc", "npmle-lbrc").to_sample("LBRC")
            return _drm_response("npmle-lbrc", fit_npmle_lbrc(sample, opts))
        if req.estimator == "npmle-pooled":
            lbrc = _require(req.lbrc, "lbrc", "npmle-pooled").to_sample("LBRC")
            rc = req.rc.to_sample("RC") if req.rc is not None else None
            return _drm_response("npmle-pooled", fit_pooled_npmle(rc, lbrc, opts))
        basis = basis_from_names(req.basis)
        if req.estimator == "drm":
            rc = _require(req.rc, "rc", "drm").to_sample("RC")
            lbrc = _require(req.lbrc, "lbrc", "drm").to_sample("LBRC")
            return _drm_response("drm", fit_drm(rc, lbrc, basis, opts))
        # drm-multi: reference rc arm, tilted arms from lbrc plus any extras
        rc = _require(req.rc, "rc", "drm-multi").to_sample("RC")
        tilted = []
        if req.lbrc is not None:
            tilted.append(req.lbrc.to_sample("LBRC"))
        for extra in req.tilted or []:
            tilted.append(extra.to_sample("LBRC"))
        if not tilted:
            raise HTTPException(status_code=400,
                                detail="estimator drm-multi requires the lbrc arm "
                                       "or at least one tilted arm")
        fit = fit_drm_multi(rc, tilted, basis, opts)
        return FitResponse(
            estimator="drm-multi",
            grid=fit.p.grid.points.tolist(),
            p=fit.p.masses.tolist(),
            total_mass=1.0,
            converged=fit.converged,
            loglik_trace=fit.loglik_trace.tolist(),
            iterations=fit.iterations,
            arms=[
                ArmFitPayload(
                    alpha=params.alpha,
                    theta=params.theta.tolist(),
                    q=q.tolist(),
                    pi_hat=nan_to_none(pi),
                )
                for params, q, pi in zip(fit.params, fit.q_arms, fit.pi_hats)
            ],
        )
    except DrmsurvError as exc:
        raise _bad_request(exc) from exc


def _curve_response(estimator: str, curve) -> FitResponse:
    return FitResponse(
        estimator=estimator,
        grid=curve.points.tolist(),
        p=curve.masses.tolist(),
        total_mass=curve.total_mass,
        converged=True,
    )


def _drm_response(estimator: str, fit) -> FitResponse:
    return FitResponse(
        estimator=estimator,
        grid=fit.p.grid.points.tolist(),
        p=fit.p.masses.tolist(),
        total_mass=1.0,
        converged=fit.converged,
        alpha=fit.params.alpha,
        theta=fit.params.theta.tolist(),
        q=fit.q.tolist(),
        pi_hat=nan_to_none(fit.pi_hat),
        loglik_trace=fit.loglik_trace.tolist(),
        iterations=fit.iterations,
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    cfg = req.config
    try:
        basis = basis_from_names(cfg.basis)
        rows = []
        for index, cell in enumerate(cfg.cells()):
            seed = derive_cell_seed(cfg.seed, index)
            scenario = ScenarioConfig(
                rc_dist=cfg.rc_dist.to_spec(),
                lbrc_underlying_dist=cfg.lbrc_dist.to_spec(),
                rc_cens_target=cell["rc_cens"],
                lbrc_cens_target=cell["lbrc_cens"],
                n_rc=cell["n_rc"],
                n_lbrc=cell["n_lbrc"],
                n_replications=cfg.n_replications,
                seed=seed,
                tau=cfg.tau,
                basis=basis,
                estimators=tuple(cfg.estimators),
                em_options=_scenario_options(cfg),
                eval_points=cfg.eval_points,
            )
            result = run_scenario(scenario, workers=req.workers)
            rows.append(CellResultPayload(
                rc_cens=cell["rc_cens"],
                lbrc_cens=cell["lbrc_cens"],
                n_rc=cell["n_rc"],
                n_lbrc=cell["n_lbrc"],
                seed=seed,
                estimates={
                    name: EstimatePayload(
                        mean_ks=nan_to_none(summary.mean_ks),
                        sd_ks=nan_to_none(summary.sd_ks),
                        n_used=summary.n_used,
                        n_failed=summary.n_failed,
                    )
                    for name, summary in result.summaries.items()
                },
            ))
        return SimulateResponse(estimators=list(cfg.estimators), rows=rows)
    except DrmsurvError as exc:
        raise _bad_request(exc) from exc


def _scenario_options(cfg) -> EmOptions:
    return EmOptions(tol=cfg.tol, max_iters=cfg.max_iters)


@app.post("/bootstrap", response_model=BootstrapResponse)
def bootstrap_endpoint(req: BootstrapRequest) -> BootstrapResponse:
    try:
        rc = req.rc.to_sample("RC")
        lbrc = req.lbrc.to_sample("LBRC")
        basis = basis_from_names(req.basis)
        opts = req.options.to_options() if req.options is not None else None
        result = bootstrap_drm(rc, lbrc, basis, B=req.B, level=req.level,
                               seed=req.seed, opts=opts, workers=req.workers)
        return BootstrapResponse(
            theta_hat=result.theta_hat.tolist(),
            theta_ci=result.theta_ci.tolist(),
            band_points=result.band_points.tolist(),
            band_lower=result.band_lower.tolist(),
            band_upper=result.band_upper.tolist(),
            band_lower_monotone=result.band_lower_monotone.tolist(),
            band_upper_monotone=result.band_upper_monotone.tolist(),
            B=result.B,
            level=result.level,
            failures=result.failures,
            zero_outside_ci=result.zero_outside_theta_ci(),
            base_converged=result.base_converged,
        )
    except DrmsurvError as exc:
        raise _bad_request(exc) from exc
