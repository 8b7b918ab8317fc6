"""Request/response models for the HTTP service (also used by the CLI client)."""
from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .core import BasisSpec, ObservedSample, Scheme
from .distributions import TrueDistSpec
from .em import EmOptions
from .simulate import ESTIMATORS

EstimatorName = Literal["ecdf", "km", "km-ltrc", "npmle-lbrc", "npmle-pooled",
                        "drm", "drm-multi"]
BasisName = Literal["log", "sqrt", "x", "x2"]


class SamplePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    times: list[float]
    status: list[int]
    entries: list[float] | None = None
    scheme: Literal["IID", "RC", "LTRC", "LBRC"] | None = None

    def to_sample(self, default_scheme: str) -> ObservedSample:
        scheme = Scheme(self.scheme or default_scheme)
        return ObservedSample(
            times=np.asarray(self.times, dtype=float),
            status=np.asarray(self.status, dtype=int),
            scheme=scheme,
            entries=np.asarray(self.entries, dtype=float)
            if self.entries is not None else None,
        )

    @classmethod
    def from_sample(cls, sample: ObservedSample) -> "SamplePayload":
        return cls(
            times=sample.times.tolist(),
            status=sample.status.tolist(),
            entries=sample.entries.tolist() if sample.entries is not None else None,
            scheme=sample.scheme.value,
        )


class EmOptionsPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_iters: int = 5000
    tol: float = 1e-8
    inner_tol: float = 1e-10
    inner_max_iters: int = 100
    theta_fixed_at_zero: bool = False
    theta_bound: float = 50.0

    def to_options(self) -> EmOptions:
        return EmOptions(**self.model_dump())


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    estimator: EstimatorName
    rc: SamplePayload | None = None
    lbrc: SamplePayload | None = None
    tilted: list[SamplePayload] | None = None  # extra tilted arms for drm-multi
    basis: list[BasisName] = Field(default_factory=lambda: ["log"])
    options: EmOptionsPayload | None = None


class ArmFitPayload(BaseModel):
    alpha: float
    theta: list[float]
    q: list[float]
    pi_hat: float | None = None


class FitResponse(BaseModel):
    estimator: str
    grid: list[float]
    p: list[float]
    total_mass: float
    converged: bool = True
    alpha: float | None = None
    theta: list[float] | None = None
    q: list[float] | None = None
    pi_hat: float | None = None
    loglik_trace: list[float] | None = None
    iterations: int | None = None
    arms: list[ArmFitPayload] | None = None


class DistPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["gamma", "exponential"] = "gamma"
    shape: float = 1.0
    scale: float = 1.0

    def to_spec(self) -> TrueDistSpec:
        return TrueDistSpec(family=self.family, shape=self.shape, scale=self.scale)


class StudyConfigPayload(BaseModel):
    """Multi-cell study: list-valued censoring targets and sizes expand to a
    grid of cells, enumerated with rc_cens fastest and n_lbrc slowest."""

    model_config = ConfigDict(extra="forbid")

    rc_dist: DistPayload
    lbrc_dist: DistPayload
    rc_cens: float | list[float] = 0.0
    lbrc_cens: float | list[float] = 0.0
    n_rc: int | list[int] = 50
    n_lbrc: int | list[int] = 50
    n_replications: int = 1000
    seed: int = 0
    tau: float = 50.0
    basis: list[BasisName] = Field(default_factory=lambda: ["log"])
    estimators: list[str] = Field(default_factory=lambda: list(ESTIMATORS))
    tol: float = 1e-8
    max_iters: int = 5000
    eval_points: int = 200

    def cells(self) -> list[dict]:
        def aslist(v):
            return list(v) if isinstance(v, list) else [v]

        out = []
        for n_lb in aslist(self.n_lbrc):
            for n_rc in aslist(self.n_rc):
                for lb_c in aslist(self.lbrc_cens):
                    for rc_c in aslist(self.rc_cens):
                        out.append({"rc_cens": rc_c, "lbrc_cens": lb_c,
                                    "n_rc": n_rc, "n_lbrc": n_lb})
        return out


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: StudyConfigPayload
    workers: int | None = None


class EstimatePayload(BaseModel):
    mean_ks: float | None
    sd_ks: float | None
    n_used: int
    n_failed: int


class CellResultPayload(BaseModel):
    rc_cens: float
    lbrc_cens: float
    n_rc: int
    n_lbrc: int
    seed: int
    estimates: dict[str, EstimatePayload]


class SimulateResponse(BaseModel):
    estimators: list[str]
    rows: list[CellResultPayload]


class BootstrapRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rc: SamplePayload
    lbrc: SamplePayload
    basis: list[BasisName] = Field(default_factory=lambda: ["log"])
    B: int = 150
    level: float = 0.95
    seed: int = 0
    workers: int | None = None
    options: EmOptionsPayload | None = None


class BootstrapResponse(BaseModel):
    theta_hat: list[float]
    theta_ci: list[list[float]]
    band_points: list[float]
    band_lower: list[float]
    band_upper: list[float]
    band_lower_monotone: list[float]
    band_upper_monotone: list[float]
    B: int
    level: float
    failures: int
    zero_outside_ci: bool
    base_converged: bool


def basis_from_names(names) -> BasisSpec:
    return BasisSpec.from_names(tuple(names))


def nan_to_none(x: float) -> float | None:
    return None if (x is None or not math.isfinite(x)) else float(x)
