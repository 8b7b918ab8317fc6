"""Survival estimation from combined right-censored and length-biased samples."""

__version__ = "0.1.0"

from .bootstrap import BootstrapResult, bootstrap_drm
from .classic import fit_ecdf, fit_km, fit_km_ltrc
from .core import (
    BasisSpec,
    DiscreteDistribution,
    DrmParams,
    ObservedSample,
    Scheme,
    SurvivalCurve,
    TabulatedComponent,
    TimeGrid,
    build_time_grid,
)
from .distributions import Family, TrueDistSpec
from .em import (
    DrmFit,
    EmOptions,
    KmEmFit,
    MultiDrmFit,
    fit_drm,
    fit_drm_multi,
    fit_km_em,
    fit_npmle_lbrc,
    fit_pooled_npmle,
    observed_loglik,
)
from .errors import (
    CalibrationError,
    DataError,
    DomainError,
    DrmsurvError,
    SeparationError,
)
from .io import read_sample_csv
from .metrics import EvalGrid, ks_distance, make_eval_grid
from .simulate import (
    ESTIMATORS,
    EstimatorSummary,
    ScenarioConfig,
    ScenarioResult,
    calibrate_censoring_rate,
    gen_lbrc_sample,
    gen_rc_sample,
    run_scenario,
)

__all__ = [
    "__version__",
    "BasisSpec",
    "BootstrapResult",
    "CalibrationError",
    "DataError",
    "DiscreteDistribution",
    "DomainError",
    "DrmFit",
    "DrmParams",
    "DrmsurvError",
    "EmOptions",
    "ESTIMATORS",
    "EstimatorSummary",
    "EvalGrid",
    "Family",
    "KmEmFit",
    "MultiDrmFit",
    "ObservedSample",
    "ScenarioConfig",
    "ScenarioResult",
    "Scheme",
    "SeparationError",
    "SurvivalCurve",
    "TabulatedComponent",
    "TimeGrid",
    "TrueDistSpec",
    "bootstrap_drm",
    "build_time_grid",
    "calibrate_censoring_rate",
    "fit_drm",
    "fit_drm_multi",
    "fit_ecdf",
    "fit_km",
    "fit_km_em",
    "fit_km_ltrc",
    "fit_npmle_lbrc",
    "fit_pooled_npmle",
    "gen_lbrc_sample",
    "gen_rc_sample",
    "ks_distance",
    "make_eval_grid",
    "observed_loglik",
    "read_sample_csv",
    "run_scenario",
]
