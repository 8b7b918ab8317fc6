"""Exception types shared across the package."""


class DrmsurvError(Exception):
    """Base class for all errors raised by this package."""


class DataError(DrmsurvError):
    """Invalid or inconsistent input data (samples, CSV files, request payloads)."""


class DomainError(DrmsurvError):
    """A mathematically invalid request, e.g. quantile beyond the support of a
    defective curve, basis evaluation at a nonpositive point, or a likelihood
    evaluation with zero mass at an observed event time."""


class SeparationError(DrmsurvError):
    """The tilt parameter diverged (empirical-likelihood separation)."""


class CalibrationError(DrmsurvError):
    """Censoring-rate calibration or sample generation could not reach its target."""
