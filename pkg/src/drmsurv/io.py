"""CSV ingestion and JSON serialization of fit results.

Sample CSV format: header ``entry,time,status`` (header row optional), one row
per subject.  The entry column may be blank for RC/IID rows; two-column files
are read as ``time,status``.  Decimal values use a dot separator regardless of
locale.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .core import ObservedSample, Scheme, SurvivalCurve
from .errors import DataError

__all__ = ["read_sample_csv", "curve_to_dict", "fit_to_dict"]


def _parse_float(text: str, line_no: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {line_no}: malformed {what} value {text!r}") from None


def read_sample_csv(path, scheme: Scheme | str) -> ObservedSample:
    """Read one arm of data from a CSV file under the given sampling scheme."""
    scheme = Scheme(scheme)
    needs_entries = scheme in (Scheme.LTRC, Scheme.LBRC)
    times, status, entries = [], [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not any(cells):
                continue
            if line_no == 1 and any(not _is_number(c) for c in cells if c):
                continue  # header row
            if len(cells) == 2:
                cells = ["", cells[0], cells[1]]
            if len(cells) != 3:
                raise DataError(f"line {line_no}: expected entry,time,status "
                                f"(got {len(cells)} fields)")
            entry_txt, time_txt, status_txt = cells
            if needs_entries:
                if not entry_txt:
                    raise DataError(f"line {line_no}: scheme {scheme.value} requires "
                                    "an entry time")
                entries.append(_parse_float(entry_txt, line_no, "entry"))
            elif entry_txt:
                raise DataError(f"line {line_no}: entry given but scheme is "
                                f"{scheme.value}")
            times.append(_parse_float(time_txt, line_no, "time"))
            s = _parse_float(status_txt, line_no, "status")
            if s not in (0.0, 1.0):
                raise DataError(f"line {line_no}: status must be 0 or 1, got {status_txt!r}")
            status.append(int(s))
    if not times:
        raise DataError(f"{path}: no data rows")
    return ObservedSample(
        times=np.asarray(times),
        status=np.asarray(status),
        scheme=scheme,
        entries=np.asarray(entries) if needs_entries else None,
    )


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def curve_to_dict(curve: SurvivalCurve, estimator: str | None = None) -> dict:
    out = {
        "grid": curve.points.tolist(),
        "p": curve.masses.tolist(),
        "total_mass": curve.total_mass,
    }
    if estimator is not None:
        out["estimator"] = estimator
    return out


def fit_to_dict(fit, estimator: str | None = None) -> dict:
    """Serialize a DRM-style fit: alpha, theta, grid, p, q, pi_hat, trace, flags."""
    out = {
        "alpha": float(fit.params.alpha),
        "theta": fit.params.theta.tolist(),
        "grid": fit.p.grid.points.tolist(),
        "p": fit.p.masses.tolist(),
        "q": fit.q.tolist(),
        "pi_hat": float(fit.pi_hat),
        "loglik_trace": fit.loglik_trace.tolist(),
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
    }
    if estimator is not None:
        out["estimator"] = estimator
    return out
