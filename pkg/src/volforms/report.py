"""Verification reports shared by every identity check, and their JSON form."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .estimator import McEstimate

SCHEMA_VERSION = 1
DEFAULT_SIGMA = 3.0
DEFAULT_ABS_TOL = 1e-8


@dataclass
class VerificationReport:
    """Outcome of checking one identity.

    Statistical checks set ``sigma_units`` (discrepancy divided by its
    standard error) and pass when it is at most ``threshold``. Exact or
    deterministic checks leave ``sigma_units`` as ``None`` and pass when
    ``discrepancy <= abs_tol``.
    """

    identity: str
    equation: str
    lhs: McEstimate | float | complex | None
    rhs: McEstimate | float | complex | None
    discrepancy: float
    sigma_units: float | None = None
    threshold: float = DEFAULT_SIGMA
    abs_tol: float = DEFAULT_ABS_TOL
    details: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    grid_n: int | None = None
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            if self.sigma_units is not None:
                self.passed = bool(self.sigma_units <= self.threshold)
            else:
                self.passed = bool(self.discrepancy <= self.abs_tol)

    @property
    def statistical(self) -> bool:
        return self.sigma_units is not None

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "identity": self.identity,
            "equation": self.equation,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "discrepancy": _jsonable(self.discrepancy),
            "sigma_units": _jsonable(self.sigma_units),
            "threshold": self.threshold if self.statistical else None,
            "abs_tol": None if self.statistical else self.abs_tol,
            "pass": bool(self.passed),
            "seed": self.seed,
            "grid_n": self.grid_n,
            "details": _jsonable(self.details),
        }

    def to_json(self, timestamp: str | None = None) -> str:
        d = self.to_dict()
        if timestamp is not None:
            d["timestamp"] = timestamp
        return json.dumps(d, indent=2, sort_keys=True)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.statistical:
            return f"{status} {self.identity}: {self.sigma_units:.3g} sigma (threshold {self.threshold:g})"
        return f"{status} {self.identity}: discrepancy {self.discrepancy:.3g} (tol {self.abs_tol:g})"


def paired_report(identity: str, equation: str, lhs_values, rhs_values, threshold: float = DEFAULT_SIGMA,
                  **extra) -> VerificationReport:
    """Compare two per-sample arrays drawn on common random numbers.

    The standard error is that of the paired difference, which is what a
    common-random-numbers comparison needs.
    """
    lhs_values = np.asarray(lhs_values, dtype=np.float64)
    rhs_values = np.asarray(rhs_values, dtype=np.float64)
    lhs = McEstimate.from_values(lhs_values)
    rhs = McEstimate.from_values(rhs_values)
    diff = McEstimate.from_values(lhs_values - rhs_values)
    sigma = sigma_units(diff.mean, diff.std_error)
    details = dict(extra.pop("details", {}))
    details["difference"] = diff.to_dict()
    return VerificationReport(identity, equation, lhs, rhs, abs(diff.mean), sigma, threshold,
                              details=details, **extra)


def against_exact(identity: str, equation: str, values, exact: float, threshold: float = DEFAULT_SIGMA,
                  **extra) -> VerificationReport:
    """Compare a Monte Carlo mean with an exactly known value."""
    est = McEstimate.from_values(values)
    d = est.mean - exact
    return VerificationReport(identity, equation, est, float(exact), abs(d), sigma_units(d, est.std_error),
                              threshold, **extra)


def aggregate(identity: str, equation: str, reports: list[VerificationReport], **extra) -> VerificationReport:
    """Fold several sub-checks into one report that passes iff all of them pass."""
    worst_sigma = [r.sigma_units for r in reports if r.statistical]
    details = dict(extra.pop("details", {}))
    details["cases"] = [r.to_dict() for r in reports]
    details["n_cases"] = len(reports)
    details["n_failed"] = sum(not r.passed for r in reports)
    # Deterministic cases may carry different tolerances; report the tightest one,
    # i.e. the case with the largest discrepancy relative to its tolerance.
    exact = [r for r in reports if not r.statistical]
    tight = max(exact, key=lambda r: r.discrepancy / r.abs_tol if r.abs_tol > 0 else math.inf * (r.discrepancy > 0),
                default=None)
    return VerificationReport(
        identity, equation, None, None,
        discrepancy=tight.discrepancy if tight is not None else max((r.discrepancy for r in reports), default=0.0),
        sigma_units=max(worst_sigma) if worst_sigma else None,
        abs_tol=tight.abs_tol if tight is not None else DEFAULT_ABS_TOL,
        passed=all(r.passed for r in reports),
        details=details,
        **extra,
    )


def sigma_units(diff: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return abs(diff) / se


def write_atomic(path: str | os.PathLike, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, McEstimate):
        return x.to_dict()
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _jsonable(float(x.real)), "im": _jsonable(float(x.imag))}
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    return str(x)
