"""Shared report and error types used by every verifier."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


class BernsteinError(Exception):
    """Base class for library errors."""


class DomainError(BernsteinError, ValueError):
    """Argument outside the domain of a function (e.g. negative lambda)."""


class ParameterError(BernsteinError, ValueError):
    """Invalid catalog or configuration parameter."""


class ScalingViolation(BernsteinError):
    """A two-sided scaling bound failed at a lattice point."""

    def __init__(self, message: str, point: tuple | None = None):
        super().__init__(message)
        self.point = point


class ToleranceError(BernsteinError):
    """Two refinements of a numerical estimate disagree beyond tolerance."""


class QuadratureError(BernsteinError):
    """An integral failed to converge."""

    def __init__(self, message: str, error_estimate: float = math.nan):
        super().__init__(message)
        self.error_estimate = error_estimate


class AliasingError(BernsteinError):
    """A periodic grid cannot resolve a kernel within the tail tolerance."""


class UnsupportedEntry(BernsteinError):
    """Requested quantity is not available for this catalog entry."""


class ResourceLimitError(BernsteinError):
    """A configuration exceeds the configured size limits."""


class SamplingError(BernsteinError):
    """A sampler cannot be built (non-monotone CDF, undersampling)."""


@dataclass
class BoundReport:
    """Outcome of an empirical inequality check.

    ``n_hat`` is the largest observed LHS/RHS ratio on the coarse lattice and
    ``refinement_drift`` the relative change of that ratio when the lattice
    (or grid, or ensemble) is refined. The check passes when ``n_hat`` is
    finite and the drift stays within ``tolerance``.
    """

    inequality_id: str
    grid: dict[str, Any]
    n_hat: float
    refinement_drift: float
    tolerance: float = 0.05
    n_hat_refined: float = math.nan
    excluded: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (math.isfinite(self.n_hat) and math.isfinite(self.refinement_drift)
                and self.refinement_drift <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "inequality_id": self.inequality_id,
            "grid": _jsonable(self.grid),
            "n_hat": _num(self.n_hat),
            "n_hat_refined": _num(self.n_hat_refined),
            "refinement_drift": _num(self.refinement_drift),
            "tolerance": self.tolerance,
            "excluded": self.excluded,
            "pass": self.passed,
            "details": _jsonable(self.details),
        }


def relative_drift(coarse: float, fine: float) -> float:
    if not (math.isfinite(coarse) and math.isfinite(fine)):
        return math.inf
    scale = max(abs(fine), abs(coarse))
    if scale == 0.0:
        return 0.0
    return abs(fine - coarse) / scale


def _num(x: float) -> float | str:
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _jsonable(obj: Any) -> Any:
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return _num(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
