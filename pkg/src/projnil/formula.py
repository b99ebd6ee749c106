"""Closed-form distance from a projection to the nilpotents.

For a nonzero projection of normalized trace tau in a finite factor the
distance is ``1 / (2 cos theta)`` with ``theta = tau*pi / (1 + 2*tau)``.
In an infinite factor it is 1/2 or 1 depending on whether the complement
projection is infinite or finite.

When tau = m/n is rational the angle is evaluated as ``m*pi / (n + 2*m)``,
which is the same floating expression as ``pi / (n + 2)`` for m = 1 and
``(n - 1)*pi / (3*n - 2)`` for m = n - 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError

_ANGLE_SLACK = 1e-15


@dataclass(frozen=True)
class TraceValue:
    """Normalized trace 0 < tau <= 1, optionally carrying the exact ratio m/n."""

    value: float
    exact: Fraction | None = None

    def __post_init__(self):
        if not (0.0 < self.value <= 1.0) or not math.isfinite(self.value):
            raise InputError(f"trace must lie in (0, 1], got {self.value}")
        if self.exact is not None:
            if not (0 < self.exact <= 1):
                raise InputError(f"rational trace must lie in (0, 1], got {self.exact}")
            if abs(float(self.exact) - self.value) > 1e-15:
                raise InputError("value does not match the exact ratio")

    @classmethod
    def from_ratio(cls, m: int, n: int) -> "TraceValue":
        if not (1 <= m <= n):
            raise InputError(f"need 1 <= m <= n, got m={m}, n={n}")
        return cls(m / n, Fraction(m, n))


def as_trace(tau) -> TraceValue:
    if isinstance(tau, TraceValue):
        return tau
    if isinstance(tau, Fraction):
        if not (0 < tau <= 1):
            raise InputError(f"trace must lie in (0, 1], got {tau}")
        return TraceValue(float(tau), tau)
    try:
        value = float(tau)
    except (TypeError, ValueError) as exc:
        raise InputError(f"not a trace value: {tau!r}") from exc
    return TraceValue(value)


@dataclass(frozen=True)
class ThetaAngles:
    """theta, phi = theta/2 and the spectral cap pi - 2*theta."""

    theta: float
    phi: float
    cap: float

    @classmethod
    def from_theta(cls, theta: float) -> "ThetaAngles":
        if not (0.0 < theta <= math.pi / 3 + _ANGLE_SLACK):
            raise InputError(f"theta must lie in (0, pi/3], got {theta}")
        return cls(theta, theta / 2, math.pi - 2 * theta)


def theta_of_trace(tau) -> ThetaAngles:
    t = as_trace(tau)
    if t.exact is not None:
        m, n = t.exact.numerator, t.exact.denominator
        theta = m * math.pi / (n + 2 * m)
    else:
        theta = t.value * math.pi / (1 + 2 * t.value)
    return ThetaAngles.from_theta(theta)


def nu_of_theta(theta: float) -> float:
    return 1.0 / (2.0 * math.cos(theta))


def nu_finite(tau) -> float:
    """Distance to the nilpotents for a projection of trace ``tau`` in a finite factor."""
    return nu_of_theta(theta_of_trace(tau).theta)


def nu_matrix(n: int, m: int) -> float:
    """Distance for a rank-``m`` projection in the n x n matrices."""
    return nu_finite(TraceValue.from_ratio(m, n))


def nu_infinite(coprojection_finite: bool) -> float:
    """Distance for a nonzero projection in an infinite factor."""
    return 1.0 if coprojection_finite else 0.5
