import math
from fractions import Fraction

import numpy as np
import pytest

from projnil.errors import InputError
from projnil.formula import (
    ThetaAngles,
    TraceValue,
    nu_finite,
    nu_infinite,
    nu_matrix,
    theta_of_trace,
)


def test_theta_examples():
    assert theta_of_trace(0.5).theta == pytest.approx(math.pi / 4, abs=1e-15)
    assert theta_of_trace(1.0).theta == pytest.approx(math.pi / 3, abs=1e-15)
    for n in range(1, 9):
        assert theta_of_trace(TraceValue.from_ratio(1, n)).theta == math.pi / (n + 2)
        assert theta_of_trace(1 / n).theta == pytest.approx(math.pi / (n + 2), abs=1e-15)


def test_theta_angles_fields():
    th = theta_of_trace(Fraction(2, 5))
    assert th.phi == th.theta / 2
    assert th.cap == math.pi - 2 * th.theta
    assert th.cap >= math.pi / 3
    with pytest.raises(InputError):
        ThetaAngles.from_theta(1.2)


@pytest.mark.parametrize(
    "tau, expected",
    [
        (0.5, 0.7071067812),
        (1.0, 1.0),
        (Fraction(1, 3), 0.6180339887),
        (Fraction(2, 3), 0.8019377358),
    ],
)
def test_nu_finite_examples(tau, expected):
    assert nu_finite(tau) == pytest.approx(expected, abs=1e-10)


def test_nu_two_thirds_closed_form():
    assert nu_finite(Fraction(2, 3)) == pytest.approx(1 / (2 * math.cos(2 * math.pi / 7)), abs=1e-15)


def test_golden_ratio():
    assert nu_matrix(3, 1) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.0001, float("nan")])
def test_trace_out_of_range(bad):
    with pytest.raises(InputError):
        nu_finite(bad)


def test_trace_value_validation():
    with pytest.raises(InputError):
        TraceValue.from_ratio(0, 3)
    with pytest.raises(InputError):
        TraceValue.from_ratio(4, 3)
    with pytest.raises(InputError):
        TraceValue(0.4, Fraction(1, 2))


def test_nu_infinite():
    assert nu_infinite(False) == 0.5
    assert nu_infinite(True) == 1.0
    assert {nu_infinite(b) for b in (True, False)} <= {0.5, 1.0}


def test_monotone_and_continuous_at_zero():
    grid = np.linspace(1e-4, 1.0, 10_000)
    vals = np.array([nu_finite(t) for t in grid])
    assert np.all(np.diff(vals) > 0)
    assert np.all((vals > 0.5) & (vals <= 1.0))
    assert nu_finite(1e-12) - 0.5 < 1e-11
    # finite trace values approach the infinite-factor value 1/2
    assert abs(nu_finite(1e-8) - nu_infinite(False)) < 1e-14


def test_rational_and_real_paths_agree():
    for n in range(1, 13):
        for m in range(1, n + 1):
            assert nu_matrix(n, m) == pytest.approx(nu_finite(m / n), abs=1e-14)
