from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from rfbm_lab.errors import DomainError
from rfbm_lab.specfun import (
    gamma_fn,
    hyp2f1,
    log_control_constant,
    log_control_holds,
    log_normal_tail,
    mills_bounds,
    normal_tail,
)


@pytest.mark.parametrize("x", [0.1, 0.3, 0.5, 1.0, 1.5, 2.5, 7.25, 20.0])
def test_gamma_matches_math_gamma(x: float) -> None:
    assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-11)


def test_gamma_recurrence() -> None:
    for x in np.linspace(0.2, 9.0, 23):
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-11)


def test_gamma_rejects_non_positive() -> None:
    with pytest.raises(DomainError, match="x > 0"):
        gamma_fn(0.0)


@pytest.mark.parametrize(
    ("a", "b", "c"),
    [(0.5, 1.2, 2.3), (-0.3, 0.7, 1.4), (0.2, -0.4, 1.6), (1.1, 0.35, 2.1)],
)
@pytest.mark.parametrize("z", [-1.0, -0.75, -0.3, 0.25, 0.6])
def test_hyp2f1_matches_scipy(a: float, b: float, c: float, z: float) -> None:
    assert hyp2f1(a, b, c, z) == pytest.approx(float(special.hyp2f1(a, b, c, z)), rel=1e-10)


def test_hyp2f1_logarithm_identity() -> None:
    for z in (-0.9, -0.4, 0.3, 0.7):
        assert hyp2f1(1.0, 1.0, 2.0, z) == pytest.approx(-math.log1p(-z) / z, rel=1e-12)


def test_hyp2f1_at_zero_is_one() -> None:
    assert hyp2f1(0.3, 0.4, 1.5, 0.0) == 1.0


@pytest.mark.parametrize(
    ("args", "match"),
    [((0.5, 0.5, -2.0, 0.2), "non-positive integer"), ((0.5, 0.5, 1.5, 1.0), "z < 1"), ((0.5, 0.5, 1.5, -1.5), "z >= -1")],
)
def test_hyp2f1_domain(args: tuple[float, float, float, float], match: str) -> None:
    with pytest.raises(DomainError, match=match):
        hyp2f1(*args)


def test_normal_tail_matches_ndtr() -> None:
    for z in (0.0, 0.5, 1.0, 3.0, 8.0):
        assert normal_tail(z) == pytest.approx(float(special.ndtr(-z)), rel=1e-10)
    assert normal_tail(0.0) == pytest.approx(0.5)


@pytest.mark.parametrize("z", [2.0, 11.5, 12.5, 20.0, 40.0])
def test_log_normal_tail_matches_log_ndtr(z: float) -> None:
    assert log_normal_tail(z) == pytest.approx(float(special.log_ndtr(-z)), abs=5e-8)


def test_mills_bounds_strict_on_grid() -> None:
    for z in np.geomspace(1.05, 12.0, 200):
        bound = mills_bounds(z)
        assert bound.lower < bound.exact < bound.upper


def test_mills_bounds_lower_vanishes_at_one() -> None:
    bound = mills_bounds(1.0)
    assert bound.lower == 0.0
    assert bound.upper == pytest.approx(math.exp(-0.5) / math.sqrt(2.0 * math.pi))


def test_mills_bounds_rejects_small_z() -> None:
    with pytest.raises(DomainError, match="z >= 1"):
        mills_bounds(0.5)


def test_log_control_constant_values() -> None:
    assert log_control_constant(0.5, 1.0) == pytest.approx(1.0)
    assert log_control_constant(0.1, 2.0) == pytest.approx(10.0 / math.e)
    with pytest.raises(DomainError):
        log_control_constant(0.0, 1.0)


def test_log_control_holds_everywhere() -> None:
    for x in np.geomspace(1e-8, 1e8, 161):
        assert log_control_holds(float(x), 0.2, 0.3)
    with pytest.raises(DomainError):
        log_control_holds(0.0, 0.2, 0.3)
