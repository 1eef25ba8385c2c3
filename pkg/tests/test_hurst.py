from __future__ import annotations

import math

import numpy as np
import pytest

from rfbm_lab.errors import DomainError
from rfbm_lab.hurst import (
    ResponseFunction,
    constant_hurst,
    constant_response,
    estimate_holder_exponent,
    example_response,
    finite_difference_dx,
    frozen_path_holder_check,
    linear_hurst,
    sinusoidal_hurst,
    sqrt_control_constant,
    sqrt_control_quotient,
    tanh_response,
    time_only_response,
    validate_response,
)
from rfbm_lab.rng import path_generator


def test_constant_hurst_scalar_and_array() -> None:
    h = constant_hurst(0.6)

    assert h(0.3) == 0.6
    assert isinstance(h(0.3), float)
    assert np.array_equal(h(np.array([0.1, 0.5])), np.array([0.6, 0.6]))
    assert h.derivative(0.4) == 0.0
    assert h.satisfies_critical_condition


def test_sinusoidal_hurst_values_and_derivatives() -> None:
    h = sinusoidal_hurst(0.5, 0.2, 2.0)

    assert h(0.7) == pytest.approx(0.5 + 0.2 * math.sin(1.4))
    assert h.derivative(0.7) == pytest.approx(0.4 * math.cos(1.4))
    assert h.second_derivative(0.7) == pytest.approx(-0.8 * math.sin(1.4))
    assert (h.h_min, h.h_max) == pytest.approx((0.3, 0.7))
    assert h.l_h == pytest.approx(0.4)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: constant_hurst(1.0),
        lambda: sinusoidal_hurst(0.5, 0.6),
        lambda: linear_hurst(0.5, 0.6),
        lambda: sinusoidal_hurst(0.5, 0.1, omega=0.0),
    ],
)
def test_hurst_factories_reject_out_of_range(factory) -> None:
    with pytest.raises(DomainError):
        factory()


def test_linear_hurst_range_follows_horizon() -> None:
    h = linear_hurst(0.5, 0.05, horizon=9.0)

    assert h.h_max == pytest.approx(0.95)
    assert h(9.0) == pytest.approx(0.95)
    assert h.constant is None
    assert linear_hurst(0.4, 0.0).constant == 0.4


def test_response_broadcasts_time_and_state() -> None:
    f = example_response(0.45, 0.55, 0.5, 1.0)
    values = f(np.array([0.1, 0.2, 0.3]), 0.0)

    assert values.shape == (3,)
    assert isinstance(f(0.2, 0.4), float)


def test_example_response_stays_strictly_inside_bounds() -> None:
    f = example_response(0.3, 0.7, 2.0, 3.0)
    rng = path_generator(11, 0)
    t = rng.uniform(0.0, 1.0, 5000)
    x = rng.normal(0.0, 10.0, 5000)
    values = np.asarray(f(t, x))

    assert values.min() > 0.3
    assert values.max() < 0.7


def test_example_response_with_equal_bounds_is_constant() -> None:
    f = example_response(0.5, 0.5, 1.0, 1.0)

    assert f.constant == 0.5
    assert f.l_h == 0.0


@pytest.mark.parametrize(
    "response",
    [
        example_response(0.45, 0.55, 0.5, 1.0),
        example_response(0.3, 0.7, 1.0, 2.0),
        tanh_response(0.5, 0.1, 2.0),
        constant_response(0.65),
        time_only_response(sinusoidal_hurst(0.5, 0.2, 1.0)),
    ],
)
def test_declared_constants_pass_audit(response: ResponseFunction) -> None:
    report = validate_response(response, 500, seed=3)

    assert report.ok, report.violations
    assert report.spatial_quotient <= response.l_h + 1e-9


def test_audit_flags_understated_lipschitz_constant() -> None:
    honest = tanh_response(0.5, 0.1, 2.0)
    understated = ResponseFunction(
        fn=honest.fn,
        l_h=0.01,
        c_h=0.0,
        gamma=1.0,
        h_min=honest.h_min,
        h_max=honest.h_max,
        dx=honest.dx,
        name="understated",
    )
    report = validate_response(understated, 500, seed=3)

    assert not report.ok
    assert any("spatial Lipschitz" in item for item in report.violations)


def test_validate_response_requires_samples() -> None:
    with pytest.raises(DomainError, match="n_samples >= 100"):
        validate_response(constant_response(0.5), 10)


def test_sqrt_control_quotient_below_constant() -> None:
    h = sinusoidal_hurst(0.5, 0.2, 3.0)

    assert sqrt_control_quotient(h, 2000, seed=5) <= sqrt_control_constant(h) + 1e-12
    assert sqrt_control_constant(h) == pytest.approx(0.6 / math.sqrt(0.6))


def test_finite_difference_matches_closed_form() -> None:
    f = example_response(0.3, 0.7, 1.5, 2.0)
    t = np.linspace(0.05, 0.95, 19)
    x = np.linspace(-2.0, 2.0, 19)

    np.testing.assert_allclose(finite_difference_dx(f, t, x), f.dx(t, x), atol=1e-8)


def test_partial_x_falls_back_to_differences() -> None:
    closed = tanh_response(0.5, 0.2, 1.0)
    bare = ResponseFunction(fn=closed.fn, l_h=closed.l_h, c_h=0.0, gamma=1.0, h_min=0.3, h_max=0.7)

    assert bare.partial_x(0.5, 0.3) == pytest.approx(closed.partial_x(0.5, 0.3), abs=1e-8)


def test_holder_exponent_of_brownian_path_is_one_half() -> None:
    n = 4096
    times = np.linspace(0.0, 1.0, n + 1)
    increments = path_generator(2, 0).normal(0.0, math.sqrt(1.0 / n), n)
    path = np.concatenate(([0.0], np.cumsum(increments)))

    assert estimate_holder_exponent(times, path) == pytest.approx(0.5, abs=0.1)


def test_holder_exponent_of_smooth_path_is_one() -> None:
    times = np.linspace(0.0, 1.0, 1025)

    assert estimate_holder_exponent(times, 3.0 * times) == pytest.approx(1.0, abs=1e-9)


def test_holder_exponent_needs_points() -> None:
    with pytest.raises(DomainError):
        estimate_holder_exponent(np.arange(4.0), np.arange(4.0))


def test_frozen_path_holder_on_lipschitz_path() -> None:
    f = example_response(0.45, 0.55, 0.5, 1.0)
    times = np.linspace(0.0, 1.0, 201)
    result = frozen_path_holder_check(f, times, np.sin(times), gamma_star=1.0, c_path=1.0)

    assert result.exponent == 1.0
    assert result.holds
    assert frozen_path_holder_check(constant_response(0.5), times, np.sin(times), 1.0, 1.0).quotient == 0.0
