from __future__ import annotations

import math

import numpy as np
import pytest

from rfbm_lab.attention import (
    attention_csv_rows,
    attention_profile,
    bound_case,
    bound_constants,
    check_attention_bounds,
    expected_residence_check,
    pointwise_bounds,
    relative_sensitivity,
    residence_measure,
    residence_partition,
    sensitivity,
    sensitivity_at,
    volatility_from_paths,
    volatility_mc,
)
from rfbm_lab.errors import DomainError
from rfbm_lab.hurst import constant_response, example_response
from rfbm_lab.rfbm import solve_rfbm
from rfbm_lab.tvfbm import TimeGrid


def _reference(horizon: float = 1.0):
    return example_response(0.45, 0.55, 0.5, 1.0, horizon)


def _solution(horizon: float = 1.0, n: int = 128, seed: int = 3):
    f = _reference(horizon)
    return f, solve_rfbm(TimeGrid(horizon=horizon, n=n), f, seed, raise_on_failure=False)


def test_profile_is_a_probability_density() -> None:
    f, sol = _solution()
    profile = attention_profile(sol, f, 0.5)

    assert profile.normalization == pytest.approx(1.0, abs=1e-12)
    assert np.all(profile.rho > 0.0)
    assert profile.s_grid.size == 64
    assert profile.partition > 0.0
    assert f.h_min < profile.h_t < f.h_max
    assert set(profile.header()) == {"D", "normalization", "regime", "t", "Y_t"}
    assert list(attention_csv_rows(profile)[0]) == ["s", "rho"]


def test_brownian_profile_is_uniform() -> None:
    f = constant_response(0.5)
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=32), f, seed=0)
    profile = attention_profile(sol, f, 0.5)

    np.testing.assert_allclose(profile.rho, 2.0, rtol=1e-12)
    assert profile.regime == "critical"
    assert profile.partition == pytest.approx(0.5)


@pytest.mark.parametrize(("level", "regime"), [(0.3, "subcritical"), (0.7, "supercritical")])
def test_profile_regime_follows_exponent(level: float, regime: str) -> None:
    f = constant_response(level)
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=16), f, seed=0)

    assert attention_profile(sol, f, 1.0).regime == regime


def test_profile_needs_positive_grid_time() -> None:
    f, sol = _solution(n=16)
    with pytest.raises(DomainError, match="t > 0"):
        attention_profile(sol, f, 0.0)
    with pytest.raises(DomainError, match="not a point of the grid"):
        attention_profile(sol, f, 0.3)


# bounds


def test_bound_constants_for_brownian_exponent() -> None:
    consts = bound_constants(0.5, 0.5)

    assert (consts.a1, consts.b1) == pytest.approx((1.0, 1.0))
    assert consts.a5 == pytest.approx(0.5)
    assert consts.b5 == pytest.approx(2.0)
    with pytest.raises(DomainError):
        bound_constants(0.5, 1.0)


@pytest.mark.parametrize(
    ("t", "lag", "case"),
    [(0.5, 0.2, "I(a)"), (1.0, 1.0, "I(b)"), (2.0, 0.5, "II(a)"), (2.0, 1.5, "II(b)"), (2.0, 1.0, "II(c)")],
)
def test_bound_case_selection(t: float, lag: float, case: str) -> None:
    assert bound_case(t, lag) == case


def test_pointwise_bounds_are_ordered() -> None:
    consts = bound_constants(0.45, 0.55)
    for t, lag in ((0.5, 0.2), (1.0, 1.0), (2.0, 0.5), (2.0, 1.5), (2.0, 1.0)):
        lower, upper = pointwise_bounds(t, lag, consts)
        assert 0.0 < lower < upper


def test_lower_bound_vanishes_at_zero_lag() -> None:
    lower, upper = pointwise_bounds(0.5, 0.0, bound_constants(0.45, 0.55))

    assert lower == 0.0
    assert math.isinf(upper)


@pytest.mark.parametrize("t", [0.3, 0.8, 1.0, 1.5, 3.0])
def test_profile_respects_case_bounds(t: float) -> None:
    f, sol = _solution(horizon=3.0, n=300, seed=11)
    report = check_attention_bounds(attention_profile(sol, f, t), bound_constants(f.h_min, f.h_max))

    assert report.ok, report.violations
    assert report.checked == round(t / 0.01)


def test_bound_check_flags_out_of_range_weights() -> None:
    f, sol = _solution(n=64)
    profile = attention_profile(sol, f, 0.5)
    tampered = type(profile)(**{**profile.__dict__, "rho": profile.rho * 100.0})

    assert not check_attention_bounds(tampered, bound_constants(f.h_min, f.h_max)).ok


# sensitivity


def _log_kernel(f, t: float, s: float, x: float) -> float:
    h = float(f(s, x))
    return 0.5 * math.log(2.0 * h) + (h - 0.5) * math.log(t - s)


@pytest.mark.parametrize(("t", "s", "x"), [(0.5, 0.1, 0.3), (1.0, 0.9, -1.2), (2.5, 0.4, 2.0)])
def test_sensitivity_matches_log_kernel_differences(t: float, s: float, x: float) -> None:
    f = _reference(3.0)
    step = 1e-5
    difference = (_log_kernel(f, t, s, x + step) - _log_kernel(f, t, s, x - step)) / (2.0 * step)

    assert sensitivity_at(f, t, s, x) == pytest.approx(difference, abs=1e-6)


def test_sensitivity_vanishes_without_state_dependence() -> None:
    f = constant_response(0.6)
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=16), f, seed=0)

    assert sensitivity(sol, f, 1.0, 0.25) == 0.0
    assert relative_sensitivity(sol, f, 1.0, 0.1, 0.5) == 0.0


def test_sensitivity_domain() -> None:
    f, sol = _solution(n=16)
    with pytest.raises(DomainError, match="s < t"):
        sensitivity_at(f, 0.5, 0.5, 0.0)
    with pytest.raises(DomainError, match="leaves"):
        sensitivity(sol, f, 2.0, 0.5)
    with pytest.raises(DomainError, match="s1 < s2 < t"):
        relative_sensitivity(sol, f, 1.0, 0.5, 0.2)


# residence


def test_residence_over_whole_line() -> None:
    f, sol = _solution(n=64)
    residence, mu = residence_measure(sol, (-math.inf, math.inf), 0.5)

    assert mu == 1.0
    assert residence == pytest.approx(0.5)
    assert residence_measure(sol, (0.0, 1.0), 0.0) == (0.0, 0.0)


def test_residence_partition_conserves_mass() -> None:
    f, sol = _solution(n=128, seed=9)
    masses = residence_partition(sol, [0.5, -0.5, 0.0], 1.0)

    assert len(masses) == 4
    assert math.fsum(masses) == pytest.approx(1.0, abs=1e-12)
    assert all(0.0 <= m <= 1.0 for m in masses)


def test_residence_rejects_reversed_interval() -> None:
    f, sol = _solution(n=16)
    with pytest.raises(DomainError, match="lo <= hi"):
        residence_measure(sol, (1.0, 0.0), 0.5)


def test_residence_uses_left_endpoints() -> None:
    f = constant_response(0.5)
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=16), f, seed=0)

    # X_0 = 0 lies in [0, inf)
    assert residence_measure(sol, (0.0, math.inf), 1.0 / 16.0) == (pytest.approx(1.0 / 16.0), 1.0)


# volatility


def test_volatility_whole_line_is_exactly_zero() -> None:
    paths = np.random.default_rng(0).normal(size=(20, 9))
    report = volatility_from_paths(paths[:10], paths[10:], (-math.inf, math.inf), 8)

    assert report.v == 0.0
    assert report.cov_integral == 0.0
    with pytest.raises(DomainError):
        volatility_from_paths(paths[:10], paths[10:], (0.0, 1.0), 0)


def test_residence_volatility_is_at_most_a_quarter() -> None:
    report = volatility_mc(constant_response(0.7), TimeGrid(horizon=1.0, n=32), (0.0, math.inf), 1.0, 500, seed=4)

    assert report.within_quarter
    assert 0.0 < report.v <= 0.25 + 3.0 * report.se
    assert report.cov_integral > 0.0


def test_monte_carlo_helpers_need_paths() -> None:
    grid = TimeGrid(horizon=1.0, n=16)
    with pytest.raises(DomainError, match="n_paths >= 500"):
        volatility_mc(_reference(), grid, (0.0, 1.0), 1.0, 100, seed=0)
    with pytest.raises(DomainError, match="n_paths >= 500"):
        expected_residence_check(_reference(), grid, (0.0, 1.0), 1.0, 100, seed=0)
