from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from rfbm_lab.errors import ConvergenceError, DomainError
from rfbm_lab.hurst import constant_response, example_response, sinusoidal_hurst, tanh_response, time_only_response
from rfbm_lab.rfbm import solve_rfbm
from rfbm_lab.rfbm.diagnostics import (
    alpha_holder_check,
    analytic_kernel_constant,
    contraction_certificate,
    extremal_indices,
    identified_exponent,
    kernel_lipschitz_check,
    kernel_norm_scaling,
    picard_contraction_mc,
    self_convergence,
    solution_norm_bound,
    solve_paths,
)
from rfbm_lab.rfbm.memory import convergence_rate_check, cumulative_memory, time_averaged_exponent_mc
from rfbm_lab.rfbm.solver import weight_matrix
from rfbm_lab.rng import brownian_increments
from rfbm_lab.tvfbm import TimeGrid, simulate_tvfbm


def _reference():
    return example_response(0.45, 0.55, 0.5, 1.0)


def test_constant_one_half_response_is_brownian_motion() -> None:
    grid = TimeGrid(horizon=1.0, n=64)
    sol = solve_rfbm(grid, constant_response(0.5), seed=2)
    expected = np.concatenate(([0.0], np.cumsum(brownian_increments(2, 0, 64, grid.delta))))

    np.testing.assert_allclose(sol.path, expected, atol=1e-12)
    assert sol.converged
    assert sol.iterations == 2
    assert np.all(sol.alpha == 0.5)


def test_time_only_response_reproduces_tvfbm() -> None:
    grid = TimeGrid(horizon=1.0, n=128)
    h = sinusoidal_hurst(0.5, 0.2, 1.0)
    sol = solve_rfbm(grid, time_only_response(h), seed=6, convention="time")

    np.testing.assert_allclose(sol.path, simulate_tvfbm(grid, h, seed=6).values, rtol=1e-10, atol=1e-12)


def test_state_dependent_solution_converges() -> None:
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=256), f, seed=1)

    assert sol.converged
    assert sol.residual_history[-1] < 1e-9
    assert sol.path[0] == 0.0
    assert f.h_min < sol.alpha.min() and sol.alpha.max() < f.h_max
    assert sol.diagnostics()["iterations"] == sol.iterations
    assert list(sol.csv_rows()[0]) == ["t", "X", "alpha"]


def test_solution_is_deterministic_per_seed() -> None:
    grid = TimeGrid(horizon=1.0, n=64)
    first = solve_rfbm(grid, tanh_response(0.5, 0.1, 2.0), seed=5)
    again = solve_rfbm(grid, tanh_response(0.5, 0.1, 2.0), seed=5)

    assert np.array_equal(first.path, again.path)
    assert first.residual_history == again.residual_history


def test_iteration_budget_exhausted() -> None:
    grid = TimeGrid(horizon=1.0, n=32)
    with pytest.raises(ConvergenceError) as excinfo:
        solve_rfbm(grid, _reference(), seed=0, max_iter=1)
    assert len(excinfo.value.history) == 1

    sol = solve_rfbm(grid, _reference(), seed=0, max_iter=1, raise_on_failure=False)
    assert not sol.converged
    assert sol.iterations == 1


def test_solver_argument_checks() -> None:
    grid = TimeGrid(horizon=1.0, n=16)
    with pytest.raises(DomainError, match="expected 16 increments"):
        solve_rfbm(grid, _reference(), seed=0, increments=np.zeros(8))
    with pytest.raises(DomainError):
        solve_rfbm(grid, _reference(), seed=0, tol=0.0)
    with pytest.raises(DomainError, match="unknown kernel convention"):
        weight_matrix(grid, np.full(16, 0.5), "other")  # type: ignore[arg-type]


def test_weight_matrix_is_strictly_lower_triangular() -> None:
    grid = TimeGrid(horizon=1.0, n=8)
    matrix = weight_matrix(grid, np.full(8, 0.7), "state")

    assert matrix.shape == (9, 8)
    assert np.all(np.triu(matrix[:-1]) == 0.0)
    assert np.all(matrix[1:][np.tril_indices(8)] > 0.0)


# contraction certificate


def test_analytic_kernel_constant_at_one_half() -> None:
    assert analytic_kernel_constant(0.5, 0.5) == pytest.approx((1.0 + 4.0 / math.e) ** 2)
    with pytest.raises(DomainError):
        analytic_kernel_constant(0.6, 0.5)


def test_certificate_contracts_on_its_horizon() -> None:
    f = _reference()
    certificate = contraction_certificate(f, 1.0)

    assert 0.0 < certificate.t0 <= 1.0
    assert certificate.t0 <= certificate.t1 / 2.0 or certificate.t0 == 1.0
    assert certificate.kappa == pytest.approx(0.5 ** (f.h_min / 2.0))
    assert certificate.kappa_t0 <= certificate.kappa * (1.0 + 1e-12)
    assert set(certificate.to_dict()) == {"c1", "kappa", "kappa_t0", "t0", "t1"}


def test_certificate_for_state_independent_response() -> None:
    certificate = contraction_certificate(constant_response(0.6), 0.8)

    assert certificate.t0 == 0.8
    assert certificate.kappa_t0 == 0.0
    assert certificate.to_dict()["t1"] is None


def test_certificate_horizon_limits() -> None:
    with pytest.raises(DomainError, match="horizon <= 1"):
        contraction_certificate(_reference(), 2.0)
    with pytest.raises(DomainError):
        contraction_certificate(_reference(), 0.0)


def test_kernel_lipschitz_ratios_are_finite() -> None:
    report = kernel_lipschitz_check(TimeGrid(horizon=1.0, n=256), _reference(), 12, seed=4)

    assert len(report.ratios) == 12
    assert all(math.isfinite(r) and r >= 0.0 for r in report.ratios)
    assert report.fitted_c_k == max(report.ratios)
    with pytest.raises(DomainError, match="n_pairs >= 10"):
        kernel_lipschitz_check(TimeGrid(horizon=1.0, n=16), _reference(), 5, seed=0)


# Monte Carlo diagnostics


def test_solve_paths_match_individual_solves() -> None:
    grid = TimeGrid(horizon=1.0, n=32)
    f = _reference()
    paths = solve_paths(grid, f, 5, seed=3, threads=2)
    single = solve_rfbm(grid, f, 3, increments=brownian_increments(3, 4, 32, grid.delta))

    assert paths.shape == (5, 33)
    assert np.array_equal(paths[4], single.path)


def test_solution_norm_bound() -> None:
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=32), f, seed=8)
    report = solution_norm_bound(sol, f, 200)

    assert report.holds
    assert report.bound == pytest.approx(1.0 + 0.55 / 0.45)
    assert 0.0 < report.time <= 1.0
    with pytest.raises(DomainError, match="n_paths >= 100"):
        solution_norm_bound(sol, f, 10)


def test_solution_norm_bound_for_brownian_motion() -> None:
    f = constant_response(0.5)
    sol = solve_rfbm(TimeGrid(horizon=0.5, n=16), f, seed=1)
    report = solution_norm_bound(sol, f, 400, threads=2)

    assert report.bound == pytest.approx(0.5 + 1.0)
    assert report.estimate == pytest.approx(0.5, abs=0.2)
    assert report.holds


def test_picard_distances_shrink() -> None:
    report = picard_contraction_mc(TimeGrid(horizon=1.0, n=32), _reference(), 40, seed=2, sweeps=3, n_batches=4)

    assert len(report.distances) == 3
    assert len(report.ratios) == 2
    assert all(r < 1.0 for r in report.ratios)
    with pytest.raises(DomainError):
        picard_contraction_mc(TimeGrid(horizon=1.0, n=16), _reference(), 4, seed=0, sweeps=1)


# pathwise scaling


def test_kernel_norm_for_brownian_equals_window_length() -> None:
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=64), constant_response(0.5), seed=1)
    scaling = kernel_norm_scaling(sol, constant_response(0.5), 0.3, 0.05)

    assert scaling.norm_sq == pytest.approx(0.05)
    assert identified_exponent(scaling, 0.05) == pytest.approx(0.5)
    assert scaling.holds


@pytest.mark.parametrize(("t", "eps"), [(0.2, 1e-1), (0.2, 1e-2), (0.5, 1e-3)])
def test_kernel_norm_scaling_sandwich(t: float, eps: float) -> None:
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=512), f, seed=3)
    scaling = kernel_norm_scaling(sol, f, t, eps)

    assert scaling.holds
    assert f.h_min <= scaling.h_minus <= scaling.h_plus <= f.h_max


def test_extremal_indices_need_grid_points() -> None:
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=8), _reference(), seed=0)
    lo, hi = extremal_indices(sol, 0.25, 0.5)

    assert lo <= hi
    with pytest.raises(DomainError, match="no grid point"):
        extremal_indices(sol, 0.26, 0.05)
    with pytest.raises(DomainError, match="leaves"):
        extremal_indices(sol, 0.9, 0.2)


def test_alpha_inherits_holder_regularity() -> None:
    f = _reference()
    result = alpha_holder_check(solve_rfbm(TimeGrid(horizon=1.0, n=256), f, seed=7), f)

    assert 0.0 < result.exponent <= f.gamma
    assert result.holds


def test_self_convergence_distance_is_finite() -> None:
    result = self_convergence(_reference(), 64, 1.0, seed=2)

    assert result.n == 64
    assert math.isfinite(result.distance)


# cumulative memory


def test_cumulative_memory_of_constant_response() -> None:
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=16), constant_response(0.6), seed=0)
    memory = cumulative_memory(sol, 0.5)

    assert memory.c_t == pytest.approx(0.3)
    assert memory.avg == pytest.approx(0.6)
    assert memory.holds
    with pytest.raises(DomainError):
        cumulative_memory(sol, 0.3)


def test_cumulative_memory_bounds_and_monotone() -> None:
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=128), f, seed=4)
    values = [cumulative_memory(sol, float(t)) for t in sol.grid.points[::8]]

    assert all(m.holds for m in values)
    assert all(b.c_t >= a.c_t for a, b in zip(values, values[1:]))


def test_cumulative_memory_envelope_comes_from_the_response() -> None:
    f = _reference()
    sol = solve_rfbm(TimeGrid(horizon=1.0, n=128), f, seed=4)
    memory = cumulative_memory(sol, 0.5)

    assert (sol.h_min, sol.h_max) == (f.h_min, f.h_max)
    assert memory.lower == pytest.approx(0.45 * 0.5)
    assert memory.upper == pytest.approx(0.55 * 0.5)
    assert not cumulative_memory(replace(sol, alpha=np.full_like(sol.alpha, 0.9)), 0.5).holds


def test_time_averaged_exponent_stays_in_range() -> None:
    f = _reference()
    result = time_averaged_exponent_mc(f, TimeGrid(horizon=1.0, n=32), 1.0, 40, seed=1)

    assert f.h_min <= result.mean <= f.h_max
    assert result.n_paths == 40
    with pytest.raises(DomainError, match="t > 0"):
        time_averaged_exponent_mc(f, TimeGrid(horizon=1.0, n=32), 0.0, 10, seed=1)


@pytest.mark.parametrize(("beta", "regime", "expected"), [(0.5, "slow", 0.5), (1.0, "critical", 1.0), (2.0, "fast", 1.0)])
def test_convergence_rate_regimes(beta: float, regime: str, expected: float) -> None:
    report = convergence_rate_check(0.5, 0.1, beta, 1.0, np.logspace(2.0, 6.0, 9))

    assert report.regime == regime
    assert report.expected_exponent == expected
    assert report.passed


def test_convergence_rate_rejects_clipped_mean() -> None:
    with pytest.raises(DomainError, match="clipped"):
        convergence_rate_check(0.5, 1.0, 0.5, 0.01, [10.0, 100.0], h_min=0.0, h_max=1.0)
    with pytest.raises(DomainError, match="above s0"):
        convergence_rate_check(0.5, 0.1, 0.5, 1.0, [0.5, 10.0])
