"""Cumulative memory C_t = int_0^t alpha(s) ds and the decay of the time-averaged exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid

from ..errors import DomainError
from ..hurst import ResponseFunction
from ..montecarlo import mean_se
from ..tvfbm.grid import TimeGrid
from .diagnostics import solve_paths
from .solver import RfbmSolution

RateRegime = Literal["slow", "critical", "fast"]

_MAX_CLIPPED_SHARE = 0.01
_RATE_TOLERANCE = 0.05


@dataclass(frozen=True)
class CumulativeMemory:
    t: float
    c_t: float
    avg: float
    lower: float
    upper: float

    @property
    def holds(self) -> bool:
        slack = 1e-12 * max(1.0, self.t)
        return self.lower - slack <= self.c_t <= self.upper + slack


def cumulative_memory(sol: RfbmSolution, t: float) -> CumulativeMemory:
    """Trapezoidal C_t over grid points up to t; t must be a grid point.

    The envelope h_min*t <= C_t <= h_max*t uses the response bounds recorded on the solution.
    """
    k = sol.grid.index_of(t)
    pts = sol.grid.points
    c_t = float(trapezoid(sol.alpha[: k + 1], pts[: k + 1])) if k > 0 else 0.0
    avg = c_t / pts[k] if k > 0 else float(sol.alpha[0])
    return CumulativeMemory(t=float(pts[k]), c_t=c_t, avg=avg, lower=sol.h_min * float(pts[k]), upper=sol.h_max * float(pts[k]))


@dataclass(frozen=True)
class TimeAveragedExponent:
    t: float
    mean: float
    se: float
    n_paths: int


def time_averaged_exponent_mc(
    f: ResponseFunction,
    grid: TimeGrid,
    t: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> TimeAveragedExponent:
    """E[C_t]/t as the mean over paths of each path's trapezoidal average."""
    k = grid.index_of(t)
    if k == 0:
        raise DomainError("time-averaged exponent needs t > 0")
    pts = grid.points
    paths = solve_paths(grid, f, n_paths, seed, threads=threads)
    alpha = np.asarray(f(np.broadcast_to(pts, paths.shape), paths))
    averages = trapezoid(alpha[:, : k + 1], pts[: k + 1], axis=1) / pts[k]
    mean, se = mean_se(averages)
    return TimeAveragedExponent(t=float(pts[k]), mean=mean, se=se, n_paths=n_paths)


@dataclass(frozen=True)
class RateReport:
    beta: float
    regime: RateRegime
    times: tuple[float, ...]
    errors: tuple[float, ...]
    fitted_exponent: float
    expected_exponent: float

    @property
    def passed(self) -> bool:
        return abs(self.fitted_exponent - self.expected_exponent) <= _RATE_TOLERANCE


def _mean_excess(c: float, beta: float, s0: float, t: float) -> float:
    """(1/t) int_0^t (m(s) - H*) ds for m = H* + c s^-beta on [s0, t], held at m(s0) below s0."""
    head = c * s0 ** (1.0 - beta)
    if beta == 1.0:
        body = c * math.log(t / s0)
    else:
        body = c * (t ** (1.0 - beta) - s0 ** (1.0 - beta)) / (1.0 - beta)
    return (head + body) / t


def convergence_rate_check(
    h_star: float,
    c: float,
    beta: float,
    s0: float,
    t_ladder: ArrayLike,
    h_min: float = 0.0,
    h_max: float = 1.0,
) -> RateReport:
    """Decay of |mean alpha(t) - H*| for the synthetic mean m(s) = H* + c s^-beta.

    The fitted exponent is the negative log-log slope; at beta = 1 the error is divided by
    ln t first so the fit reads the 1/t factor.
    """
    if beta <= 0.0 or s0 <= 0.0:
        raise DomainError(f"beta and s0 must be > 0, got ({beta}, {s0})")
    times = np.asarray(t_ladder, dtype=np.float64)
    if times.size < 2 or np.any(times <= s0):
        raise DomainError("t_ladder needs at least two times, all above s0")
    t_max = float(times.max())
    # m is monotone on [s0, t_max], so the clipped set is an interval adjacent to s0 or t_max
    probe = np.linspace(s0, t_max, 10_001)
    m = h_star + c * probe ** (-beta)
    clipped = float(np.mean((m < h_min) | (m > h_max)))
    if clipped > _MAX_CLIPPED_SHARE:
        raise DomainError(f"synthetic mean is clipped on {clipped:.1%} of [s0, t_max]")

    errors = np.array([abs(_mean_excess(c, beta, s0, float(t))) for t in times])
    response = errors / np.log(times) if beta == 1.0 else errors
    slope, _ = np.polyfit(np.log(times), np.log(response), 1)
    regime: RateRegime = "slow" if beta < 1.0 else ("critical" if beta == 1.0 else "fast")
    return RateReport(
        beta=beta,
        regime=regime,
        times=tuple(float(t) for t in times),
        errors=tuple(float(e) for e in errors),
        fitted_exponent=float(-slope),
        expected_exponent=min(beta, 1.0),
    )
