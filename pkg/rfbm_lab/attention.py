"""Attention weights induced by the responsive kernel, their bounds, sensitivities and residence measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .hurst import ResponseFunction
from .montecarlo import covariance_matrix, mean_se, variance_se
from .rfbm.diagnostics import solve_paths
from .rfbm.solver import RfbmSolution
from .tvfbm.grid import TimeGrid

Regime = Literal["subcritical", "critical", "supercritical"]
BoundCase = Literal["I(a)", "I(b)", "II(a)", "II(b)", "II(c)"]

_CRITICAL_TOL = 1e-12
_BOUND_RTOL = 1e-6


@dataclass(frozen=True)
class AttentionProfile:
    t: float
    edges: NDArray[np.float64]
    s_grid: NDArray[np.float64]
    rho: NDArray[np.float64]
    partition: float
    output: float
    regime: Regime
    h_t: float
    h_min: float
    h_max: float

    @property
    def delta(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def normalization(self) -> float:
        return float(np.sum(self.rho * np.diff(self.edges)))

    def header(self) -> dict[str, object]:
        return {
            "D": self.partition,
            "normalization": self.normalization,
            "regime": self.regime,
            "t": self.t,
            "Y_t": self.output,
        }


def _regime(h_t: float) -> Regime:
    if abs(h_t - 0.5) <= _CRITICAL_TOL:
        return "critical"
    return "subcritical" if h_t < 0.5 else "supercritical"


def attention_profile(sol: RfbmSolution, f: ResponseFunction, t: float) -> AttentionProfile:
    """Panel-averaged weights rho(t, s) over [0, t).

    Each panel integrates the kernel exactly with H frozen at the panel midpoint and the
    interpolated state there, so the singular end panel is captured and the weights
    integrate to one up to rounding.
    """
    grid = sol.grid
    k = grid.index_of(t)
    if k == 0:
        raise DomainError("attention weights need t > 0")
    pts = grid.points
    t = float(pts[k])
    edges = pts[: k + 1]
    mids = 0.5 * (edges[:-1] + edges[1:])
    states = 0.5 * (sol.path[:k] + sol.path[1 : k + 1])
    h = np.asarray(f(mids, states))
    p = h + 0.5
    panel = np.sqrt(2.0 * h) / p * ((t - edges[:-1]) ** p - (t - edges[1:]) ** p)
    partition = float(np.sum(panel))
    rho = panel / np.diff(edges) / partition
    h_t = float(f(t, sol.path[k]))
    return AttentionProfile(
        t=t,
        edges=edges,
        s_grid=mids,
        rho=rho,
        partition=partition,
        output=float(np.sum(states * panel) / partition),
        regime=_regime(h_t),
        h_t=h_t,
        h_min=f.h_min,
        h_max=f.h_max,
    )


def attention_csv_rows(profile: AttentionProfile) -> list[dict[str, float]]:
    return [{"s": float(s), "rho": float(r)} for s, r in zip(profile.s_grid, profile.rho)]


@dataclass(frozen=True)
class BoundConstants:
    h_min: float
    h_max: float
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float


def bound_constants(h_min: float, h_max: float) -> BoundConstants:
    if not 0.0 < h_min <= h_max < 1.0:
        raise DomainError(f"bounds must satisfy 0 < h_min <= h_max < 1, got ({h_min}, {h_max})")
    a = math.sqrt(h_min) * (h_min + 0.5) / math.sqrt(h_max)
    b = math.sqrt(h_max) * (h_max + 0.5) / math.sqrt(h_min)
    return BoundConstants(h_min=h_min, h_max=h_max, a1=a, a2=a, a3=a, a4=a, a5=a / 2.0, b1=b, b2=b, b3=b, b4=b, b5=2.0 * b)


def bound_case(t: float, lag: float) -> BoundCase:
    if t <= 1.0:
        return "I(b)" if lag == 1.0 else "I(a)"
    if lag == 1.0:
        return "II(c)"
    return "II(a)" if lag < 1.0 else "II(b)"


def pointwise_bounds(t: float, lag: float, consts: BoundConstants) -> tuple[float, float]:
    """(lower, upper) for rho(t, t - lag) in the matching case."""
    lo, hi = consts.h_min, consts.h_max
    case = bound_case(t, lag)
    with np.errstate(divide="ignore"):
        lag_ = np.float64(lag)
        if case == "I(a)":
            return float(consts.a1 * lag_ ** (hi - 0.5)), float(consts.b1 * lag_ ** (lo - hi - 1.0))
        if case == "I(b)":
            return consts.a2, consts.b2
        if case == "II(a)":
            return float(consts.a3 * lag_ ** (hi - 0.5) / t ** (hi + 0.5)), float(consts.b3 / lag_)
        if case == "II(b)":
            return float(consts.a4 * lag_ ** (lo - 0.5) / t ** (hi + 0.5)), float(consts.b4 * lag_ ** (hi - lo - 1.0))
    return consts.a5 / t ** (hi + 0.5), consts.b5 / t ** (lo + 0.5)


@dataclass(frozen=True)
class BoundViolation:
    s: float
    rho: float
    lower: float
    upper: float
    case: BoundCase


@dataclass(frozen=True)
class AttentionBoundReport:
    t: float
    checked: int
    violations: tuple[BoundViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_attention_bounds(profile: AttentionProfile, consts: BoundConstants) -> AttentionBoundReport:
    """Compare each panel weight with the extreme bounds over the panel's lags.

    A panel average lies between the smallest pointwise lower bound and the largest
    pointwise upper bound over its lags; the bounds are monotone between the case
    boundaries, so the panel ends and lag 1 (with its neighbours) are enough.
    """
    t = profile.t
    violations: list[BoundViolation] = []
    for left, right, s, rho in zip(profile.edges[:-1], profile.edges[1:], profile.s_grid, profile.rho):
        lag_lo, lag_hi = t - right, t - left
        lags = [lag_lo, lag_hi]
        if lag_lo <= 1.0 <= lag_hi:
            lags.extend([1.0, math.nextafter(1.0, 0.0), math.nextafter(1.0, 2.0)])
        pairs = [pointwise_bounds(t, lag, consts) for lag in lags if 0.0 <= lag <= t]
        lower = min(pair[0] for pair in pairs)
        upper = max(pair[1] for pair in pairs)
        if rho < lower * (1.0 - _BOUND_RTOL) or rho > upper * (1.0 + _BOUND_RTOL):
            violations.append(
                BoundViolation(s=float(s), rho=float(rho), lower=lower, upper=upper, case=bound_case(t, t - float(s)))
            )
    return AttentionBoundReport(t=t, checked=len(profile.rho), violations=tuple(violations))


# Sensitivity


def sensitivity_at(f: ResponseFunction, t: float, s: float, x: float) -> float:
    """d/dx ln K(t, s; x) = dH/dx(s, x) (1/(2H(s, x)) + ln(t - s))."""
    if s >= t:
        raise DomainError(f"sensitivity requires s < t, got s={s}, t={t}")
    h = float(f(s, x))
    return float(f.partial_x(s, x)) * (1.0 / (2.0 * h) + math.log(t - s))


def sensitivity(sol: RfbmSolution, f: ResponseFunction, t: float, s: float) -> float:
    if s >= t:
        raise DomainError(f"sensitivity requires s < t, got s={s}, t={t}")
    if s < 0.0 or t > sol.grid.horizon:
        raise DomainError(f"({s}, {t}) leaves [0, {sol.grid.horizon}]")
    state = float(np.interp(s, sol.grid.points, sol.path))
    return sensitivity_at(f, t, s, state)


def relative_sensitivity(sol: RfbmSolution, f: ResponseFunction, t: float, s1: float, s2: float) -> float:
    if not 0.0 <= s1 < s2 < t:
        raise DomainError(f"relative_sensitivity requires 0 <= s1 < s2 < t, got ({s1}, {s2}, {t})")
    return sensitivity(sol, f, t, s1) - sensitivity(sol, f, t, s2)


# Residence and volatility


def _check_interval(interval: tuple[float, float]) -> tuple[float, float]:
    lo, hi = float(interval[0]), float(interval[1])
    if lo > hi:
        raise DomainError(f"interval needs lo <= hi, got ({lo}, {hi})")
    return lo, hi


def _indicators(values: NDArray[np.float64], interval: tuple[float, float]) -> NDArray[np.float64]:
    lo, hi = _check_interval(interval)
    return ((values >= lo) & (values < hi)).astype(np.float64)


def residence_measure(sol: RfbmSolution, interval: tuple[float, float], t: float) -> tuple[float, float]:
    """(R_I, mu_I) with half-open [lo, hi) indicators at left panel endpoints."""
    k = sol.grid.index_of(t)
    if k == 0:
        return 0.0, 0.0
    count = float(np.sum(_indicators(sol.path[:k], interval)))
    mu = count / k
    return mu * float(sol.grid.points[k]), mu


def residence_partition(sol: RfbmSolution, cuts: list[float], t: float) -> list[float]:
    """mu over the cells (-inf, c1), [c1, c2), ..., [cm, inf) of a sorted cut list."""
    ordered = sorted(cuts)
    bounds = [-math.inf, *ordered, math.inf]
    return [residence_measure(sol, (lo, hi), t)[1] for lo, hi in zip(bounds[:-1], bounds[1:])]


def _mean_intensity(paths: NDArray[np.float64], interval: tuple[float, float], k: int) -> NDArray[np.float64]:
    return _indicators(paths[:, :k], interval)


@dataclass(frozen=True)
class VolatilityReport:
    v: float
    se: float
    cov_integral: float
    cov_se: float

    @property
    def within_quarter(self) -> bool:
        return self.v <= 0.25 + 3.0 * self.se

    @property
    def agree(self) -> bool:
        return abs(self.v - self.cov_integral) <= 3.0 * math.hypot(self.se, self.cov_se) + 1e-15


def volatility_from_paths(
    first: NDArray[np.float64],
    second: NDArray[np.float64],
    interval: tuple[float, float],
    k: int,
) -> VolatilityReport:
    """Both volatility estimators from two disjoint batches of solved paths, panels 0..k-1."""
    if k < 1:
        raise DomainError("volatility needs at least one panel")
    direct = _mean_intensity(first, interval, k)
    indirect = _mean_intensity(second, interval, k)
    v, se = variance_se(direct.mean(axis=1))
    cov_integral = float(np.sum(covariance_matrix(indirect))) / (k * k)
    _, cov_se = variance_se(indirect.mean(axis=1))
    return VolatilityReport(v=v, se=se, cov_integral=cov_integral, cov_se=cov_se)


def volatility_mc(
    f: ResponseFunction,
    grid: TimeGrid,
    interval: tuple[float, float],
    t: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> VolatilityReport:
    """Var[mu_I(t)] directly, and as (1/k^2) sum_ij Cov(1_i, 1_j) on an independent batch of paths."""
    if n_paths < 500:
        raise DomainError(f"volatility_mc requires n_paths >= 500, got {n_paths}")
    k = grid.index_of(t)
    if k == 0:
        raise DomainError("volatility needs t > 0")
    paths = solve_paths(grid, f, 2 * n_paths, seed, threads=threads)
    return volatility_from_paths(paths[:n_paths], paths[n_paths:], interval, k)


@dataclass(frozen=True)
class ResidenceExpectation:
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float

    @property
    def agree(self) -> bool:
        return abs(self.lhs - self.rhs) <= 3.0 * math.hypot(self.lhs_se, self.rhs_se) + 1e-12


def expected_residence_check(
    f: ResponseFunction,
    grid: TimeGrid,
    interval: tuple[float, float],
    t: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> ResidenceExpectation:
    """E[R_I(t)] as a mean of pathwise residences against the time integral of marginal probabilities.

    The two sides use disjoint path batches.
    """
    if n_paths < 500:
        raise DomainError(f"expected_residence_check requires n_paths >= 500, got {n_paths}")
    k = grid.index_of(t)
    if k == 0:
        raise DomainError("residence needs t > 0")
    delta = grid.delta
    paths = solve_paths(grid, f, 2 * n_paths, seed, threads=threads)
    first = _mean_intensity(paths[:n_paths], interval, k)
    second = _mean_intensity(paths[n_paths:], interval, k)
    lhs, lhs_se = mean_se(first.sum(axis=1) * delta)
    probabilities = second.mean(axis=0)
    rhs = float(np.sum(probabilities) * delta)
    _, rhs_se = mean_se(second.sum(axis=1) * delta)
    return ResidenceExpectation(lhs=lhs, lhs_se=lhs_se, rhs=rhs, rhs_se=rhs_se)
