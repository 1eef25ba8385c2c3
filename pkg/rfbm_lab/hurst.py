"""Hurst functions H(t) and response functions H(t, x) with their declared regularity constants."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .rng import path_generator

TimeFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]
StateFn = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]

_AUDIT_MARGIN = 1e-9
_FD_STEP = 1e-6


def _check_bounds(h_min: float, h_max: float) -> None:
    if not 0.0 < h_min <= h_max < 1.0:
        raise DomainError(f"bounds must satisfy 0 < h_min <= h_max < 1, got ({h_min}, {h_max})")


def _output(t: ArrayLike, values: NDArray[np.float64]) -> float | NDArray[np.float64]:
    if np.ndim(t) == 0 and np.ndim(values) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class HurstFunction:
    fn: TimeFn
    gamma: float
    c_h: float
    h_min: float
    h_max: float
    horizon: float = 1.0
    deriv: TimeFn | None = None
    second_deriv: TimeFn | None = None
    l_h: float | None = None
    constant: float | None = None
    name: str = "custom"

    def __post_init__(self) -> None:
        _check_bounds(self.h_min, self.h_max)
        if self.gamma <= 0.0 or self.c_h < 0.0:
            raise DomainError(f"{self.name}: gamma must be > 0 and c_h >= 0")
        if self.horizon <= 0.0:
            raise DomainError(f"{self.name}: horizon must be > 0")

    def __call__(self, t: ArrayLike) -> float | NDArray[np.float64]:
        arr = np.asarray(t, dtype=np.float64)
        return _output(t, np.asarray(self.fn(arr), dtype=np.float64))

    def derivative(self, t: ArrayLike) -> float | NDArray[np.float64]:
        if self.deriv is None:
            raise DomainError(f"{self.name}: no derivative available")
        arr = np.asarray(t, dtype=np.float64)
        return _output(t, np.asarray(self.deriv(arr), dtype=np.float64) + np.zeros_like(arr))

    def second_derivative(self, t: ArrayLike) -> float | NDArray[np.float64]:
        if self.second_deriv is None:
            raise DomainError(f"{self.name}: no second derivative available")
        arr = np.asarray(t, dtype=np.float64)
        return _output(t, np.asarray(self.second_deriv(arr), dtype=np.float64) + np.zeros_like(arr))

    @property
    def satisfies_critical_condition(self) -> bool:
        return self.constant is not None or self.gamma > self.h_max


@dataclass(frozen=True)
class ResponseFunction:
    fn: StateFn
    l_h: float
    c_h: float
    gamma: float
    h_min: float
    h_max: float
    horizon: float = 1.0
    dx: StateFn | None = None
    l_dh: float | None = None
    constant: float | None = None
    time_view: HurstFunction | None = field(default=None, compare=False)
    name: str = "custom"

    def __post_init__(self) -> None:
        _check_bounds(self.h_min, self.h_max)
        if self.l_h < 0.0 or self.c_h < 0.0 or self.gamma <= 0.0:
            raise DomainError(f"{self.name}: l_h, c_h must be >= 0 and gamma > 0")
        if self.horizon <= 0.0:
            raise DomainError(f"{self.name}: horizon must be > 0")

    def __call__(self, t: ArrayLike, x: ArrayLike) -> float | NDArray[np.float64]:
        tt, xx = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(x, dtype=np.float64))
        values = np.asarray(self.fn(tt, xx), dtype=np.float64) + np.zeros_like(tt)
        return _output(t if np.ndim(t) else x, values)

    def partial_x(self, t: ArrayLike, x: ArrayLike) -> float | NDArray[np.float64]:
        """Spatial derivative: closed form when declared, Richardson-extrapolated differences otherwise."""
        if self.dx is not None:
            tt, xx = np.broadcast_arrays(np.asarray(t, dtype=np.float64), np.asarray(x, dtype=np.float64))
            values = np.asarray(self.dx(tt, xx), dtype=np.float64) + np.zeros_like(tt)
            return _output(t if np.ndim(t) else x, values)
        return finite_difference_dx(self, t, x)

    @property
    def state_independent(self) -> bool:
        return self.l_h == 0.0


# Hurst function factories


def constant_hurst(h: float, horizon: float = 1.0) -> HurstFunction:
    _check_bounds(h, h)
    return HurstFunction(
        fn=lambda t: np.full(np.shape(t), h),
        gamma=1.0,
        c_h=0.0,
        h_min=h,
        h_max=h,
        horizon=horizon,
        deriv=lambda t: np.zeros(np.shape(t)),
        second_deriv=lambda t: np.zeros(np.shape(t)),
        l_h=0.0,
        constant=h,
        name="constant",
    )


def sinusoidal_hurst(h0: float = 0.5, amplitude: float = 0.2, omega: float = 1.0, horizon: float = 1.0) -> HurstFunction:
    """H(t) = h0 + amplitude * sin(omega t); Lipschitz with constant |amplitude| omega."""
    spread = abs(amplitude)
    _check_bounds(h0 - spread, h0 + spread)
    if omega <= 0.0:
        raise DomainError(f"omega must be > 0, got {omega}")
    return HurstFunction(
        fn=lambda t: h0 + amplitude * np.sin(omega * t),
        gamma=1.0,
        c_h=spread * omega,
        h_min=h0 - spread,
        h_max=h0 + spread,
        horizon=horizon,
        deriv=lambda t: amplitude * omega * np.cos(omega * t),
        second_deriv=lambda t: -amplitude * omega * omega * np.sin(omega * t),
        l_h=spread * omega,
        name="sinusoidal-time",
    )


def linear_hurst(h0: float, slope: float, horizon: float = 1.0) -> HurstFunction:
    end = h0 + slope * horizon
    h_min, h_max = min(h0, end), max(h0, end)
    _check_bounds(h_min, h_max)
    return HurstFunction(
        fn=lambda t: h0 + slope * t,
        gamma=1.0,
        c_h=abs(slope),
        h_min=h_min,
        h_max=h_max,
        horizon=horizon,
        deriv=lambda t: np.full(np.shape(t), slope),
        second_deriv=lambda t: np.zeros(np.shape(t)),
        l_h=abs(slope),
        constant=h0 if slope == 0.0 else None,
        name="linear-time",
    )


# Response function factories


def constant_response(h: float, horizon: float = 1.0) -> ResponseFunction:
    _check_bounds(h, h)
    return ResponseFunction(
        fn=lambda t, x: np.full(np.shape(t), h),
        l_h=0.0,
        c_h=0.0,
        gamma=1.0,
        h_min=h,
        h_max=h,
        horizon=horizon,
        dx=lambda t, x: np.zeros(np.shape(t)),
        l_dh=0.0,
        constant=h,
        time_view=constant_hurst(h, horizon),
        name="constant",
    )


def time_only_response(h: HurstFunction) -> ResponseFunction:
    return ResponseFunction(
        fn=lambda t, x: h.fn(t),
        l_h=0.0,
        c_h=h.c_h,
        gamma=h.gamma,
        h_min=h.h_min,
        h_max=h.h_max,
        horizon=h.horizon,
        dx=lambda t, x: np.zeros(np.shape(t)),
        l_dh=0.0,
        constant=h.constant,
        time_view=h,
        name=h.name,
    )


def tanh_response(h0: float = 0.5, amplitude: float = 0.1, beta: float = 1.0, horizon: float = 1.0) -> ResponseFunction:
    """H(t, x) = h0 + amplitude * tanh(beta x)."""
    spread = abs(amplitude)
    _check_bounds(h0 - spread, h0 + spread)
    if beta <= 0.0:
        raise DomainError(f"beta must be > 0, got {beta}")
    lipschitz = spread * beta
    return ResponseFunction(
        fn=lambda t, x: h0 + amplitude * np.tanh(beta * x),
        l_h=lipschitz,
        c_h=0.0,
        gamma=1.0,
        h_min=h0 - spread,
        h_max=h0 + spread,
        horizon=horizon,
        dx=lambda t, x: amplitude * beta * (1.0 - np.tanh(beta * x) ** 2),
        l_dh=lipschitz,
        time_view=constant_hurst(h0, horizon),
        name="tanh-spatial",
    )


def example_response(h_min: float, h_max: float, alpha: float, omega: float, horizon: float = 1.0) -> ResponseFunction:
    """H(t, x) = h_min + (h_max - h_min)(1 + tanh(alpha x) cos(omega t)) / (2 + exp(-t)).

    Values stay strictly inside (h_min, h_max) whenever h_min < h_max.
    """
    _check_bounds(h_min, h_max)
    if alpha <= 0.0 or omega <= 0.0:
        raise DomainError(f"alpha and omega must be > 0, got ({alpha}, {omega})")
    width = h_max - h_min

    def fn(t: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        return h_min + width * (1.0 + np.tanh(alpha * x) * np.cos(omega * t)) / (2.0 + np.exp(-t))

    def dx(t: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        return width * alpha * (1.0 - np.tanh(alpha * x) ** 2) * np.cos(omega * t) / (2.0 + np.exp(-t))

    lipschitz = alpha * width / 2.0
    return ResponseFunction(
        fn=fn,
        l_h=lipschitz,
        c_h=width * (3.0 * omega + 2.0) / 4.0,
        gamma=1.0,
        h_min=h_min,
        h_max=h_max,
        horizon=horizon,
        dx=dx,
        l_dh=lipschitz,
        constant=h_min if width == 0.0 else None,
        time_view=HurstFunction(
            fn=lambda t: fn(t, np.zeros(np.shape(t))),
            gamma=1.0,
            c_h=width * (3.0 * omega + 2.0) / 4.0,
            h_min=h_min,
            h_max=h_max,
            horizon=horizon,
            l_h=width * (3.0 * omega + 2.0) / 4.0,
            name="example61",
        ),
        name="example61",
    )


# Audits


@dataclass(frozen=True)
class ValidationReport:
    name: str
    n_samples: int
    spatial_quotient: float
    temporal_quotient: float
    range_min: float
    range_max: float
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _separations(rng: np.random.Generator, n: int) -> NDArray[np.float64]:
    return 10.0 ** rng.uniform(-6.0, -1.0, size=n)


def validate_response(f: ResponseFunction, n_samples: int, seed: int = 0, x_span: float = 5.0) -> ValidationReport:
    """Audit the declared constants of a response function on random sample pairs."""
    if n_samples < 100:
        raise DomainError(f"validate_response requires n_samples >= 100, got {n_samples}")
    rng = path_generator(seed, 0)
    t = rng.uniform(0.0, f.horizon, size=n_samples)
    x = rng.uniform(-x_span, x_span, size=n_samples)
    d = _separations(rng, n_samples) * min(1.0, f.horizon)

    base = np.asarray(f(t, x))
    spatial = np.abs(np.asarray(f(t, x + d)) - base) / d

    t_shift = np.where(t + d <= f.horizon, t + d, t - d)
    temporal = np.abs(np.asarray(f(t_shift, x)) - base) / np.abs(t_shift - t) ** f.gamma

    spatial_quotient = float(spatial.max())
    temporal_quotient = float(temporal.max())
    range_min = float(base.min())
    range_max = float(base.max())

    violations: list[str] = []
    if spatial_quotient > f.l_h + _AUDIT_MARGIN:
        violations.append(f"spatial Lipschitz quotient {spatial_quotient:.6g} exceeds declared l_h={f.l_h:.6g}")
    if temporal_quotient > f.c_h + _AUDIT_MARGIN:
        violations.append(f"temporal Holder quotient {temporal_quotient:.6g} exceeds declared c_h={f.c_h:.6g}")
    if range_min < f.h_min - _AUDIT_MARGIN or range_max > f.h_max + _AUDIT_MARGIN:
        violations.append(f"range [{range_min:.6g}, {range_max:.6g}] leaves [{f.h_min:.6g}, {f.h_max:.6g}]")
    if range_min <= 0.0 or range_max >= 1.0:
        violations.append("values leave the open interval (0, 1)")
    if f.l_dh is not None:
        slope = np.abs(np.asarray(f.partial_x(t, x)))
        if float(slope.max()) > f.l_dh + _AUDIT_MARGIN:
            violations.append(f"|dH/dx| reaches {float(slope.max()):.6g} above declared l_dh={f.l_dh:.6g}")

    return ValidationReport(
        name=f.name,
        n_samples=n_samples,
        spatial_quotient=spatial_quotient,
        temporal_quotient=temporal_quotient,
        range_min=range_min,
        range_max=range_max,
        violations=tuple(violations),
    )


def sqrt_control_constant(f: HurstFunction) -> float:
    """D = C_H / sqrt(2 h_min), the Holder constant of sqrt(2 H(t))."""
    return f.c_h / math.sqrt(2.0 * f.h_min)


def sqrt_control_quotient(f: HurstFunction, n_pairs: int, seed: int = 0) -> float:
    """Largest sampled |sqrt(2H(t+e)) - sqrt(2H(t))| / e^gamma."""
    rng = path_generator(seed, 1)
    eps = _separations(rng, n_pairs) * f.horizon
    t = rng.uniform(0.0, 1.0, size=n_pairs) * (f.horizon - eps)
    lhs = np.abs(np.sqrt(2.0 * np.asarray(f(t + eps))) - np.sqrt(2.0 * np.asarray(f(t))))
    return float((lhs / eps**f.gamma).max())


def finite_difference_dx(f: ResponseFunction, t: ArrayLike, x: ArrayLike, step: float = _FD_STEP) -> float | NDArray[np.float64]:
    tt = np.asarray(t, dtype=np.float64)
    xx = np.asarray(x, dtype=np.float64)

    def central(h: float) -> NDArray[np.float64]:
        return (np.asarray(f.fn(tt + 0.0 * xx, xx + h)) - np.asarray(f.fn(tt + 0.0 * xx, xx - h))) / (2.0 * h)

    values = (4.0 * central(step / 2.0) - central(step)) / 3.0
    return _output(t if np.ndim(t) else x, np.asarray(values, dtype=np.float64))


def estimate_holder_exponent(times: ArrayLike, values: ArrayLike, max_lag: int = 32) -> float:
    """Empirical path exponent from the slope of the log-log second-order variogram."""
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if t.shape != y.shape or t.size < 8:
        raise DomainError("estimate_holder_exponent needs matching arrays of at least 8 points")
    lags = [lag for lag in (2**k for k in range(16)) if lag <= min(max_lag, t.size // 4)]
    if len(lags) < 2:
        raise DomainError("path too short for a variogram fit")
    step = float(t[1] - t[0])
    variogram = [float(np.mean((y[lag:] - y[:-lag]) ** 2)) for lag in lags]
    slope, _ = np.polyfit(np.log(np.asarray(lags) * step), np.log(variogram), 1)
    return float(slope / 2.0)


@dataclass(frozen=True)
class FrozenPathHolder:
    exponent: float
    quotient: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.quotient <= self.bound + _AUDIT_MARGIN


def frozen_path_holder_check(
    f: ResponseFunction,
    times: ArrayLike,
    path: ArrayLike,
    gamma_star: float,
    c_path: float,
) -> FrozenPathHolder:
    """Holder quotient of s -> H(s, Y(s)) along a path with known Holder exponent and constant.

    Pairs are restricted to |s - r| <= 1 where the combined constant applies.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(path, dtype=np.float64)
    exponent = min(f.gamma, gamma_star)
    h = np.asarray(f(t, y))
    gap = np.abs(t[:, None] - t[None, :])
    mask = (gap > 0.0) & (gap <= 1.0)
    diff = np.abs(h[:, None] - h[None, :])
    quotient = float((diff[mask] / gap[mask] ** exponent).max()) if mask.any() else 0.0
    bound = max(f.l_h * c_path + f.c_h, 1.0)
    return FrozenPathHolder(exponent=exponent, quotient=quotient, bound=bound)
