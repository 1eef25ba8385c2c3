"""Lamperti-style time change: dphi/dt = phi / (H(phi) + phi ln(phi) H'(phi)), alpha(t) = phi^-H(phi)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DegeneracyError, DomainError, StepSizeError
from ..hurst import HurstFunction

_MIN_DENOMINATOR = 1e-6


@dataclass(frozen=True)
class LampertiTrajectory:
    times: NDArray[np.float64]
    phi: NDArray[np.float64]
    alpha: NDArray[np.float64]
    step: float
    max_local_error: float

    def rows(self) -> list[dict[str, float]]:
        return [
            {"t": float(t), "phi": float(p), "alpha": float(a)}
            for t, p, a in zip(self.times, self.phi, self.alpha)
        ]


def _rhs(h: HurstFunction, phi: float, min_denominator: float) -> float:
    h_phi = float(h(phi))
    denominator = h_phi + phi * math.log(phi) * float(h.derivative(phi))
    if abs(denominator) < min_denominator:
        raise DegeneracyError(f"denominator {denominator:.3g} below {min_denominator:g} at phi={phi:.6g}")
    return phi / denominator


def _rk4(h: HurstFunction, phi: float, step: float, min_denominator: float) -> float:
    k1 = _rhs(h, phi, min_denominator)
    k2 = _rhs(h, phi + 0.5 * step * k1, min_denominator)
    k3 = _rhs(h, phi + 0.5 * step * k2, min_denominator)
    k4 = _rhs(h, phi + step * k3, min_denominator)
    return phi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def lamperti_solve(
    h: HurstFunction,
    phi0: float,
    t_end: float,
    step: float,
    tol: float = 1e-8,
    min_denominator: float = _MIN_DENOMINATOR,
) -> LampertiTrajectory:
    """Fixed-step RK4 with a halved-step Richardson monitor on every step."""
    if phi0 <= 0.0:
        raise DomainError(f"phi0 must be > 0, got {phi0}")
    if step <= 0.0 or t_end <= 0.0:
        raise DomainError("step and t_end must be > 0")
    if h.deriv is None:
        raise DomainError(f"{h.name}: the time change needs H'")
    n_steps = max(1, int(round(t_end / step)))
    step = t_end / n_steps
    phi = np.empty(n_steps + 1)
    phi[0] = phi0
    worst = 0.0
    for k in range(n_steps):
        full = _rk4(h, phi[k], step, min_denominator)
        half = _rk4(h, _rk4(h, phi[k], 0.5 * step, min_denominator), 0.5 * step, min_denominator)
        local_error = abs(half - full) / 15.0
        worst = max(worst, local_error)
        if local_error > tol * max(1.0, abs(half)):
            raise StepSizeError(f"local error {local_error:.3g} exceeds tol at t={k * step:.6g}; reduce step")
        if half <= 0.0:
            raise DegeneracyError(f"phi left (0, inf) at t={(k + 1) * step:.6g}")
        phi[k + 1] = half + (half - full) / 15.0
    times = np.linspace(0.0, t_end, n_steps + 1)
    alpha = phi ** (-np.asarray(h(phi)))
    return LampertiTrajectory(times=times, phi=phi, alpha=alpha, step=step, max_local_error=worst)


def lamperti_variance_product(trajectory: LampertiTrajectory, h: HurstFunction) -> NDArray[np.float64]:
    """alpha(t)^2 phi^(2H(phi)): the variance of alpha(t) B(phi(t)), identically one."""
    return trajectory.alpha**2 * trajectory.phi ** (2.0 * np.asarray(h(trajectory.phi)))


def lamperti_transform(trajectory: LampertiTrajectory, values_at_phi: ArrayLike) -> NDArray[np.float64]:
    """X_t = alpha(t) B(phi(t)) given B sampled at the trajectory's phi values."""
    values = np.asarray(values_at_phi, dtype=np.float64)
    if values.shape[-1] != trajectory.phi.size:
        raise DomainError("values_at_phi must have one entry per trajectory point")
    return trajectory.alpha * values


def alpha_decay_residual(trajectory: LampertiTrajectory) -> NDArray[np.float64]:
    """Central-difference d(alpha)/dt + alpha at interior points."""
    a = trajectory.alpha
    return (a[2:] - a[:-2]) / (2.0 * trajectory.step) + a[1:-1]
