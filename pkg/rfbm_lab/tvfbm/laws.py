"""Closed-form laws: variance, local increments, local non-determinism, large deviations, a.s. envelope."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..hurst import HurstFunction
from ..rng import path_generator
from ..specfun import log_normal_tail

logger = logging.getLogger(__name__)

_HORIZON_SLACK = 1e-12
_THRESHOLD_GRID = np.logspace(-12.0, 0.0, 241)


def _check_window(t: float, eps: float, h: HurstFunction) -> None:
    if eps <= 0.0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if t < 0.0 or t + eps > h.horizon + _HORIZON_SLACK:
        raise DomainError(f"window [{t}, {t + eps}] leaves [0, {h.horizon}]")


def variance_theoretical(t: float, h: HurstFunction) -> float:
    if t < 0.0 or t > h.horizon + _HORIZON_SLACK:
        raise DomainError(f"t={t} outside [0, {h.horizon}]")
    if t == 0.0:
        return 0.0
    return float(t ** (2.0 * h(t)))


@dataclass(frozen=True)
class LocalIncrement:
    exact: float
    leading: float
    lam: float


def local_increment_variance(t: float, eps: float, h: HurstFunction) -> LocalIncrement:
    """Variance of the increment driven by the noise on [t, t+eps] alone, and its leading order."""
    _check_window(t, eps, h)
    h_t = float(h(t))
    return LocalIncrement(
        exact=float(eps ** (2.0 * h(t + eps))),
        leading=float(eps ** (2.0 * h_t)),
        lam=min(h.gamma - h_t, (h.gamma + h_t) / 2.0),
    )


@dataclass(frozen=True)
class RemainderEstimate:
    remainder: float
    envelope: float


def local_increment_remainder(t: float, eps: float, h: HurstFunction) -> RemainderEstimate:
    """r(eps) = exact/leading - 1 and the envelope exp(2 C_H eps^gamma |ln eps|) - 1 bounding |r|."""
    inc = local_increment_variance(t, eps, h)
    envelope = math.expm1(2.0 * h.c_h * eps**h.gamma * abs(math.log(eps)))
    return RemainderEstimate(remainder=inc.exact / inc.leading - 1.0, envelope=envelope)


def lnd_threshold(t0: float, h: HurstFunction, eps1: float | None = None) -> tuple[float, float]:
    """(eps2, c1): below eps2 the remainder stays under 1/2 so the conditional variance exceeds half its leading order."""
    first = min(0.1, h.horizon - t0) if eps1 is None else eps1
    if first <= 0.0:
        raise DomainError(f"t0={t0} leaves no room before the horizon {h.horizon}")
    lam = local_increment_variance(t0, first, h).lam
    if lam <= 0.0:
        raise DomainError(f"{h.name}: non-positive remainder exponent {lam} at t0={t0}")
    ladder = np.append(_THRESHOLD_GRID[_THRESHOLD_GRID < first], first)
    c1 = max((local_increment_remainder(t0, float(e), h).envelope / e**lam for e in ladder), default=0.0)
    if c1 == 0.0:
        return first, 0.0
    return min(first, (2.0 * c1) ** (-1.0 / lam)), c1


@dataclass(frozen=True)
class LndResult:
    eps: float
    cond_var: float
    bound: float
    threshold: float

    @property
    def within_threshold(self) -> bool:
        return self.eps <= self.threshold

    @property
    def holds(self) -> bool:
        return self.cond_var >= self.bound


def lnd_lower_bound(t0: float, eps: float, h: HurstFunction) -> LndResult:
    inc = local_increment_variance(t0, eps, h)
    threshold, _ = lnd_threshold(t0, h)
    result = LndResult(eps=eps, cond_var=inc.exact, bound=0.5 * inc.leading, threshold=threshold)
    if not result.within_threshold:
        logger.warning("eps=%g exceeds the local non-determinism threshold %g at t0=%g", eps, threshold, t0)
    return result


def ldp_ratio(t0: float, x: float, eps: float, h: HurstFunction) -> float:
    """eps^(2H(t0)) ln P(I >= x) for the exact Gaussian local increment I."""
    if x <= 0.0:
        raise DomainError(f"ldp_ratio requires x > 0, got {x}")
    _check_window(t0, eps, h)
    sigma = eps ** float(h(t0 + eps))
    return float(eps ** (2.0 * h(t0))) * log_normal_tail(x / sigma)


def ldp_ladder(t0: float, x: float, h: HurstFunction, decades: int = 5) -> list[tuple[float, float]]:
    """(eps, ratio) on eps = 10^-1 ... 10^-decades."""
    if decades < 1:
        raise DomainError(f"decades must be >= 1, got {decades}")
    out = []
    for k in range(1, decades + 1):
        eps = 10.0 ** (-k)
        out.append((eps, ldp_ratio(t0, x, eps, h)))
    return out


@dataclass(frozen=True)
class AsBoundReport:
    kappa: float
    n_max: int
    n_seeds: int
    violations: tuple[int, ...]
    max_ratio: float
    limsup_bound: float

    @property
    def largest_violation(self) -> int | None:
        return max(self.violations) if self.violations else None


def as_bound_value(t0: float, h: HurstFunction, kappa: float, n: int) -> float:
    """e^H(t0) sqrt(2 kappa |ln eps_n|) with eps_n = n^-kappa (so 1 + varsigma = kappa)."""
    eps = float(n) ** (-kappa)
    return math.exp(float(h(t0))) * math.sqrt(2.0 * kappa * abs(math.log(eps)))


def as_bound_check(t0: float, h: HurstFunction, kappa: float, n_max: int, seed: int, n_seeds: int = 1) -> AsBoundReport:
    """Finite-sample count of n where the simulated local increment exceeds its a.s. envelope.

    n starts at 2 (eps_1 = 1 has ln eps = 0) and skips windows that leave the horizon.
    """
    if kappa <= 1.0:
        raise DomainError(f"kappa must be > 1 for a summable sequence, got {kappa}")
    if n_max < 2 or n_seeds < 1:
        raise DomainError("as_bound_check needs n_max >= 2 and n_seeds >= 1")
    ns = np.arange(2, n_max + 1)
    eps = ns.astype(np.float64) ** (-kappa)
    keep = t0 + eps <= h.horizon + _HORIZON_SLACK
    ns, eps = ns[keep], eps[keep]
    if ns.size == 0:
        raise DomainError(f"no eps_n fits in [t0, horizon] for t0={t0}")
    sigma = eps ** np.asarray(h(t0 + eps))
    bound = math.exp(float(h(t0))) * np.sqrt(2.0 * kappa * np.abs(np.log(eps)))
    scale = np.sqrt(np.abs(np.log(eps[-1])))

    violating: set[int] = set()
    max_ratio = 0.0
    for stream in range(n_seeds):
        draws = sigma * path_generator(seed, stream).standard_normal(ns.size)
        violating.update(int(n) for n in ns[np.abs(draws) > bound])
        max_ratio = max(max_ratio, float(abs(draws[-1]) / scale))
    return AsBoundReport(
        kappa=kappa,
        n_max=n_max,
        n_seeds=n_seeds,
        violations=tuple(sorted(violating)),
        max_ratio=max_ratio,
        limsup_bound=math.exp(float(h(t0))) * math.sqrt(2.0),
    )
