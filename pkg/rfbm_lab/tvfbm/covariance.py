"""Covariance of time-varying fBm: quadrature, hypergeometric closed forms, bounds and derivative terms."""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import IntegrationWarning, quad

from ..errors import DomainError, ToleranceError
from ..hurst import HurstFunction
from ..rng import path_generator
from ..specfun import hyp2f1, log_control_constant

CovarianceMethod = Literal["quadrature", "hypergeometric"]

_QUAD_LIMIT = 200
_EXACT_MAX_POINTS = 512
_HYPER_REL_ERROR = 1e-12


@dataclass(frozen=True)
class CovarianceResult:
    u: float
    v: float
    value: float
    method: CovarianceMethod
    est_error: float


def _quad(fn: Callable[[float], float], a: float, b: float, **options: Any) -> tuple[float, float]:
    options.setdefault("limit", _QUAD_LIMIT)
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(fn, a, b, **options)
        except IntegrationWarning as exc:
            raise ToleranceError(f"quadrature on [{a}, {b}] did not meet its tolerance: {exc}") from exc
    return float(value), float(abserr)


def _exponents(u: float, v: float, h: HurstFunction) -> tuple[float, float]:
    return float(h(u)), float(h(v))


def covariance_quadrature(
    u: float,
    v: float,
    h: HurstFunction,
    tol: float = 1e-10,
    force_quadrature: bool = False,
) -> CovarianceResult:
    """R(u, v) = 2 sqrt(H(u)H(v)) int_0^min (u-s)^(H(u)-1/2) (v-s)^(H(v)-1/2) ds.

    With m = min(u, v) the substitution m - s = m tau^(1/p), p = H(m) + 1/2, removes the
    endpoint singularity. On the diagonal the integral is the closed power form t^(2H(t))
    unless ``force_quadrature`` is set, in which case it is integrated with an algebraic
    endpoint weight.
    """
    if u < 0.0 or v < 0.0:
        raise DomainError(f"covariance needs non-negative times, got ({u}, {v})")
    if u == 0.0 or v == 0.0:
        return CovarianceResult(u=u, v=v, value=0.0, method="quadrature", est_error=0.0)
    h_u, h_v = _exponents(u, v, h)
    prefactor = 2.0 * math.sqrt(h_u * h_v)
    m, big = (u, v) if u <= v else (v, u)
    a = (h_u if u <= v else h_v) - 0.5
    b = (h_v if u <= v else h_u) - 0.5

    if big == m and force_quadrature:
        integral, abserr = _quad(lambda s: 1.0, 0.0, m, weight="alg", wvar=(0.0, a + b), epsabs=0.25 * tol / prefactor, epsrel=0.0)
        est_error = prefactor * abserr
        if est_error > tol:
            raise ToleranceError(f"covariance({u}, {v}) error estimate {est_error:.3g} exceeds tol={tol:.3g}")
        return CovarianceResult(u=u, v=v, value=prefactor * integral, method="quadrature", est_error=est_error)
    if big == m:
        value = prefactor * m ** (a + b + 1.0) / (a + b + 1.0)
        return CovarianceResult(u=u, v=v, value=value, method="quadrature", est_error=4.0 * np.spacing(value))

    p = a + 1.0
    gap = big - m
    scale = m**p / p

    def integrand(tau: float) -> float:
        return scale * (gap + m * tau ** (1.0 / p)) ** b

    integral, abserr = _quad(integrand, 0.0, 1.0, epsabs=0.25 * tol / prefactor, epsrel=0.0)
    est_error = prefactor * abserr
    if est_error > tol:
        raise ToleranceError(f"covariance({u}, {v}) error estimate {est_error:.3g} exceeds tol={tol:.3g}")
    return CovarianceResult(u=u, v=v, value=prefactor * integral, method="quadrature", est_error=est_error)


def eval_J(a: float, b: float, u: float, v: float) -> float:
    """J(a, b) = int_0^u (u-s)^a (v-s)^b ds through 2F1 at z = -u/(v-u) in [-1, 0)."""
    if a <= -1.0 or b <= -1.0:
        raise DomainError(f"eval_J requires a, b > -1, got ({a}, {b})")
    if not 0.0 < u < v:
        raise DomainError(f"eval_J requires 0 < u < v, got ({u}, {v})")
    if v < 2.0 * u:
        raise DomainError(f"eval_J requires v >= 2u, got u={u}, v={v}")
    gap = v - u
    return u ** (a + 1.0) * gap**b / (a + 1.0) * hyp2f1(-b, a + 1.0, a + 2.0, -u / gap)


def covariance_hypergeometric(u: float, v: float, h: HurstFunction) -> CovarianceResult:
    m, big = min(u, v), max(u, v)
    h_m, h_big = float(h(m)), float(h(big))
    value = 2.0 * math.sqrt(h_m * h_big) * eval_J(h_m - 0.5, h_big - 0.5, m, big)
    return CovarianceResult(u=u, v=v, value=value, method="hypergeometric", est_error=_HYPER_REL_ERROR * abs(value))


def cov_hyper_I(u: float, v: float, h: HurstFunction) -> float:
    """int_0^u (u-s)^(H(u)-3/2) (v-s)^(H(v)-3/2) ds, the dominant part of the mixed derivative."""
    h_u, h_v = _exponents(u, v, h)
    if h_u <= 0.5 or h_v <= 0.5:
        raise DomainError(f"cov_hyper_I requires H(u), H(v) > 1/2, got ({h_u}, {h_v})")
    return eval_J(h_u - 1.5, h_v - 1.5, u, v)


def exact_covariance_matrix(times: ArrayLike, h: HurstFunction, tol: float = 1e-10) -> NDArray[np.float64]:
    pts = np.asarray(times, dtype=np.float64)
    if pts.ndim != 1 or pts.size > _EXACT_MAX_POINTS:
        raise DomainError(f"exact covariance supports at most {_EXACT_MAX_POINTS} times")
    n = pts.size
    matrix = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            matrix[i, j] = matrix[j, i] = covariance_quadrature(float(pts[i]), float(pts[j]), h, tol).value
    return matrix


def simulate_exact(times: ArrayLike, h: HurstFunction, seed: int) -> NDArray[np.float64]:
    """Cholesky sample at strictly positive times; a test oracle only."""
    pts = np.asarray(times, dtype=np.float64)
    if np.any(pts <= 0.0):
        raise DomainError("simulate_exact needs strictly positive times")
    matrix = exact_covariance_matrix(pts, h)
    try:
        factor = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * float(np.max(np.diag(matrix)))
        factor = np.linalg.cholesky(matrix + jitter * np.eye(pts.size))
    return factor @ path_generator(seed, 0).standard_normal(pts.size)


@dataclass(frozen=True)
class CovarianceBounds:
    t: float
    eps: float
    lower: float
    upper: float
    h_minus: float
    h_plus: float
    j_lower: float
    j_upper: float


def _head_integral(p: float, q: float) -> float:
    """int_0^1 s^p (1+s)^q ds."""
    head, _ = _quad(lambda s: (1.0 + s) ** q, 0.0, 1.0, weight="alg", wvar=(p, 0.0), epsabs=1e-14, epsrel=1e-10)
    return head


def _tail_integral(p: float, q: float, top: float) -> float:
    if top <= 1.0:
        return 0.0
    tail, _ = _quad(lambda s: s**p * (1.0 + s) ** q, 1.0, top, epsabs=1e-14, epsrel=1e-10)
    return tail


def covariance_bounds(t: float, eps: float, h: HurstFunction) -> CovarianceBounds:
    """Sandwich for R(t, t+eps) from the extremal exponents H- and H+ of the pair."""
    if not 0.0 < eps < t:
        raise DomainError(f"covariance_bounds requires 0 < eps < t, got t={t}, eps={eps}")
    if t + eps > h.horizon + 1e-12:
        raise DomainError(f"t + eps = {t + eps} exceeds horizon {h.horizon}")
    h_t, h_te = float(h(t)), float(h(t + eps))
    h_minus, h_plus = min(h_t, h_te), max(h_t, h_te)
    top = t / eps
    j_lower = _head_integral(h_plus - 0.5, h_minus - 0.5) + _tail_integral(h_minus - 0.5, h_minus - 0.5, top)
    j_upper = _head_integral(h_minus - 0.5, h_plus - 0.5) + _tail_integral(h_plus - 0.5, h_plus - 0.5, top)
    scale = 2.0 * math.sqrt(h_t * h_te) * eps ** (h_t + h_te)
    return CovarianceBounds(
        t=t,
        eps=eps,
        lower=scale * j_lower,
        upper=scale * j_upper,
        h_minus=h_minus,
        h_plus=h_plus,
        j_lower=j_lower,
        j_upper=j_upper,
    )


# Derivative terms


def _slope(h: HurstFunction, dh: Callable[[float], float] | None) -> Callable[[float], float]:
    if dh is not None:
        return dh
    if h.deriv is None:
        raise DomainError(f"{h.name}: a derivative H' is required")
    return lambda t: float(h.derivative(t))


def _log_coefficients(h_t: float, dh_t: float) -> tuple[float, float]:
    """(c_log, c_0) with sqrt(2H)H' ln(x) + H'/sqrt(2H) = c_log ln(x) + c_0."""
    root = math.sqrt(2.0 * h_t)
    return root * dh_t, dh_t / root


@dataclass(frozen=True)
class MixedDerivativeTerms:
    i1: float
    i2: float
    i3: float
    i4: float
    c2: float
    c3: float
    c4: float

    @property
    def bound(self) -> float:
        return max(self.c2, self.c3, self.c4)

    @property
    def holds(self) -> bool:
        return abs(self.i2) <= self.c2 and abs(self.i3) <= self.c3 and abs(self.i4) <= self.c4


def mixed_derivative_terms(
    u: float,
    v: float,
    h: HurstFunction,
    dh: Callable[[float], float] | None = None,
) -> MixedDerivativeTerms:
    """Non-dominant pieces of the mixed derivative of R(u, v) and their closed-form majorants.

    i1 is the dominant singular part C(u)A(v) cov_hyper_I(u, v). The majorants use the
    log control |ln x| <= K (x^-1/2 + x) with K = K(1/2, 1) and |H'| <= L_H.
    """
    h_u, h_v = _exponents(u, v, h)
    if h_u <= 0.5 or h_v <= 0.5:
        raise DomainError(f"mixed_derivative_terms requires H(u), H(v) > 1/2, got ({h_u}, {h_v})")
    if not 0.0 < u < v or v < 2.0 * u:
        raise DomainError(f"mixed_derivative_terms requires 0 < 2u <= v, got u={u}, v={v}")
    slope = _slope(h, dh)
    dh_u, dh_v = float(slope(u)), float(slope(v))
    m_h = h.l_h if h.l_h is not None else max(abs(dh_u), abs(dh_v))

    c_u = math.sqrt(2.0 * h_u) * (h_u - 0.5)
    a_v = math.sqrt(2.0 * h_v) * (h_v - 0.5)
    log_u, const_u = _log_coefficients(h_u, dh_u)
    log_v, const_v = _log_coefficients(h_v, dh_v)

    def b_weight(s: float) -> float:
        return (log_v * math.log(v - s) + const_v) * (v - s) ** (h_v - 0.5)

    def alg(fn: Callable[[float], float], beta: float) -> float:
        return _quad(fn, 0.0, u, weight="alg", wvar=(0.0, beta), epsabs=1e-13, epsrel=1e-10)[0]

    def alg_log(fn: Callable[[float], float], beta: float) -> float:
        return _quad(fn, 0.0, u, weight="alg-logb", wvar=(0.0, beta), epsabs=1e-13, epsrel=1e-10)[0]

    i2 = c_u * alg(b_weight, h_u - 1.5)

    def v_power(s: float) -> float:
        return (v - s) ** (h_v - 1.5)

    i3 = a_v * (log_u * alg_log(v_power, h_u - 0.5) + const_u * alg(v_power, h_u - 0.5))
    i4 = log_u * alg_log(b_weight, h_u - 0.5) + const_u * alg(b_weight, h_u - 0.5)

    k = log_control_constant(0.5, 1.0)
    big_a_u, big_b_u = math.sqrt(2.0 * h_u) * m_h, m_h / math.sqrt(2.0 * h_u)
    big_a_v, big_b_v = math.sqrt(2.0 * h_v) * m_h, m_h / math.sqrt(2.0 * h_v)
    lo_u, hi_u, mid_u = h_u - 1.0, h_u + 0.5, h_u - 0.5
    lo_v, hi_v, mid_v = h_v - 1.0, h_v + 0.5, h_v - 0.5

    def j(a: float, b: float) -> float:
        return eval_J(a, b, u, v)

    c2 = abs(c_u) * (big_a_v * k * (j(h_u - 1.5, lo_v) + j(h_u - 1.5, hi_v)) + big_b_v * j(h_u - 1.5, mid_v))
    c3 = abs(a_v) * (big_a_u * k * (j(lo_u, h_v - 1.5) + j(hi_u, h_v - 1.5)) + big_b_u * j(mid_u, h_v - 1.5))
    c4 = (
        big_a_u * big_a_v * k * k * (j(lo_u, lo_v) + j(lo_u, hi_v) + j(hi_u, lo_v) + j(hi_u, hi_v))
        + big_a_u * big_b_v * k * (j(lo_u, mid_v) + j(hi_u, mid_v))
        + big_b_u * big_a_v * k * (j(mid_u, lo_v) + j(mid_u, hi_v))
        + big_b_u * big_b_v * j(mid_u, mid_v)
    )
    return MixedDerivativeTerms(
        i1=c_u * a_v * cov_hyper_I(u, v, h),
        i2=i2,
        i3=i3,
        i4=i4,
        c2=c2,
        c3=c3,
        c4=c4,
    )


def _dk_dv(v: float, s: float, h_v: float, dh_v: float) -> float:
    """Partial derivative in v of sqrt(2H(v)) (v-s)^(H(v)-1/2)."""
    log_v, const_v = _log_coefficients(h_v, dh_v)
    bracket = math.sqrt(2.0 * h_v) * (h_v - 0.5) + (log_v * math.log(v - s) + const_v) * (v - s)
    return (v - s) ** (h_v - 1.5) * bracket


def cov_first_derivative(
    u: float,
    v: float,
    h: HurstFunction,
    dh: Callable[[float], float] | None = None,
) -> float:
    """dR/dv at u < v: int_0^u K(u,s) dK(v,s)/dv ds."""
    if not 0.0 < u < v:
        raise DomainError(f"cov_first_derivative requires 0 < u < v, got ({u}, {v})")
    slope = _slope(h, dh)
    h_u, h_v = _exponents(u, v, h)
    dh_v = float(slope(v))
    root_u = math.sqrt(2.0 * h_u)
    value, _ = _quad(
        lambda s: root_u * _dk_dv(v, s, h_v, dh_v),
        0.0,
        u,
        weight="alg",
        wvar=(0.0, h_u - 0.5),
        epsabs=1e-13,
        epsrel=1e-10,
    )
    return value


def boundary_term(
    u: float,
    v: float,
    s: float | Sequence[float],
    h: HurstFunction,
    dh: Callable[[float], float] | None = None,
) -> float | NDArray[np.float64]:
    """K(u,s) dK(v,s)/dv, the Leibniz boundary contribution as s -> u-."""
    if not 0.0 < u < v:
        raise DomainError(f"boundary_term requires 0 < u < v, got ({u}, {v})")
    slope = _slope(h, dh)
    h_u, h_v = _exponents(u, v, h)
    dh_v = float(slope(v))
    points = np.atleast_1d(np.asarray(s, dtype=np.float64))
    if np.any(points >= u) or np.any(points < 0.0):
        raise DomainError("boundary_term requires 0 <= s < u")
    values = np.array([math.sqrt(2.0 * h_u) * (u - x) ** (h_u - 0.5) * _dk_dv(v, x, h_v, dh_v) for x in points])
    return float(values[0]) if np.ndim(s) == 0 else values
