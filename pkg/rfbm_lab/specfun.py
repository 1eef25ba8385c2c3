"""Special functions and Gaussian tail bounds shared by the simulation and verification code."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .errors import ConvergenceError, DomainError

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SERIES_REL_TOL = 1e-16
_SERIES_MAX_TERMS = 100_000
_PFAFF_THRESHOLD = -0.5
_ASYMPTOTIC_TAIL_Z = 12.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TailBound:
    z: float
    upper: float
    lower: float
    exact: float


def gamma_fn(x: float) -> float:
    """Gamma function for positive arguments (Lanczos, g=7)."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for index, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += coeff / (x + index)
    t = x + _LANCZOS_G + 0.5
    return _SQRT_2PI * math.exp((x + 0.5) * math.log(t) - t) * acc


def _is_non_positive_integer(value: float) -> bool:
    return value <= 0.0 and float(value).is_integer()


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    small_run = 0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if term == 0.0:
            return total
        # two consecutive negligible terms guard against a near-zero Pochhammer factor
        if abs(term) < _SERIES_REL_TOL * abs(total):
            small_run += 1
            if small_run >= 2:
                return total
        else:
            small_run = 0
    raise ConvergenceError(
        f"hyp2f1 series did not converge within {_SERIES_MAX_TERMS} terms (a={a}, b={b}, c={c}, z={z})",
        history=(total,),
    )


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) on z in [-1, 1).

    The power series is summed directly for z >= -0.5; below that the Pfaff
    transformation maps z into (1/3, 1/2] before summing.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_non_positive_integer(c):
        raise DomainError(f"hyp2f1 requires c not a non-positive integer, got c={c}")
    if z >= 1.0:
        raise DomainError(f"hyp2f1 requires z < 1, got z={z}")
    if z < -1.0:
        raise DomainError(f"hyp2f1 is only implemented for z >= -1, got z={z}")
    if z == 0.0:
        return 1.0
    if z < _PFAFF_THRESHOLD:
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, z / (z - 1.0))
    return _hyp2f1_series(a, b, c, z)


def normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def normal_tail(z: float) -> float:
    """Exact upper tail 1 - Phi(z) through the complementary error function."""
    return 0.5 * float(special.erfc(float(z) / math.sqrt(2.0)))


def log_normal_tail(z: float) -> float:
    """ln(1 - Phi(z)), switching to the Mills asymptotic series for z > 12."""
    z = float(z)
    if z <= _ASYMPTOTIC_TAIL_Z:
        return math.log(normal_tail(z))
    inv = 1.0 / (z * z)
    correction = 1.0 - inv + 3.0 * inv**2 - 15.0 * inv**3 + 105.0 * inv**4
    return -0.5 * z * z - math.log(z * _SQRT_2PI) + math.log(correction)


def mills_bounds(z: float) -> TailBound:
    z = float(z)
    if z < 1.0:
        raise DomainError(f"mills_bounds requires z >= 1, got z={z}")
    upper = normal_pdf(z) / z
    lower = upper * (1.0 - 1.0 / (z * z))
    exact = normal_tail(z) if z <= _ASYMPTOTIC_TAIL_Z else math.exp(log_normal_tail(z))
    return TailBound(z=z, upper=upper, lower=lower, exact=exact)


def log_control_constant(delta: float, alpha: float) -> float:
    """K such that |ln x| <= K x^-delta on (0, 1] and |ln x| <= K x^alpha on (1, inf)."""
    if delta <= 0.0 or alpha <= 0.0:
        raise DomainError(f"log_control_constant requires delta > 0 and alpha > 0, got ({delta}, {alpha})")
    return max(1.0 / (delta * math.e), 1.0 / alpha)


def log_control_holds(x: float, delta: float, alpha: float) -> bool:
    """Pointwise check of |ln x| <= K (x^-delta + x^alpha) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"log_control_holds requires x > 0, got {x}")
    k = log_control_constant(delta, alpha)
    return abs(math.log(x)) <= k * (x ** (-delta) + x**alpha)
