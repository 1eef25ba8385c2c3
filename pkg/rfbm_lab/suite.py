from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from . import __version__
from .checks.attention import run_attention
from .checks.covariance import run_covariance
from .checks.lamperti import run_lamperti
from .checks.ldp import run_ldp
from .checks.lnd import run_lnd
from .checks.memory import run_memory
from .checks.rfbm import run_rfbm
from .checks.tails import run_tails
from .checks.variance import run_variance
from .config import ConfigError, RunConfig
from .models import McReport, SuiteName
from .observability import emit_check, suite_events


SCHEMA_VERSION = 1

SUITE_ORDER: tuple[SuiteName, ...] = (
    "tails",
    "variance",
    "covariance",
    "ldp",
    "lnd",
    "lamperti",
    "rfbm",
    "memory",
    "attention",
)

_RUNNERS: dict[SuiteName, Callable[[RunConfig, int], list[McReport]]] = {
    "attention": run_attention,
    "covariance": run_covariance,
    "lamperti": run_lamperti,
    "ldp": run_ldp,
    "lnd": run_lnd,
    "memory": run_memory,
    "rfbm": run_rfbm,
    "tails": run_tails,
    "variance": run_variance,
}


@dataclass(frozen=True)
class CheckInfo:
    suite: SuiteName
    invariant: str


CHECKS: dict[str, CheckInfo] = {
    # special functions
    "tails.mills_bounds": CheckInfo("tails", "Mills lower < exact tail < upper on [1.05, 12]"),
    "tails.log_control": CheckInfo("tails", "|ln x| <= K x^-delta on (0, 1] and K x^alpha above 1"),
    "tails.hyp2f1_euler": CheckInfo("tails", "2F1 series matches the Euler integral within 1e-9"),
    "tails.gamma_recurrence": CheckInfo("tails", "Gamma(x+1) = x Gamma(x) within relative 1e-11"),
    # simulation and variance
    "variance.isometry": CheckInfo("variance", "discrete Ito isometry of the panel weights within 0.5%"),
    "variance.law.t0.25": CheckInfo("variance", "Var B(0.25) = 0.25^(2H(0.25))"),
    "variance.law.t0.5": CheckInfo("variance", "Var B(0.5) = 0.5^(2H(0.5))"),
    "variance.law.t1": CheckInfo("variance", "Var B(1) = 1"),
    "variance.brownian_reduction": CheckInfo("variance", "H = 1/2 reproduces Brownian partial sums bit-exactly"),
    "variance.constant_075": CheckInfo("variance", "H = 0.75 has unit variance at t = 1"),
    "variance.sqrt_control": CheckInfo("variance", "sqrt(2H) is Holder with constant C_H / sqrt(2 h_min)"),
    # covariance
    "covariance.diagonal": CheckInfo("covariance", "R(t, t) = t^(2H(t)) within 1e-8"),
    "covariance.brownian_min": CheckInfo("covariance", "H = 1/2 gives R(u, v) = min(u, v)"),
    "covariance.symmetry": CheckInfo("covariance", "R(u, v) = R(v, u)"),
    "covariance.psd": CheckInfo("covariance", "covariance matrices are positive semidefinite"),
    "covariance.eval_J": CheckInfo("covariance", "hypergeometric J(a, b) matches quadrature within 1e-8"),
    "covariance.hyper_I": CheckInfo("covariance", "dominant mixed-derivative integral matches quadrature within 1e-7"),
    "covariance.mixed_majorant": CheckInfo("covariance", "mixed-derivative remainders stay under their majorants"),
    "covariance.first_derivative": CheckInfo("covariance", "dR/dv matches central differences"),
    "covariance.sandwich": CheckInfo("covariance", "R(t, t+eps) lies between the extremal-exponent bounds"),
    # large deviations
    "ldp.limit": CheckInfo("ldp", "eps^(2H) ln P(I >= x) -> -x^2/2 within 15% at eps = 1e-5"),
    "ldp.monotone": CheckInfo("ldp", "the ladder error decreases monotonically"),
    "ldp.configured_limit": CheckInfo("ldp", "the configured Hurst function reaches the -x^2/2 limit"),
    # local non-determinism
    "lnd.lower_bound": CheckInfo("lnd", "conditional variance >= eps^(2H(t0)) / 2 below the threshold"),
    "lnd.ratio_limit": CheckInfo("lnd", "conditional variance / eps^(2H(t0)) -> 1"),
    "lnd.remainder_envelope": CheckInfo("lnd", "the local remainder stays inside its envelope"),
    "lnd.as_envelope": CheckInfo("lnd", "finite-sample count of a.s. envelope crossings"),
    # time change
    "lamperti.constant_exact": CheckInfo("lamperti", "constant H gives phi0 e^(t/H0)"),
    "lamperti.decay": CheckInfo("lamperti", "alpha' + alpha = 0 to second order in the step"),
    "lamperti.variance_product": CheckInfo("lamperti", "the transformed variance is identically one"),
    # responsive fBm
    "rfbm.response_audit": CheckInfo("rfbm", "declared response constants bound the sampled quotients"),
    "rfbm.frozen_path_holder": CheckInfo("rfbm", "frozen-path composition keeps the combined Holder constant"),
    "rfbm.picard_converges": CheckInfo("rfbm", "Picard iteration converges on the certified horizon"),
    "rfbm.residual_decay": CheckInfo("rfbm", "sweep residuals decay at rate kappa + 0.1"),
    "rfbm.s2_contraction": CheckInfo("rfbm", "S^2 distances contract at rate kappa"),
    "rfbm.constant_two_sweeps": CheckInfo("rfbm", "constant H converges in two sweeps"),
    "rfbm.alpha_range": CheckInfo("rfbm", "alpha stays in [h_min, h_max]"),
    "rfbm.kernel_norm_sandwich": CheckInfo("rfbm", "local kernel norm lies between the extremal-index powers"),
    "rfbm.identified_exponent": CheckInfo("rfbm", "the log-log slope identifies alpha(t)"),
    "rfbm.alpha_holder": CheckInfo("rfbm", "alpha inherits a bounded Holder quotient from the path"),
    "rfbm.self_convergence": CheckInfo("rfbm", "grid refinement shrinks the solution distance"),
    "rfbm.norm_bound": CheckInfo("rfbm", "sup_t E[X_t^2] stays under the a priori bound"),
    "rfbm.kernel_lipschitz": CheckInfo("rfbm", "kernel Lipschitz ratios stay under the analytic constant"),
    # memory
    "memory.pathwise_bounds": CheckInfo("memory", "h_min t <= C_t <= h_max t"),
    "memory.monotone": CheckInfo("memory", "C_t is nondecreasing"),
    "memory.time_average_range": CheckInfo("memory", "the time-averaged exponent stays in [h_min, h_max]"),
    "memory.rate_beta0.5": CheckInfo("memory", "slow regime decays like t^-beta"),
    "memory.rate_beta1": CheckInfo("memory", "critical regime decays like ln(t)/t"),
    "memory.rate_beta2": CheckInfo("memory", "fast regime decays like 1/t"),
    # attention
    "attention.normalization": CheckInfo("attention", "attention weights integrate to one"),
    "attention.positivity": CheckInfo("attention", "attention weights are positive"),
    "attention.bounds": CheckInfo("attention", "attention weights obey the Case I/II bounds"),
    "attention.sensitivity": CheckInfo("attention", "sensitivity matches log-kernel differences"),
    "attention.volatility_bound": CheckInfo("attention", "V_I <= 1/4"),
    "attention.volatility_whole_line": CheckInfo("attention", "V over the whole line is 0"),
    "attention.volatility_agree": CheckInfo("attention", "variance and covariance-integral estimators agree"),
    "attention.conservation": CheckInfo("attention", "residence fractions over a partition sum to one"),
    "attention.brownian_half": CheckInfo("attention", "Brownian mean residence in [0, inf) is 1/2"),
    "attention.expected_residence": CheckInfo("attention", "E[R_I] equals the integral of marginal probabilities"),
}


def suites_for(name: str) -> tuple[SuiteName, ...]:
    if name == "all":
        return SUITE_ORDER
    if name not in _RUNNERS:
        raise ConfigError(f"unknown suite: {name} (expected one of: all, {', '.join(SUITE_ORDER)})")
    return (name,)  # type: ignore[return-value]


def run_suite(name: str, config: RunConfig, seed: int) -> list[McReport]:
    """Run one suite (or all, in a fixed order) and return its reports sorted by check_id."""
    selected = suites_for(name)
    with suite_events(name, seed) as reports:
        for suite in selected:
            for report in _RUNNERS[suite](config, seed):
                if report.check_id not in CHECKS:
                    raise KeyError(f"check {report.check_id} is missing from the registry")
                emit_check(report)
                reports.append(report)
        reports.sort(key=lambda r: r.check_id)
    return reports


def build_document(name: str, config: RunConfig, seed: int, reports: list[McReport], include_timing: bool = False) -> dict[str, Any]:
    failed = sum(1 for r in reports if not r.passed)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "rfbm-lab", "version": __version__},
        "suite": name,
        "seed": seed,
        "config": config.to_dict(),
        "reports": [r.to_dict(include_timing=include_timing) for r in reports],
        "totals": {"checks": len(reports), "failed": failed, "passed": len(reports) - failed},
    }
