from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from importlib.resources import files
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError as JsonValidationError

from . import __version__
from .attention import (
    attention_csv_rows,
    attention_profile,
    bound_constants,
    check_attention_bounds,
    residence_measure,
)
from .config import ConfigError, RunConfig, load_config, parse_config
from .errors import ConvergenceError, DegeneracyError, DomainError, StepSizeError, ToleranceError
from .montecarlo import MAX_THREADS
from .report.csv_writer import render_csv
from .report.json_writer import atomic_write_text, dumps_report, write_json
from .rfbm.diagnostics import contraction_certificate
from .rfbm.solver import RfbmSolution, solve_rfbm
from .specfun import mills_bounds
from .suite import SUITE_ORDER, build_document, run_suite
from .tvfbm.covariance import covariance_bounds, covariance_hypergeometric, covariance_quadrature
from .tvfbm.grid import TimeGrid
from .tvfbm.lamperti import lamperti_solve, lamperti_variance_product
from .tvfbm.laws import ldp_ladder, variance_theoretical
from .tvfbm.simulate import simulate_tvfbm

_KIND_ALIASES = {
    "const": "constant",
    "constant": "constant",
    "sin": "sinusoidal-time",
    "sinusoidal-time": "sinusoidal-time",
    "linear": "linear-time",
    "linear-time": "linear-time",
    "example61": "example61",
    "tanh": "tanh-spatial",
    "tanh-spatial": "tanh-spatial",
}

# flag dest -> (config section, key)
_OVERRIDES: dict[str, tuple[str, str]] = {
    "kind": ("function", "kind"),
    "n": ("grid", "n"),
    "horizon": ("grid", "horizon"),
    "n_paths": ("mc", "n_paths"),
    "seed": ("mc", "seed"),
    "threads": ("mc", "threads"),
    "t": ("probe", "t"),
    "u": ("probe", "u"),
    "v": ("probe", "v"),
    "eps": ("probe", "eps"),
    "x": ("probe", "x"),
    "t0": ("probe", "t0"),
    "decades": ("probe", "decades"),
    "interval": ("probe", "interval"),
    "step": ("probe", "step"),
    "phi0": ("probe", "phi0"),
    "out": ("output", "path"),
    "format": ("output", "format"),
    "timings": ("output", "timings"),
}

_CSV_COLUMNS = {
    "simulate": ("t", "value"),
    "rfbm": ("t", "X", "alpha"),
    "covariance": ("quantity", "value"),
    "attention": ("s", "rho"),
    "verify": ("check_id", "verdict", "target", "estimate", "se", "tolerance_rule", "n", "seed"),
    "lamperti": ("t", "phi", "alpha"),
    "ldp": ("eps", "ratio"),
    "bounds": ("quantity", "lower", "value", "upper"),
}

_NORMALIZATION_TOL = 1e-8


class CommandResult:
    """What a subcommand produced: a JSON payload, CSV rows with a comment header, and an exit code."""

    def __init__(
        self,
        payload: dict[str, Any],
        rows: Sequence[Mapping[str, object]],
        header: Mapping[str, object] | None = None,
        exit_code: int = 0,
    ) -> None:
        self.payload = payload
        self.rows = rows
        self.header = header or {}
        self.exit_code = exit_code


def _interval_end(text: str) -> float | None:
    if text.strip().lower() in {"inf", "+inf", "-inf", "none", "null"}:
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a number or inf, got {text!r}") from exc


def _kind(text: str) -> str:
    try:
        return _KIND_ALIASES[text]
    except KeyError as exc:
        raise argparse.ArgumentTypeError(f"unknown function kind {text!r}; choose from {', '.join(sorted(_KIND_ALIASES))}") from exc


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, default=None, help="Config YAML/JSON (default: built-in settings)")
    sub.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
    sub.add_argument("--format", choices=["csv", "json"], default=None, help="Output format (default: config output.format)")
    sub.add_argument("--threads", type=int, default=None, help=f"Worker threads (1-{MAX_THREADS}; default: RFBM_LAB_THREADS or up to 4)")
    sub.add_argument("--seed", type=int, default=None, help="Root seed for every random stream")
    sub.add_argument("--log-level", default="warning", choices=["debug", "info", "warning", "error"])
    sub.add_argument("--timings", action="store_true", default=None, help="Include runtime_ms in reports")
    sub.add_argument("--emit-config", type=Path, default=None, help="Write the effective config as JSON")


def _add_function(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--hurst", "--response", dest="kind", type=_kind, default=None, help="Function kind (constant, sin, linear, example61, tanh)")
    sub.add_argument("--n", type=int, default=None, help="Grid panels")
    sub.add_argument("--horizon", type=float, default=None, help="Grid horizon T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfbm-lab", description="Simulation and verification lab for TV-fBm and responsive fBm")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="Simulate one TV-fBm path", description="CSV columns: t,value")
    _add_common(simulate)
    _add_function(simulate)

    rfbm = subparsers.add_parser("rfbm", help="Solve one responsive fBm path by Picard iteration", description="CSV columns: t,X,alpha")
    _add_common(rfbm)
    _add_function(rfbm)
    rfbm.add_argument("--convention", choices=["state", "time"], default="state", help="Where the kernel exponent is frozen")

    covariance = subparsers.add_parser("covariance", help="Evaluate R(u, v) and related quantities", description="CSV columns: quantity,value")
    _add_common(covariance)
    _add_function(covariance)
    covariance.add_argument("--u", type=float, default=None)
    covariance.add_argument("--v", type=float, default=None)

    attention = subparsers.add_parser("attention", help="Attention profile of a solved path at time t", description="CSV columns: s,rho")
    _add_common(attention)
    _add_function(attention)
    attention.add_argument("--t", type=float, default=None, help="Profile time (a grid point)")
    attention.add_argument("--interval", nargs=2, type=_interval_end, default=None, metavar=("LO", "HI"), help="Residence interval [LO, HI); inf for an open end")

    verify = subparsers.add_parser("verify", help="Run verification suites and emit a report document", description="CSV columns: " + ",".join(_CSV_COLUMNS["verify"]))
    _add_common(verify)
    _add_function(verify)
    verify.add_argument("--suite", choices=["all", *SUITE_ORDER], default="all")
    verify.add_argument("--n-paths", dest="n_paths", type=int, default=None, help="Monte Carlo paths")

    lamperti = subparsers.add_parser("lamperti", help="Solve the time-change ODE phi' = phi / (H + phi ln(phi) H')", description="CSV columns: t,phi,alpha")
    _add_common(lamperti)
    _add_function(lamperti)
    lamperti.add_argument("--phi0", type=float, default=None)
    lamperti.add_argument("--step", type=float, default=None)

    ldp = subparsers.add_parser("ldp", help="Large-deviation ladder eps^(2H) ln P(I >= x)", description="CSV columns: eps,ratio")
    _add_common(ldp)
    _add_function(ldp)
    ldp.add_argument("--x", type=float, default=None)
    ldp.add_argument("--t0", type=float, default=None)
    ldp.add_argument("--eps-ladder", dest="decades", type=int, default=None, help="Decades: eps = 1e-1 ... 1e-N")

    bounds = subparsers.add_parser("bounds", help="Tail, covariance and attention bounds at the probe point", description="CSV columns: quantity,lower,value,upper")
    _add_common(bounds)
    _add_function(bounds)
    bounds.add_argument("--x", type=float, default=None, help="Tail point z (>= 1)")
    bounds.add_argument("--t", type=float, default=None)
    bounds.add_argument("--eps", type=float, default=None)

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < flags; the merged document goes through the same validation as a file."""
    payload = load_config(args.config).to_dict()
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple | list):
            value = list(value)
        payload[section][key] = value
    return parse_config(payload)


def _grid(config: RunConfig) -> TimeGrid:
    return TimeGrid(horizon=config.grid.horizon, n=config.grid.n)


def _solve(config: RunConfig, convention: str = "state") -> tuple[RfbmSolution, dict[str, Any] | None]:
    f = config.function.response(config.grid.horizon)
    certificate = contraction_certificate(f, config.grid.horizon).to_dict() if config.grid.horizon <= 1.0 else None
    sol = solve_rfbm(
        _grid(config),
        f,
        config.mc.seed,
        convention=convention,  # type: ignore[arg-type]
        raise_on_failure=False,
        horizon_limit=None if certificate is None else certificate["t0"],
    )
    return sol, certificate


def run_simulate(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    h = config.function.hurst(config.grid.horizon)
    path = simulate_tvfbm(_grid(config), h, config.mc.seed)
    header = {
        "kind": config.function.kind,
        "seed": config.mc.seed,
        "n": config.grid.n,
        "horizon": config.grid.horizon,
        "variance_at_horizon": variance_theoretical(config.grid.horizon, h),
    }
    rows = path.csv_rows()
    return CommandResult({"command": "simulate", "header": header, "rows": rows}, rows, header)


def run_rfbm(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    sol, certificate = _solve(config, args.convention)
    diagnostics = sol.diagnostics()
    header = {key: diagnostics[key] for key in ("convention", "converged", "iterations", "seed")}
    if certificate is not None:
        header.update({"t0": certificate["t0"], "kappa": certificate["kappa"]})
    rows = sol.csv_rows()
    payload = {"command": "rfbm", "diagnostics": diagnostics, "certificate": certificate, "rows": rows}
    return CommandResult(payload, rows, header, exit_code=0 if sol.converged else 1)


def run_covariance(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    h = config.function.hurst(config.grid.horizon)
    u, v = config.probe.u, config.probe.v
    cross = covariance_quadrature(u, v, h)
    var_u = covariance_quadrature(u, u, h).value
    var_v = covariance_quadrature(v, v, h).value
    values: dict[str, float | None] = {
        "R(u,v)": cross.value,
        "R(u,v).est_error": cross.est_error,
        "R(u,u)": var_u,
        "R(v,v)": var_v,
        "correlation": cross.value / math.sqrt(var_u * var_v) if var_u > 0.0 and var_v > 0.0 else None,
    }
    try:
        values["R(u,v).hypergeometric"] = covariance_hypergeometric(u, v, h).value
    except DomainError:
        values["R(u,v).hypergeometric"] = None
    rows = [{"quantity": key, "value": value} for key, value in values.items()]
    header = {"kind": config.function.kind, "u": u, "v": v}
    return CommandResult({"command": "covariance", "header": header, "values": values}, rows, header)


def run_attention(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    f = config.function.response(config.grid.horizon)
    sol, _ = _solve(config)
    # profiles live on grid points; snap the requested time to the nearest one
    k = min(max(1, round(config.probe.t / sol.grid.delta)), sol.grid.n)
    profile = attention_profile(sol, f, float(sol.grid.points[k]))
    report = check_attention_bounds(profile, bound_constants(f.h_min, f.h_max))
    r_value, mu = residence_measure(sol, config.probe.interval_bounds, profile.t)
    header = {
        **profile.header(),
        "converged": sol.converged,
        "seed": config.mc.seed,
        "violations": len(report.violations),
        "residence": r_value,
        "mu": mu,
    }
    rows = attention_csv_rows(profile)
    payload = {
        "command": "attention",
        "header": header,
        "interval": list(config.probe.interval),
        "violations": [
            {"s": item.s, "rho": item.rho, "lower": item.lower, "upper": item.upper, "case": item.case}
            for item in report.violations
        ],
        "rows": rows,
    }
    ok = sol.converged and report.ok and abs(profile.normalization - 1.0) <= _NORMALIZATION_TOL
    return CommandResult(payload, rows, header, exit_code=0 if ok else 1)


def _validate_document(document: dict[str, Any]) -> None:
    schema = json.loads(files("rfbm_lab").joinpath("schemas", "report.schema.json").read_text(encoding="utf-8"))
    Draft202012Validator(schema).validate(document)


def run_verify(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    reports = run_suite(args.suite, config, config.mc.seed)
    document = build_document(args.suite, config, config.mc.seed, reports, include_timing=config.output.timings)
    _validate_document(document)
    rows = [report.to_dict() for report in reports]
    totals = document["totals"]
    header = {"suite": args.suite, "seed": config.mc.seed, **totals}
    return CommandResult(document, rows, header, exit_code=1 if totals["failed"] else 0)


def run_lamperti(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    h = config.function.hurst(config.grid.horizon)
    trajectory = lamperti_solve(h, config.probe.phi0, config.grid.horizon, config.probe.step)
    product_error = float(np.max(np.abs(lamperti_variance_product(trajectory, h) - 1.0)))
    header = {
        "kind": config.function.kind,
        "phi0": config.probe.phi0,
        "step": trajectory.step,
        "max_local_error": trajectory.max_local_error,
        "variance_product_error": product_error,
    }
    rows = trajectory.rows()
    return CommandResult({"command": "lamperti", "header": header, "rows": rows}, rows, header)


def run_ldp(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    h = config.function.hurst(config.grid.horizon)
    probe = config.probe
    ladder = ldp_ladder(probe.t0, probe.x, h, decades=probe.decades)
    header = {"kind": config.function.kind, "t0": probe.t0, "x": probe.x, "limit": -0.5 * probe.x * probe.x}
    rows = [{"eps": eps, "ratio": ratio} for eps, ratio in ladder]
    return CommandResult({"command": "ldp", "header": header, "rows": rows}, rows, header)


def run_bounds(config: RunConfig, args: argparse.Namespace) -> CommandResult:
    h = config.function.hurst(config.grid.horizon)
    probe = config.probe
    tail = mills_bounds(probe.x)
    sandwich = covariance_bounds(probe.t, probe.eps, h)
    rows: list[dict[str, object]] = [
        {"quantity": "normal_tail", "lower": tail.lower, "value": tail.exact, "upper": tail.upper},
        {
            "quantity": "covariance",
            "lower": sandwich.lower,
            "value": covariance_quadrature(probe.t, probe.t + probe.eps, h).value,
            "upper": sandwich.upper,
        },
    ]
    f = config.function.response(config.grid.horizon)
    consts = bound_constants(f.h_min, f.h_max)
    for k in range(1, 6):
        rows.append({"quantity": f"attention.A{k}/B{k}", "lower": getattr(consts, f"a{k}"), "value": None, "upper": getattr(consts, f"b{k}")})
    header = {"kind": config.function.kind, "x": probe.x, "t": probe.t, "eps": probe.eps, "h_min": f.h_min, "h_max": f.h_max}
    return CommandResult({"command": "bounds", "header": header, "rows": rows}, rows, header)


_COMMANDS = {
    "simulate": run_simulate,
    "rfbm": run_rfbm,
    "covariance": run_covariance,
    "attention": run_attention,
    "verify": run_verify,
    "lamperti": run_lamperti,
    "ldp": run_ldp,
    "bounds": run_bounds,
}


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_json_safe(item) for item in value]
    return value


def _write_output(command: str, config: RunConfig, result: CommandResult) -> None:
    if config.output.format == "csv":
        text = render_csv(_CSV_COLUMNS[command], result.rows, result.header)
    else:
        text = dumps_report(_json_safe(result.payload))
    if config.output.path is None:
        sys.stdout.write(text)
        return
    atomic_write_text(Path(config.output.path), text)
    print(f"wrote={config.output.path} format={config.output.format}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        config = resolve_config(args)
        if args.emit_config is not None:
            write_json(args.emit_config, config.to_dict())
        result = _COMMANDS[args.command](config, args)
        _write_output(args.command, config, result)
        return result.exit_code
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except JsonValidationError as exc:
        path = ".".join(str(part) for part in exc.absolute_path) or "$"
        print(f"validation error: {path}: {exc.message}", file=sys.stderr)
        return 1
    except (OSError, ConvergenceError, ToleranceError, DegeneracyError, StepSizeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
