from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

try:
    import yaml
except ModuleNotFoundError:  # pragma: no cover
    yaml = None

from .errors import DomainError
from .hurst import (
    HurstFunction,
    ResponseFunction,
    constant_hurst,
    constant_response,
    example_response,
    linear_hurst,
    sinusoidal_hurst,
    tanh_response,
    time_only_response,
)
from .models import FunctionKind, OutputFormat
from .montecarlo import MAX_THREADS


class ConfigError(ValueError):
    """Raised when configuration is invalid."""


_FUNCTION_KINDS = ("constant", "sinusoidal-time", "linear-time", "example61", "tanh-spatial")
_OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class FunctionSpec:
    """A named Hurst/response family and its parameters; unused parameters are ignored by the kind."""

    kind: FunctionKind = "sinusoidal-time"
    h0: float = 0.5
    amplitude: float = 0.2
    omega: float = 1.0
    slope: float = 0.0
    beta: float = 1.0
    h_min: float = 0.45
    h_max: float = 0.55
    alpha: float = 0.5

    def hurst(self, horizon: float = 1.0) -> HurstFunction:
        if self.kind == "constant":
            return constant_hurst(self.h0, horizon)
        if self.kind == "sinusoidal-time":
            return sinusoidal_hurst(self.h0, self.amplitude, self.omega, horizon)
        if self.kind == "linear-time":
            return linear_hurst(self.h0, self.slope, horizon)
        view = self.response(horizon).time_view
        assert view is not None
        return view

    def response(self, horizon: float = 1.0) -> ResponseFunction:
        if self.kind == "constant":
            return constant_response(self.h0, horizon)
        if self.kind in ("sinusoidal-time", "linear-time"):
            return time_only_response(self.hurst(horizon))
        if self.kind == "example61":
            return example_response(self.h_min, self.h_max, self.alpha, self.omega, horizon)
        return tanh_response(self.h0, self.amplitude, self.beta, horizon)


@dataclass(frozen=True)
class GridConfig:
    n: int = 512
    horizon: float = 1.0


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 2000
    seed: int = 0
    threads: int | None = None


@dataclass(frozen=True)
class ProbeConfig:
    """Point parameters for the single-shot subcommands."""

    t: float = 0.8
    u: float = 0.3
    v: float = 0.7
    eps: float = 0.01
    x: float = 1.0
    t0: float = 0.5
    decades: int = 5
    interval: tuple[float | None, float | None] = (0.0, None)
    step: float = 0.01
    phi0: float = 0.1

    @property
    def interval_bounds(self) -> tuple[float, float]:
        lo, hi = self.interval
        return (-math.inf if lo is None else lo, math.inf if hi is None else hi)


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: OutputFormat = "json"
    timings: bool = False


@dataclass(frozen=True)
class RunConfig:
    version: int = 1
    function: FunctionSpec = field(default_factory=FunctionSpec)
    grid: GridConfig = field(default_factory=GridConfig)
    mc: McConfig = field(default_factory=McConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["probe"]["interval"] = list(self.probe.interval)
        return payload


_EXPECTED_TOP_KEYS = {"version", "function", "grid", "mc", "probe", "output"}
_FUNCTION_KEYS = {"kind", "h0", "amplitude", "omega", "slope", "beta", "h_min", "h_max", "alpha"}
_GRID_KEYS = {"n", "horizon"}
_MC_KEYS = {"n_paths", "seed", "threads"}
_PROBE_KEYS = {"t", "u", "v", "eps", "x", "t0", "decades", "interval", "step", "phi0"}
_OUTPUT_KEYS = {"path", "format", "timings"}


def _expect_dict(name: str, value: Any) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping.")
    return value


def _reject_unknown_keys(name: str, payload: dict[str, Any], expected: set[str]) -> None:
    unknown = sorted(set(payload.keys()) - expected)
    if unknown:
        raise ConfigError(f"{name} has unknown keys: {', '.join(unknown)}")


def _as_bool(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{name} must be a boolean.")
    return value


def _as_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer.")
    return value


def _as_float(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be numeric.")
    return float(value)


def _as_optional_float(name: str, value: Any) -> float | None:
    return None if value is None else _as_float(name, value)


def _parse_function(payload: dict[str, Any]) -> FunctionSpec:
    _reject_unknown_keys("function", payload, _FUNCTION_KEYS)
    defaults = FunctionSpec()
    kind = payload.get("kind", defaults.kind)
    if kind not in _FUNCTION_KINDS:
        raise ConfigError(f"function.kind must be one of: {', '.join(_FUNCTION_KINDS)}")
    floats = {
        key: _as_float(f"function.{key}", payload.get(key, getattr(defaults, key)))
        for key in sorted(_FUNCTION_KEYS - {"kind"})
    }
    spec = FunctionSpec(kind=kind, **floats)
    try:
        spec.response()
        spec.hurst()
    except DomainError as exc:
        raise ConfigError(f"function: {exc}") from exc
    return spec


def _parse_grid(payload: dict[str, Any]) -> GridConfig:
    _reject_unknown_keys("grid", payload, _GRID_KEYS)
    n = _as_int("grid.n", payload.get("n", GridConfig.n))
    horizon = _as_float("grid.horizon", payload.get("horizon", GridConfig.horizon))
    if n < 2:
        raise ConfigError("grid.n must be >= 2")
    if horizon <= 0.0:
        raise ConfigError("grid.horizon must be > 0")
    return GridConfig(n=n, horizon=horizon)


def _parse_mc(payload: dict[str, Any]) -> McConfig:
    _reject_unknown_keys("mc", payload, _MC_KEYS)
    n_paths = _as_int("mc.n_paths", payload.get("n_paths", McConfig.n_paths))
    seed = _as_int("mc.seed", payload.get("seed", McConfig.seed))
    threads_raw = payload.get("threads")
    threads = None if threads_raw is None else _as_int("mc.threads", threads_raw)
    if n_paths < 1:
        raise ConfigError("mc.n_paths must be >= 1")
    if seed < 0:
        raise ConfigError("mc.seed must be >= 0")
    if threads is not None and not 1 <= threads <= MAX_THREADS:
        raise ConfigError(f"mc.threads must be between 1 and {MAX_THREADS}")
    return McConfig(n_paths=n_paths, seed=seed, threads=threads)


def _parse_probe(payload: dict[str, Any]) -> ProbeConfig:
    _reject_unknown_keys("probe", payload, _PROBE_KEYS)
    defaults = ProbeConfig()
    values = {
        key: _as_float(f"probe.{key}", payload.get(key, getattr(defaults, key)))
        for key in ("t", "u", "v", "eps", "x", "t0", "step", "phi0")
    }
    decades = _as_int("probe.decades", payload.get("decades", defaults.decades))
    raw_interval = payload.get("interval", list(defaults.interval))
    if not isinstance(raw_interval, (list, tuple)) or len(raw_interval) != 2:
        raise ConfigError("probe.interval must be a two-element list [lo, hi] (null for an infinite end)")
    lo = _as_optional_float("probe.interval[0]", raw_interval[0])
    hi = _as_optional_float("probe.interval[1]", raw_interval[1])
    if lo is not None and hi is not None and lo > hi:
        raise ConfigError("probe.interval needs lo <= hi")
    if values["eps"] <= 0.0 or values["step"] <= 0.0:
        raise ConfigError("probe.eps and probe.step must be > 0")
    if values["x"] <= 0.0:
        raise ConfigError("probe.x must be > 0")
    if values["t"] < 0.0 or values["u"] < 0.0 or values["v"] < 0.0 or values["t0"] < 0.0:
        raise ConfigError("probe times must be >= 0")
    if decades < 1:
        raise ConfigError("probe.decades must be >= 1")
    return ProbeConfig(decades=decades, interval=(lo, hi), **values)


def _parse_output(payload: dict[str, Any]) -> OutputConfig:
    _reject_unknown_keys("output", payload, _OUTPUT_KEYS)
    path = payload.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path must be a string.")
    fmt = payload.get("format", OutputConfig.format)
    if fmt not in _OUTPUT_FORMATS:
        raise ConfigError("output.format must be one of: csv, json")
    return OutputConfig(path=path, format=fmt, timings=_as_bool("output.timings", payload.get("timings", False)))


def parse_config(raw: Any) -> RunConfig:
    root = _expect_dict("config", raw or {})
    _reject_unknown_keys("config", root, _EXPECTED_TOP_KEYS)
    version = _as_int("version", root.get("version", 1))
    if version != 1:
        raise ConfigError(f"unsupported config version: {version}")
    return RunConfig(
        version=version,
        function=_parse_function(_expect_dict("function", root.get("function", {}))),
        grid=_parse_grid(_expect_dict("grid", root.get("grid", {}))),
        mc=_parse_mc(_expect_dict("mc", root.get("mc", {}))),
        probe=_parse_probe(_expect_dict("probe", root.get("probe", {}))),
        output=_parse_output(_expect_dict("output", root.get("output", {}))),
    )


def load_config(path: Path | None = None) -> RunConfig:
    """Built-in defaults for ``None``; otherwise a YAML (or JSON) document mirroring RunConfig."""
    if path is None:
        return parse_config({})
    if yaml is None:
        raise ConfigError("PyYAML is required to load config files. Install with: pip install pyyaml")
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid config document {path}: {exc}") from exc
    return parse_config(raw)
