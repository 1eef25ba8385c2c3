from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import Any

from .common import Verdict


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class McReport:
    """One verdict: an estimate set against its target under a named tolerance rule."""

    check_id: str
    target: float
    estimate: float
    se: float
    tolerance_rule: str
    verdict: Verdict
    seed: int
    n: int
    runtime_ms: int = 0
    detail: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "check_id": self.check_id,
            "target": _finite(self.target),
            "estimate": _finite(self.estimate),
            "se": _finite(self.se),
            "tolerance_rule": self.tolerance_rule,
            "verdict": self.verdict,
            "seed": self.seed,
            "n": self.n,
        }
        if self.detail is not None:
            payload["detail"] = self.detail
        if include_timing:
            payload["runtime_ms"] = self.runtime_ms
        return payload


def make_report(
    check_id: str,
    *,
    target: float,
    estimate: float,
    se: float,
    rule: str,
    passed: bool,
    seed: int,
    n: int,
    detail: str | None = None,
) -> McReport:
    return McReport(
        check_id=check_id,
        target=float(target),
        estimate=float(estimate),
        se=float(se),
        tolerance_rule=rule,
        verdict="pass" if passed else "fail",
        seed=seed,
        n=n,
        detail=detail,
    )


def timed(build: Callable[[], McReport | list[McReport]]) -> list[McReport]:
    """Run a check and stamp its wall time on every report it returns."""
    start = time.perf_counter()
    produced = build()
    elapsed = int(round((time.perf_counter() - start) * 1000.0))
    reports = produced if isinstance(produced, list) else [produced]
    return [replace(report, runtime_ms=elapsed) for report in reports]
