"""Structured run events on stderr, one sorted-key JSON line each.

stdout stays reserved for command output.
"""

from __future__ import annotations

import json
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime, timezone

from .models import McReport


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def emit_event(event: str, **fields: object) -> None:
    payload = {"event": event, "timestamp": _utc_stamp(), **fields}
    print(json.dumps(payload, separators=(",", ":"), sort_keys=True, default=str), file=sys.stderr, flush=True)


def emit_check(report: McReport) -> None:
    emit_event("check.finished", check_id=report.check_id, verdict=report.verdict, runtime_ms=report.runtime_ms)


@contextmanager
def suite_events(suite: str, seed: int) -> Iterator[list[McReport]]:
    """Bracket a suite run with started/finished events.

    Reports appended to the yielded list are counted in ``suite.finished``.
    Nothing is emitted for a run that raises.
    """
    emit_event("suite.started", suite=suite, seed=seed)
    started = time.perf_counter()
    reports: list[McReport] = []
    yield reports
    emit_event(
        "suite.finished",
        suite=suite,
        checks=len(reports),
        failed=sum(1 for r in reports if not r.passed),
        runtime_ms=int(round((time.perf_counter() - started) * 1000.0)),
    )
