from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from rfbm_lab.models import McReport, make_report, timed
from rfbm_lab.observability import emit_event, suite_events
from rfbm_lab.report.csv_writer import render_csv, write_csv
from rfbm_lab.report.json_writer import dumps_report, write_json


def _report(**overrides) -> McReport:
    fields = {
        "target": 1.0,
        "estimate": 0.98,
        "se": 0.01,
        "rule": "3*SE",
        "passed": True,
        "seed": 4,
        "n": 100,
    }
    fields.update(overrides)
    return make_report("variance.law.t1", **fields)


def test_report_dict_omits_timing_by_default() -> None:
    payload = _report().to_dict()

    assert list(payload) == ["check_id", "target", "estimate", "se", "tolerance_rule", "verdict", "seed", "n"]
    assert payload["verdict"] == "pass"
    assert "runtime_ms" in _report().to_dict(include_timing=True)


def test_non_finite_values_become_null() -> None:
    payload = _report(se=float("nan"), estimate=math.inf, passed=False).to_dict()

    assert payload["se"] is None
    assert payload["estimate"] is None
    assert payload["verdict"] == "fail"


def test_detail_is_carried_when_present() -> None:
    assert _report(detail="slow").to_dict()["detail"] == "slow"


def test_timed_stamps_every_report() -> None:
    reports = timed(lambda: [_report(), _report(seed=5)])

    assert len(reports) == 2
    assert all(report.runtime_ms >= 0 for report in reports)
    assert timed(_report)[0].check_id == "variance.law.t1"


def test_json_is_sorted_and_rejects_nan(tmp_path: Path) -> None:
    out = tmp_path / "nested" / "report.json"
    write_json(out, {"b": 1, "a": [1.5]})

    assert out.read_text(encoding="utf-8") == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
    assert not list(out.parent.glob(".report.json.*"))
    with pytest.raises(ValueError):
        dumps_report({"value": float("nan")})


def test_csv_always_has_header() -> None:
    text = render_csv(("t", "value"), [], header={"seed": 3, "kind": "constant"})

    assert text == "# kind=constant\n# seed=3\nt,value\n"


def test_csv_rows_use_repr_floats_and_blank_nulls(tmp_path: Path) -> None:
    out = tmp_path / "rows.csv"
    write_csv(out, ("quantity", "lower", "value"), [{"quantity": "a", "lower": 0.1, "value": None, "extra": 1}])

    assert out.read_text(encoding="utf-8") == "quantity,lower,value\na,0.1,\n"


def test_emit_event_writes_one_json_line(capsys) -> None:
    emit_event("check.finished", check_id="tails.mills_bounds", verdict="pass")
    line = capsys.readouterr().err.strip()
    payload = json.loads(line)

    assert payload["event"] == "check.finished"
    assert payload["timestamp"].endswith("Z")
    assert "\n" not in line


def test_suite_events_count_collected_reports(capsys) -> None:
    with suite_events("tails", 3) as reports:
        reports.extend([_report(), _report(passed=False)])
    events = [json.loads(line) for line in capsys.readouterr().err.splitlines()]

    assert [e["event"] for e in events] == ["suite.started", "suite.finished"]
    assert events[0]["seed"] == 3
    assert (events[1]["checks"], events[1]["failed"]) == (2, 1)


def test_suite_events_stay_silent_about_failed_runs(capsys) -> None:
    with pytest.raises(RuntimeError):
        with suite_events("ldp", 0):
            raise RuntimeError("boom")

    events = [json.loads(line)["event"] for line in capsys.readouterr().err.splitlines()]
    assert events == ["suite.started"]
