from __future__ import annotations

import json
from dataclasses import replace
from importlib.resources import files

import pytest
from jsonschema import Draft202012Validator

from rfbm_lab.checks import attention as attention_checks
from rfbm_lab.config import ConfigError, load_config, parse_config
from rfbm_lab.models import make_report
from rfbm_lab.suite import CHECKS, SUITE_ORDER, build_document, run_suite, suites_for
from rfbm_lab.tvfbm import TimeGrid


def _schema() -> dict:
    return json.loads(files("rfbm_lab").joinpath("schemas", "report.schema.json").read_text(encoding="utf-8"))


def test_registry_covers_every_suite() -> None:
    assert len(CHECKS) == 61
    assert {info.suite for info in CHECKS.values()} == set(SUITE_ORDER)
    for check_id, info in CHECKS.items():
        assert check_id.split(".", 1)[0] == info.suite
        assert info.invariant


def test_suite_selection() -> None:
    assert suites_for("all") == SUITE_ORDER
    assert suites_for("ldp") == ("ldp",)
    with pytest.raises(ConfigError, match="unknown suite"):
        suites_for("everything")


@pytest.mark.parametrize("suite", ["tails", "ldp", "lamperti"])
def test_deterministic_suites_pass(suite: str, capsys) -> None:
    reports = run_suite(suite, load_config(), 0)

    assert reports
    assert [r.check_id for r in reports] == sorted(r.check_id for r in reports)
    assert all(r.check_id.startswith(f"{suite}.") for r in reports)
    assert all(r.passed for r in reports), [r.check_id for r in reports if not r.passed]
    events = [json.loads(line)["event"] for line in capsys.readouterr().err.splitlines()]
    assert events[0] == "suite.started"
    assert events[-1] == "suite.finished"
    assert events.count("check.finished") == len(reports)


def test_suite_reports_are_reproducible() -> None:
    config = load_config()
    first = [r.to_dict() for r in run_suite("ldp", config, 3)]
    second = [r.to_dict() for r in run_suite("ldp", config, 3)]

    assert first == second


def test_document_validates_against_schema() -> None:
    config = parse_config({"mc": {"n_paths": 100}})
    reports = [
        make_report("tails.mills_bounds", target=0.0, estimate=0.0, se=0.0, rule="strict", passed=True, seed=1, n=200),
        make_report("ldp.limit", target=-0.5, estimate=float("nan"), se=0.0, rule="15%", passed=False, seed=1, n=5),
    ]
    document = build_document("all", config, 1, reports, include_timing=True)

    Draft202012Validator(_schema()).validate(document)
    assert document["totals"] == {"checks": 2, "failed": 1, "passed": 1}
    assert document["tool"]["name"] == "rfbm-lab"
    assert "runtime_ms" in document["reports"][0]


def test_schema_rejects_unknown_verdict() -> None:
    document = build_document("tails", load_config(), 0, [])
    document["reports"] = [
        {
            "check_id": "tails.mills_bounds",
            "target": 0.0,
            "estimate": 0.0,
            "se": 0.0,
            "tolerance_rule": "strict",
            "verdict": "maybe",
            "seed": 0,
            "n": 1,
        }
    ]

    assert list(Draft202012Validator(_schema()).iter_errors(document))


def _small_profile_run(monkeypatch, converged) -> None:
    real_solve = attention_checks.solve_rfbm

    def solve(grid, f, seed, **kwargs):
        return replace(real_solve(grid, f, seed, **kwargs), converged=converged(seed))

    monkeypatch.setattr(attention_checks, "solve_rfbm", solve)
    monkeypatch.setattr(attention_checks, "_PROFILE_SEEDS", 2)
    monkeypatch.setattr(attention_checks, "_PROFILE_GRID", TimeGrid(horizon=3.0, n=60))


def test_attention_profiles_skip_unconverged_solutions(monkeypatch) -> None:
    _small_profile_run(monkeypatch, lambda seed: seed % 2 == 0)
    reports = attention_checks._profile_checks(0)

    assert [r.n for r in reports] == [5, 5, 5]
    assert all(r.detail == "1 of 2 solutions did not converge and were skipped" for r in reports)


def test_attention_profiles_fail_when_nothing_converges(monkeypatch) -> None:
    _small_profile_run(monkeypatch, lambda seed: False)
    reports = attention_checks._profile_checks(0)

    assert not any(r.passed for r in reports)
    assert all(r.n == 0 for r in reports)
