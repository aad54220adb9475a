"""Tests for the repair orchestrator."""
import pytest

from repairforge.config import RepairConfig
from repairforge.errors import InvalidInputFile
from repairforge.lang import format_expression, parse_expression
from repairforge.lang.analysis import statement_count, statement_lines
from repairforge.lang.patching import LocationKind, Patch, changed_lines, expression_at, is_single_edit, location_at
from repairforge.services.interpreter import TestSuite, run_suite
from repairforge.services.repair_engine import (
    AttemptResult,
    RepairReport,
    RepairStatus,
    repair,
    validate,
)


def test_triangle_is_repaired_at_line_6(triangle, fast_config):
    program, suite = triangle
    outcome = repair(program, suite, fast_config)
    assert outcome.status is RepairStatus.REPAIRED
    assert outcome.patch.location.line == 6
    assert format_expression(outcome.patch.replacement) == "a == b || b == c || a == c"

    # line 8 ranks first and has no integer fix
    assert [attempt.location.line for attempt in outcome.attempts] == [8, 6]
    assert outcome.attempts[0].result is AttemptResult.SYNTHESIS_EXHAUSTED
    assert outcome.attempts[-1].result is AttemptResult.ACCEPTED

    repaired = outcome.repaired
    assert changed_lines(program, repaired) == [6]
    assert is_single_edit(program, repaired)
    assert statement_count(repaired) == statement_count(program)
    assert statement_lines(repaired) == statement_lines(program)
    assert run_suite(repaired, suite).all_passed
    assert run_suite(repaired, TestSuite(cases=suite.held_out)).all_passed


def test_square_is_repaired(square, fast_config):
    program, suite = square
    outcome = repair(program, suite, fast_config)
    assert outcome.status is RepairStatus.REPAIRED
    assert format_expression(outcome.patch.replacement) == "input * input"
    assert outcome.patch.location.kind is LocationKind.RETURN_EXPR
    assert run_suite(outcome.repaired, TestSuite(cases=suite.held_out)).all_passed


def test_loop_bound_is_repaired(sum_to, fast_config):
    program, suite = sum_to
    outcome = repair(program, suite, fast_config)
    assert outcome.status is RepairStatus.REPAIRED
    assert outcome.patch.location.line == 4
    assert format_expression(outcome.patch.replacement) == "i <= n"
    assert run_suite(outcome.repaired, TestSuite(cases=suite.held_out)).all_passed


def test_withdraw_has_no_patch(withdraw):
    program, suite = withdraw
    cfg = RepairConfig(location_budget_secs=1, budget_secs=10, max_size=7)
    outcome = repair(program, suite, cfg)
    assert outcome.status is RepairStatus.NO_PATCH_FOUND
    assert outcome.patch is None
    assert outcome.repaired is None
    # the rejecting return ranks first; neither line admits a fix over the default components
    assert [attempt.location.line for attempt in outcome.attempts] == [5, 4]
    assert all(attempt.result is AttemptResult.SYNTHESIS_EXHAUSTED for attempt in outcome.attempts)


@pytest.mark.parametrize("name", ["max_of", "abs_value"])
def test_already_passing(corpus, name):
    program, suite = corpus(name)
    outcome = repair(program, suite)
    assert outcome.status is RepairStatus.ALREADY_PASSING
    assert outcome.attempts == []
    assert outcome.stats.tests_run == len(suite.cases)


def test_empty_suite_is_rejected(triangle):
    program, _ = triangle
    with pytest.raises(InvalidInputFile):
        repair(program, TestSuite(cases=[]))


def test_top_k_limits_attempts(triangle):
    program, suite = triangle
    cfg = RepairConfig(top_k=1, location_budget_secs=1, budget_secs=10)
    outcome = repair(program, suite, cfg)
    assert outcome.status is RepairStatus.NO_PATCH_FOUND
    assert [attempt.location.line for attempt in outcome.attempts] == [8]


def test_validate_runs_full_suite(triangle):
    program, suite = triangle
    location = location_at(program, 6)
    original = expression_at(program, location)
    good = Patch(location=location, replacement=parse_expression("a == b || b == c || a == c"), original=original)
    bad = Patch(location=location, replacement=parse_expression("a == b"), original=original)
    assert validate(program, good, suite).all_passed
    assert not validate(program, bad, suite).all_passed


def test_report_json(triangle, fast_config):
    program, suite = triangle
    report = repair(program, suite, fast_config).to_report()
    assert report.status is RepairStatus.REPAIRED
    assert report.patch.line == 6
    assert report.patch.replacement == "a == b || b == c || a == c"
    assert "a == b || b == c || a == c" in report.repaired_source
    assert [attempt.line for attempt in report.attempts] == [8, 6]
    assert report.stats.tests_run >= 2 * len(suite.cases)
    assert report.stats.candidates_checked > 0

    reloaded = RepairReport.model_validate_json(report.model_dump_json())
    assert reloaded.status is RepairStatus.REPAIRED
    assert reloaded.patch == report.patch
