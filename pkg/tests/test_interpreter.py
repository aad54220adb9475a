"""Tests for the MiniLang interpreter and suite runner."""
import pytest

from repairforge.config import ExecutionLimits
from repairforge.errors import ArityMismatch
from repairforge.lang import parse_expression, parse_program
from repairforge.lang.ast import BinOp
from repairforge.services.interpreter import (
    FaultKind,
    Status,
    TestCase,
    TestSuite,
    Verdict,
    apply_binary,
    evaluate,
    evaluate_expression,
    run_suite,
)

LOOP = """function spin(n) {
    var i = 0;
    while (i < n) {
        i = i;
    }
    return i;
}
"""

MAYBE_UNSET = """function f(x) {
    if (x > 0) {
        var y = 1;
    }
    return y;
}
"""

NO_RETURN = """function f(x) {
    if (x > 0) {
        return 1;
    }
}
"""


def test_triangle_outcomes_match_the_bug(triangle):
    program, suite = triangle
    report = run_suite(program, suite)
    assert report.verdicts == [Verdict.PASS, Verdict.PASS, Verdict.PASS, Verdict.FAIL, Verdict.PASS, Verdict.PASS]
    failing = report.failed[0]
    assert failing.test.name == "t4"
    assert failing.result.value == 3
    assert failing.result.covered == frozenset({2, 4, 6, 8})


def test_held_out_not_in_suite_run(triangle):
    program, suite = triangle
    assert len(run_suite(program, suite).outcomes) == len(suite.cases)


@pytest.mark.parametrize("n, expected", [(0, 0), (1, 0), (3, 3), (4, 6)])
def test_loop_program(sum_to, n, expected):
    program, _ = sum_to
    result = evaluate(program, [n])
    assert result.status is Status.RETURNED
    assert result.value == expected


@pytest.mark.parametrize(
    "a, b, quotient, remainder",
    [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1)],
)
def test_division_truncates_toward_zero(a, b, quotient, remainder):
    assert apply_binary(BinOp.DIV, a, b) == quotient
    assert apply_binary(BinOp.MOD, a, b) == remainder


def test_division_by_zero_is_a_runtime_error():
    program = parse_program("function f(x) {\n    return 10 / x;\n}")
    result = evaluate(program, [0])
    assert result.status is Status.RUNTIME_ERROR
    assert result.fault is FaultKind.DIV_BY_ZERO
    assert result.fault_line == 2
    assert result.describe() == "DivByZero at line 2"


def test_short_circuit_skips_division():
    program = parse_program("function f(x) {\n    if (x != 0 && 10 / x > 1) {\n        return 1;\n    }\n    return 0;\n}")
    assert evaluate(program, [0]).value == 0
    assert evaluate(program, [3]).value == 1
    assert evaluate_expression(parse_expression("x == 0 || 1 / x == 0"), {"x": 0}, {}) is True


def test_uninitialized_local():
    program = parse_program(MAYBE_UNSET)
    assert evaluate(program, [1]).value == 1
    result = evaluate(program, [0])
    assert result.fault is FaultKind.UNINITIALIZED
    assert result.fault_line == 5


def test_missing_return():
    result = evaluate(parse_program(NO_RETURN), [0])
    assert result.status is Status.RUNTIME_ERROR
    assert result.fault is FaultKind.MISSING_RETURN


def test_step_budget():
    program = parse_program(LOOP)
    result = evaluate(program, [1], ExecutionLimits(step_budget=50))
    assert result.status is Status.BOUND_EXCEEDED
    assert result.describe() == "BoundExceeded"
    assert evaluate(program, [0], ExecutionLimits(step_budget=50)).value == 0


def test_arity_mismatch(triangle):
    program, _ = triangle
    with pytest.raises(ArityMismatch):
        evaluate(program, [1, 2])


def test_constants_resolve(withdraw):
    program, _ = withdraw
    assert evaluate(program, [20, 50]).value == -1
    assert evaluate(program, [100, 30]).value == 70


def test_evaluation_is_deterministic(triangle):
    program, _ = triangle
    assert evaluate(program, [2, 3, 2]) == evaluate(program, [2, 3, 2])


def test_runtime_error_fails_its_test():
    program = parse_program("function f(x) {\n    return 10 / x;\n}")
    suite = TestSuite(cases=[TestCase(name="zero", inputs=[0], expected=0)])
    report = run_suite(program, suite)
    assert report.verdicts == [Verdict.FAIL]
    assert report.to_verdicts()[0].actual == "DivByZero at line 2"


def test_duplicate_test_names_rejected():
    with pytest.raises(ValueError):
        TestSuite(
            cases=[TestCase(name="a", inputs=[1], expected=1)],
            held_out=[TestCase(name="a", inputs=[2], expected=2)],
        )
