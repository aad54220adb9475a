"""
Concrete big-step interpreter and test harness.

Runtime faults of the interpreted program (division by zero, reading an
unset local, falling off the end, running out of steps) are reported as
`ExecutionResult` statuses, never raised to the caller.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, Field, model_validator

from repairforge.config import ExecutionLimits
from repairforge.errors import ArityMismatch
from repairforge.lang.ast import (
    Assign,
    BinOp,
    Binary,
    ConstRef,
    Expr,
    Hole,
    If,
    IntLit,
    Program,
    Return,
    Stmt,
    Unary,
    UnOp,
    Var,
    VarDecl,
    While,
)

Value = Union[bool, int]
Env = Dict[str, int]
# Called once per evaluation of the probe with a snapshot of its live variables.
Oracle = Callable[[Env], Value]


class TestCase(BaseModel):
    """Named input vector with its expected return value."""
    __test__ = False

    name: str
    inputs: List[int]
    expected: int


class TestSuite(BaseModel):
    __test__ = False

    function: Optional[str] = None
    cases: List[TestCase] = Field(default_factory=list)
    held_out: List[TestCase] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_names(self) -> "TestSuite":
        names = [case.name for case in self.cases + self.held_out]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"duplicate test names: {', '.join(duplicates)}")
        return self


class Status(str, Enum):
    RETURNED = "Returned"
    RUNTIME_ERROR = "RuntimeError"
    BOUND_EXCEEDED = "BoundExceeded"


class FaultKind(str, Enum):
    DIV_BY_ZERO = "DivByZero"
    UNINITIALIZED = "Uninitialized"
    MISSING_RETURN = "MissingReturn"


class Verdict(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass(frozen=True)
class ProbeEvaluation:
    """One dynamic evaluation of the probe: where, in which state, what it yielded."""
    line: int
    env: Mapping[str, int]
    value: Value


@dataclass(frozen=True)
class ExecutionResult:
    status: Status
    value: Optional[int] = None
    fault: Optional[FaultKind] = None
    fault_line: Optional[int] = None
    covered: FrozenSet[int] = frozenset()
    eval_log: Tuple[ProbeEvaluation, ...] = ()
    steps: int = 0

    @property
    def returned(self) -> bool:
        return self.status is Status.RETURNED

    def describe(self) -> str:
        if self.status is Status.RETURNED:
            return str(self.value)
        if self.status is Status.BOUND_EXCEEDED:
            return "BoundExceeded"
        return f"{self.fault.value} at line {self.fault_line}"


class _Fault(Exception):
    def __init__(self, kind: FaultKind, line: int):
        self.kind = kind
        self.line = line


class _OutOfSteps(Exception):
    pass


def _c_div(a: int, b: int) -> int:
    quotient = abs(a) // abs(b)
    return quotient if (a >= 0) == (b > 0) else -quotient


def apply_unary(op: UnOp, value: Value) -> Value:
    if op is UnOp.NEG:
        return -value
    return not value


def apply_binary(op: BinOp, left: Value, right: Value) -> Value:
    """
    Apply a strict binary operator.

    `&&` and `||` are evaluated eagerly here; callers that need
    short-circuiting must test the left operand first.

    Raises:
        ZeroDivisionError: `/` or `%` with a zero divisor
    """
    if op is BinOp.ADD:
        return left + right
    if op is BinOp.SUB:
        return left - right
    if op is BinOp.MUL:
        return left * right
    if op is BinOp.DIV:
        if right == 0:
            raise ZeroDivisionError("division by zero")
        return _c_div(left, right)
    if op is BinOp.MOD:
        if right == 0:
            raise ZeroDivisionError("modulo by zero")
        return left - right * _c_div(left, right)
    if op is BinOp.EQ:
        return left == right
    if op is BinOp.NE:
        return left != right
    if op is BinOp.LT:
        return left < right
    if op is BinOp.LE:
        return left <= right
    if op is BinOp.GT:
        return left > right
    if op is BinOp.GE:
        return left >= right
    if op is BinOp.AND:
        return left and right
    return left or right


def evaluate_expression(expr: Expr, env: Mapping[str, int], constants: Mapping[str, int]) -> Value:
    """
    Evaluate a hole-free expression in a fixed environment.

    Raises:
        ZeroDivisionError: Division or modulo by zero on the evaluated path
        KeyError: A variable missing from `env`
    """
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, ConstRef):
        return constants[expr.name]
    if isinstance(expr, Unary):
        return apply_unary(expr.op, evaluate_expression(expr.operand, env, constants))
    if isinstance(expr, Binary):
        left = evaluate_expression(expr.left, env, constants)
        if expr.op is BinOp.AND and not left:
            return False
        if expr.op is BinOp.OR and left:
            return True
        return apply_binary(expr.op, left, evaluate_expression(expr.right, env, constants))
    raise ValueError("cannot evaluate a probe without an oracle")


class _Machine:
    """Executes one function call."""

    def __init__(self, program: Program, limits: ExecutionLimits, oracle: Optional[Oracle]):
        self.program = program
        self.constants = program.constant_values
        self.step_budget = limits.step_budget
        self.oracle = oracle
        self.env: Env = {}
        self.steps = 0
        self.covered: set = set()
        self.eval_log: List[ProbeEvaluation] = []
        self.line = program.function.line

    def _step(self) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise _OutOfSteps()

    def run(self, inputs: List[int]) -> Optional[int]:
        self.env = dict(zip(self.program.function.params, inputs))
        return self._body(self.program.function.body)

    def _body(self, body: Tuple[Stmt, ...]) -> Optional[int]:
        for stmt in body:
            result = self._stmt(stmt)
            if result is not None:
                return result
        return None

    def _stmt(self, stmt: Stmt) -> Optional[int]:
        self._step()
        self.line = stmt.line
        self.covered.add(stmt.line)
        if isinstance(stmt, (VarDecl, Assign)):
            value = self._eval(stmt.init if isinstance(stmt, VarDecl) else stmt.value)
            self.env[stmt.name] = value
            return None
        if isinstance(stmt, If):
            if self._eval(stmt.cond):
                return self._body(stmt.then_body)
            if stmt.else_body is not None:
                return self._body(stmt.else_body)
            return None
        if isinstance(stmt, While):
            while True:
                self._step()
                self.line = stmt.line
                if not self._eval(stmt.cond):
                    return None
                result = self._body(stmt.body)
                if result is not None:
                    return result
        if isinstance(stmt, Return):
            return self._eval(stmt.value)
        raise TypeError(f"unknown statement {stmt!r}")

    def _eval(self, expr: Expr) -> Value:
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, Var):
            try:
                return self.env[expr.name]
            except KeyError:
                raise _Fault(FaultKind.UNINITIALIZED, self.line) from None
        if isinstance(expr, ConstRef):
            return self.constants[expr.name]
        if isinstance(expr, Unary):
            return apply_unary(expr.op, self._eval(expr.operand))
        if isinstance(expr, Binary):
            left = self._eval(expr.left)
            if expr.op is BinOp.AND and not left:
                return False
            if expr.op is BinOp.OR and left:
                return True
            try:
                return apply_binary(expr.op, left, self._eval(expr.right))
            except ZeroDivisionError:
                raise _Fault(FaultKind.DIV_BY_ZERO, self.line) from None
        return self._probe(expr)

    def _probe(self, hole: Hole) -> Value:
        snapshot = {name: self.env[name] for name in hole.live_vars if name in self.env}
        if self.oracle is None:
            raise ValueError("program contains a probe but no oracle was supplied")
        value = self.oracle(dict(snapshot))
        self.eval_log.append(ProbeEvaluation(line=self.line, env=snapshot, value=value))
        return value


def evaluate(
    program: Program,
    inputs: List[int],
    limits: Optional[ExecutionLimits] = None,
    oracle: Optional[Oracle] = None,
) -> ExecutionResult:
    """
    Run the program's function on one input vector.

    Args:
        program: Program to execute (may contain a probe)
        inputs: Positional arguments
        limits: Step budget; defaults from settings
        oracle: Supplies the probe's value at each evaluation

    Returns:
        ExecutionResult with status, coverage and probe log

    Raises:
        ArityMismatch: Wrong number of inputs
    """
    if len(inputs) != program.arity:
        raise ArityMismatch(
            f"{program.function.name} takes {program.arity} inputs, got {len(inputs)}"
        )
    machine = _Machine(program, limits or ExecutionLimits(), oracle)
    try:
        value = machine.run(list(inputs))
    except _OutOfSteps:
        status, value, fault, fault_line = Status.BOUND_EXCEEDED, None, None, None
    except _Fault as exc:
        status, value, fault, fault_line = Status.RUNTIME_ERROR, None, exc.kind, exc.line
    else:
        if value is None:
            status, fault, fault_line = Status.RUNTIME_ERROR, FaultKind.MISSING_RETURN, machine.line
        else:
            status, fault, fault_line = Status.RETURNED, None, None

    return ExecutionResult(
        status=status,
        value=value,
        fault=fault,
        fault_line=fault_line,
        covered=frozenset(machine.covered),
        eval_log=tuple(machine.eval_log),
        steps=machine.steps,
    )


def passes(result: ExecutionResult, test: TestCase) -> bool:
    return result.status is Status.RETURNED and result.value == test.expected


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    test: TestCase
    result: ExecutionResult

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASS if passes(self.result, self.test) else Verdict.FAIL

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


class TestVerdict(BaseModel):
    """Serializable verdict of one test."""
    __test__ = False

    name: str
    inputs: List[int]
    expected: int
    actual: str
    verdict: Verdict


@dataclass(frozen=True)
class SuiteReport:
    """Per-test verdicts in suite order."""
    outcomes: Tuple[TestOutcome, ...] = field(default_factory=tuple)

    def to_verdicts(self) -> List[TestVerdict]:
        return [
            TestVerdict(
                name=outcome.test.name,
                inputs=list(outcome.test.inputs),
                expected=outcome.test.expected,
                actual=outcome.result.describe(),
                verdict=outcome.verdict,
            )
            for outcome in self.outcomes
        ]

    @property
    def passed(self) -> List[TestOutcome]:
        return [outcome for outcome in self.outcomes if outcome.passed]

    @property
    def failed(self) -> List[TestOutcome]:
        return [outcome for outcome in self.outcomes if not outcome.passed]

    @property
    def all_passed(self) -> bool:
        return not self.failed

    @property
    def verdicts(self) -> List[Verdict]:
        return [outcome.verdict for outcome in self.outcomes]


def run_tests(program: Program, tests: List[TestCase], limits: Optional[ExecutionLimits] = None) -> SuiteReport:
    limits = limits or ExecutionLimits()
    outcomes = tuple(TestOutcome(test=test, result=evaluate(program, test.inputs, limits)) for test in tests)
    report = SuiteReport(outcomes=outcomes)
    logger.debug(
        "Ran {} tests on {}: {} passed, {} failed",
        len(outcomes),
        program.function.name,
        len(report.passed),
        len(report.failed),
    )
    return report


def run_suite(program: Program, suite: TestSuite, limits: Optional[ExecutionLimits] = None) -> SuiteReport:
    """
    Run every test in `suite.cases` (held-out tests are not part of T).

    Args:
        program: Program under test
        suite: Test suite
        limits: Step budget per test

    Returns:
        SuiteReport in suite order
    """
    return run_tests(program, suite.cases, limits)
