"""
Angelic exploration.

The expression at a fix location is replaced by a probe X. Each test is then
replayed while an oracle forces X's successive evaluations through a
breadth-first tree of candidate values; every value sequence under which the
test passes is an angelic path, and the set of them is the test's angelic
forest. The conjunction over tests of "some path of my forest" is the repair
constraint handed to synthesis.
"""
import time
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, Field, StrictBool

from repairforge.config import AngelicBounds, ExecutionLimits
from repairforge.errors import EvalBudgetExceeded, InfeasibleLocation, UnsupportedLocation
from repairforge.lang.analysis import literal_pool, statement_at
from repairforge.lang.ast import Expr, Hole, Program, ValueKind
from repairforge.lang.patching import FixLocation, expression_at, location_kind, replace_expression
from repairforge.lang.printer import format_expression
from repairforge.services.interpreter import (
    Env,
    TestCase,
    TestSuite,
    Value,
    Verdict,
    evaluate,
    passes,
)

ForcedValue = Union[StrictBool, int]


class AngelicStep(BaseModel):
    env: Dict[str, int]
    forced: ForcedValue


class AngelicPath(BaseModel):
    steps: List[AngelicStep]

    @property
    def forced_values(self) -> List[Value]:
        return [step.forced for step in self.steps]


class AngelicForest(BaseModel):
    test_name: str
    passing_paths: List[AngelicPath] = Field(default_factory=list)


class RepairConstraint(BaseModel):
    """Per-test angelic forests for one fix location."""
    location: FixLocation
    value_kind: ValueKind
    original: str
    constants: List[int] = Field(default_factory=list)
    named_constants: Dict[str, int] = Field(default_factory=dict)
    forests: List[AngelicForest] = Field(default_factory=list)
    unreached_tests: List[str] = Field(default_factory=list)

    def environments(self) -> List[Env]:
        """Distinct recorded environments, in first-seen order."""
        seen = set()
        envs: List[Env] = []
        for forest in self.forests:
            for path in forest.passing_paths:
                for step in path.steps:
                    key = tuple(sorted(step.env.items()))
                    if key not in seen:
                        seen.add(key)
                        envs.append(step.env)
        return envs


@dataclass(frozen=True)
class ProbedProgram:
    """A program whose fix-location expression has been replaced by the probe."""
    program: Program
    original_program: Program
    location: FixLocation
    original: Expr
    hole: Hole


def install_probe(program: Program, location: FixLocation) -> ProbedProgram:
    """
    Replace the expression at `location` with the probe X.

    Args:
        program: Program to instrument
        location: Fix location (its live_vars are snapshotted at each evaluation)

    Returns:
        ProbedProgram

    Raises:
        UnsupportedLocation: No statement of the location's kind on that line
    """
    stmt = statement_at(program, location.line)
    if stmt is None or location_kind(stmt) is not location.kind:
        raise UnsupportedLocation(f"line {location.line} has no {location.kind.value} to probe")
    original = expression_at(program, location)
    hole = Hole(live_vars=tuple(location.live_vars), kind=location.value_kind)
    return ProbedProgram(
        program=replace_expression(program, location.line, hole),
        original_program=program,
        location=location,
        original=original,
        hole=hole,
    )


def angelic_domain(pp: ProbedProgram, test: TestCase) -> List[Value]:
    """
    Candidate values for forcing X.

    Boolean: true then false. Integer: the sorted union of -8..8, the test's
    inputs, its expected output, the program's constant values and the
    pairwise sums and products of the inputs.
    """
    if pp.hole.kind is ValueKind.BOOLEAN:
        return [True, False]
    values = set(range(-8, 9))
    values.update(test.inputs)
    values.add(test.expected)
    values.update(pp.program.constant_values.values())
    for i, x in enumerate(test.inputs):
        for y in test.inputs[i:]:
            values.add(x + y)
            values.add(x * y)
    return sorted(values)


class _NeedValue(Exception):
    """Raised by the forcing oracle when the replay runs past its prefix."""


class _ForcingOracle:
    def __init__(self, forced: Sequence[Value]):
        self.forced = forced
        self.position = 0

    def __call__(self, env: Env) -> Value:
        if self.position >= len(self.forced):
            raise _NeedValue()
        value = self.forced[self.position]
        self.position += 1
        return value


def _deadline_passed(deadline: Optional[float]) -> bool:
    return deadline is not None and time.monotonic() > deadline


def collect_forest(
    pp: ProbedProgram,
    test: TestCase,
    bounds: Optional[AngelicBounds] = None,
    limits: Optional[ExecutionLimits] = None,
    deadline: Optional[float] = None,
) -> Optional[AngelicForest]:
    """
    Explore forced valuations of X breadth-first and keep the passing ones.

    Args:
        pp: Probed program
        test: Test to replay
        bounds: max_evals per replay, max_paths per forest, max_replays per test
        limits: Step budget per replay
        deadline: time.monotonic() value after which exploration stops

    Returns:
        The forest (possibly with no passing paths), or None when the test
        never evaluates X and passes anyway

    Raises:
        InfeasibleLocation: The test never evaluates X and fails
        EvalBudgetExceeded: No passing path was found and the search was cut
            short by max_evals, max_replays or the deadline
    """
    bounds = bounds or AngelicBounds()
    limits = limits or ExecutionLimits()
    domain = angelic_domain(pp, test)

    paths: List[AngelicPath] = []
    queue: Deque[Tuple[Value, ...]] = deque([()])
    replays = 0
    truncated = False

    while queue:
        if replays >= bounds.max_replays or (replays % 256 == 0 and _deadline_passed(deadline)):
            truncated = True
            break
        prefix = queue.popleft()
        replays += 1
        oracle = _ForcingOracle(prefix)
        try:
            result = evaluate(pp.program, test.inputs, limits, oracle=oracle)
        except _NeedValue:
            if len(prefix) >= bounds.max_evals:
                truncated = True
                continue
            queue.extend(prefix + (value,) for value in domain)
            continue

        if not result.eval_log:
            if passes(result, test):
                return None
            raise InfeasibleLocation(
                f"test {test.name} fails without reaching line {pp.location.line}",
                test_name=test.name,
            )
        if passes(result, test):
            paths.append(
                AngelicPath(
                    steps=[AngelicStep(env=dict(ev.env), forced=ev.value) for ev in result.eval_log]
                )
            )
            if len(paths) >= bounds.max_paths:
                break

    if not paths and truncated:
        raise EvalBudgetExceeded(
            f"test {test.name}: no angelic path within {bounds.max_evals} evaluations "
            f"of line {pp.location.line} ({replays} replays)"
        )
    logger.debug(
        "Forest for {} at line {}: {} paths after {} replays",
        test.name,
        pp.location.line,
        len(paths),
        replays,
    )
    return AngelicForest(test_name=test.name, passing_paths=paths)


def build_repair_constraint(
    pp: ProbedProgram,
    suite: TestSuite,
    bounds: Optional[AngelicBounds] = None,
    limits: Optional[ExecutionLimits] = None,
    deadline: Optional[float] = None,
) -> RepairConstraint:
    """
    Collect a forest for every test in T.

    Args:
        pp: Probed program
        suite: Test suite (held-out tests are ignored)
        bounds: Exploration bounds
        limits: Step budget per replay
        deadline: time.monotonic() value after which exploration stops

    Returns:
        RepairConstraint with one forest per test that reaches X

    Raises:
        InfeasibleLocation: Some test cannot pass under any explored valuation
        EvalBudgetExceeded: Exploration of some test was cut short without a path
    """
    forests: List[AngelicForest] = []
    unreached: List[str] = []
    for test in suite.cases:
        forest = collect_forest(pp, test, bounds, limits, deadline)
        if forest is None:
            unreached.append(test.name)
            continue
        if not forest.passing_paths:
            raise InfeasibleLocation(
                f"no value at line {pp.location.line} makes test {test.name} pass",
                test_name=test.name,
            )
        forests.append(forest)

    logger.info(
        "Repair constraint at line {}: {} forests, {} unreached tests",
        pp.location.line,
        len(forests),
        len(unreached),
    )
    return RepairConstraint(
        location=pp.location,
        value_kind=pp.hole.kind,
        original=format_expression(pp.original),
        constants=list(literal_pool(pp.original_program)),
        named_constants=pp.original_program.constant_values,
        forests=forests,
        unreached_tests=unreached,
    )


def replay_path(
    pp: ProbedProgram,
    test: TestCase,
    path: AngelicPath,
    limits: Optional[ExecutionLimits] = None,
) -> Verdict:
    """
    Replay a test forcing X along `path`.

    Passes only when the test passes, X is evaluated exactly len(path) times
    and every evaluation sees the recorded environment.
    """
    oracle = _ForcingOracle(path.forced_values)
    try:
        result = evaluate(pp.program, test.inputs, limits or ExecutionLimits(), oracle=oracle)
    except _NeedValue:
        return Verdict.FAIL
    if len(result.eval_log) != len(path.steps):
        return Verdict.FAIL
    for evaluation, step in zip(result.eval_log, path.steps):
        if dict(evaluation.env) != step.env:
            return Verdict.FAIL
    return Verdict.PASS if passes(result, test) else Verdict.FAIL
