"""
Repair orchestration: run, localize, then for each candidate location
constrain, synthesize and validate until a patch passes the whole suite.
"""
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from loguru import logger
from pydantic import BaseModel, Field

from repairforge.config import ExecutionLimits, RepairConfig
from repairforge.errors import (
    EvalBudgetExceeded,
    InfeasibleLocation,
    InvalidInputFile,
    NoRepairableLocation,
    SynthesisExhausted,
)
from repairforge.lang.analysis import statement_count
from repairforge.lang.ast import Expr, Program
from repairforge.lang.patching import FixLocation, LocationKind, Patch, PatchFile, apply_patch, is_single_edit
from repairforge.lang.printer import format_expression, pretty_print
from repairforge.services.angelic import build_repair_constraint, install_probe
from repairforge.services.fault_localization import candidate_locations, suspiciousness
from repairforge.services.interpreter import SuiteReport, TestSuite, run_suite
from repairforge.services.synthesis import SynthesisStats, component_levels, synthesize_in_levels


class RepairStatus(str, Enum):
    REPAIRED = "Repaired"
    ALREADY_PASSING = "AlreadyPassing"
    NO_PATCH_FOUND = "NoPatchFound"


class AttemptResult(str, Enum):
    INFEASIBLE = "Infeasible"
    SYNTHESIS_EXHAUSTED = "SynthesisExhausted"
    VALIDATION_FAILED = "ValidationFailed"
    ACCEPTED = "Accepted"


@dataclass(frozen=True)
class LocationAttempt:
    location: FixLocation
    result: AttemptResult
    detail: str = ""
    candidate: Optional[Expr] = None
    elapsed_secs: float = 0.0


@dataclass
class RepairStats:
    tests_run: int = 0
    candidates_checked: int = 0
    candidates_generated: int = 0
    elapsed_secs: float = 0.0


class AttemptReport(BaseModel):
    line: int
    kind: LocationKind
    live_vars: List[str]
    result: AttemptResult
    detail: str = ""
    candidate: Optional[str] = None
    elapsed_secs: float = 0.0


class RepairStatsReport(BaseModel):
    tests_run: int = 0
    candidates_checked: int = 0
    candidates_generated: int = 0
    elapsed_secs: float = 0.0


class RepairReport(BaseModel):
    """JSON form of a repair outcome."""
    status: RepairStatus
    patch: Optional[PatchFile] = None
    repaired_source: Optional[str] = None
    attempts: List[AttemptReport] = Field(default_factory=list)
    stats: RepairStatsReport = Field(default_factory=RepairStatsReport)


@dataclass
class RepairOutcome:
    status: RepairStatus
    patch: Optional[Patch] = None
    repaired: Optional[Program] = None
    attempts: List[LocationAttempt] = field(default_factory=list)
    stats: RepairStats = field(default_factory=RepairStats)

    def to_report(self) -> RepairReport:
        return RepairReport(
            status=self.status,
            patch=PatchFile.from_patch(self.patch) if self.patch else None,
            repaired_source=pretty_print(self.repaired) if self.repaired else None,
            attempts=[
                AttemptReport(
                    line=attempt.location.line,
                    kind=attempt.location.kind,
                    live_vars=list(attempt.location.live_vars),
                    result=attempt.result,
                    detail=attempt.detail,
                    candidate=format_expression(attempt.candidate) if attempt.candidate is not None else None,
                    elapsed_secs=round(attempt.elapsed_secs, 3),
                )
                for attempt in self.attempts
            ],
            stats=RepairStatsReport(
                tests_run=self.stats.tests_run,
                candidates_checked=self.stats.candidates_checked,
                candidates_generated=self.stats.candidates_generated,
                elapsed_secs=round(self.stats.elapsed_secs, 3),
            ),
        )


def validate(
    program: Program,
    patch: Patch,
    suite: TestSuite,
    limits: Optional[ExecutionLimits] = None,
) -> SuiteReport:
    """
    Run the full suite on the patched program.

    Raises:
        LocationMismatch: The patch does not apply to `program`
    """
    return run_suite(apply_patch(program, patch), suite, limits)


def repair(program: Program, suite: TestSuite, cfg: Optional[RepairConfig] = None) -> RepairOutcome:
    """
    Search for a single-expression patch that makes every test in T pass.

    Args:
        program: Buggy program
        suite: Test suite; only `cases` guide and validate the repair
        cfg: Repair configuration

    Returns:
        RepairOutcome (Repaired, AlreadyPassing or NoPatchFound)
    """
    cfg = cfg or RepairConfig()
    if not suite.cases:
        raise InvalidInputFile("test suite has no tests")

    started = time.monotonic()
    overall_deadline = started + cfg.budget_secs
    limits = cfg.limits()
    bounds = cfg.bounds()
    outcome = RepairOutcome(status=RepairStatus.NO_PATCH_FOUND)

    def finish(status: RepairStatus) -> RepairOutcome:
        outcome.status = status
        outcome.stats.elapsed_secs = time.monotonic() - started
        logger.info("Repair finished: {} in {:.2f}s", status.value, outcome.stats.elapsed_secs)
        return outcome

    baseline = run_suite(program, suite, limits)
    outcome.stats.tests_run += len(baseline.outcomes)
    if baseline.all_passed:
        return finish(RepairStatus.ALREADY_PASSING)

    try:
        locations = candidate_locations(suspiciousness(baseline, cfg.formula), program, cfg.top_k)
    except NoRepairableLocation as exc:
        logger.warning("{}", exc)
        return finish(RepairStatus.NO_PATCH_FOUND)
    logger.info("Candidate fix lines: {}", [loc.line for loc in locations])

    for location in locations:
        now = time.monotonic()
        if now > overall_deadline:
            logger.warning("Overall budget of {}s exhausted", cfg.budget_secs)
            break
        deadline = min(now + cfg.location_budget_secs, overall_deadline)

        def record(result: AttemptResult, detail: str = "", candidate: Optional[Expr] = None) -> None:
            outcome.attempts.append(
                LocationAttempt(
                    location=location,
                    result=result,
                    detail=detail,
                    candidate=candidate,
                    elapsed_secs=time.monotonic() - now,
                )
            )
            logger.info("Line {}: {} {}", location.line, result.value, detail)

        pp = install_probe(program, location)
        try:
            rc = build_repair_constraint(pp, suite, bounds, limits, deadline)
        except (InfeasibleLocation, EvalBudgetExceeded) as exc:
            record(AttemptResult.INFEASIBLE, str(exc))
            continue

        stats = SynthesisStats()
        levels = component_levels(
            rc,
            include_div=cfg.include_div,
            unrestricted_constants=cfg.unrestricted_constants,
            unrestricted_range=cfg.unrestricted_range,
        )
        try:
            candidate = synthesize_in_levels(rc, levels, cfg.max_size, deadline=deadline, stats=stats)
        except SynthesisExhausted as exc:
            record(AttemptResult.SYNTHESIS_EXHAUSTED, str(exc))
            continue
        finally:
            outcome.stats.candidates_checked += stats.checked
            outcome.stats.candidates_generated += stats.generated

        if candidate == pp.original:
            record(AttemptResult.VALIDATION_FAILED, "candidate equals the original expression", candidate)
            continue

        patch = Patch(location=location, replacement=candidate, original=pp.original)
        report = validate(program, patch, suite, limits)
        outcome.stats.tests_run += len(report.outcomes)
        if not report.all_passed:
            failing = ", ".join(o.test.name for o in report.failed)
            record(AttemptResult.VALIDATION_FAILED, f"fails {failing}", candidate)
            continue

        repaired = apply_patch(program, patch)
        assert run_suite(repaired, suite, limits).all_passed
        assert statement_count(repaired) == statement_count(program)
        assert is_single_edit(program, repaired)

        record(AttemptResult.ACCEPTED, patch.describe(), candidate)
        outcome.patch = patch
        outcome.repaired = repaired
        return finish(RepairStatus.REPAIRED)

    return finish(RepairStatus.NO_PATCH_FOUND)
