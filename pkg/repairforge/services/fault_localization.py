"""
Spectrum-based fault localization over suite coverage.
"""
import math
from collections import defaultdict
from typing import Callable, Dict, List, Literal, Optional

from loguru import logger
from pydantic import BaseModel

from repairforge.config import settings
from repairforge.errors import NoFailingTests, NoRepairableLocation
from repairforge.lang.analysis import is_bare_local_return, statement_index
from repairforge.lang.ast import Program
from repairforge.lang.patching import FixLocation, location_at
from repairforge.services.interpreter import SuiteReport

Formula = Literal["ochiai", "tarantula"]


class LineCount(BaseModel):
    line: int
    score: float
    exec_fail: int
    exec_pass: int


class SuspiciousnessReport(BaseModel):
    """Scored lines, most suspicious first (ties: higher line first)."""
    formula: Formula = "ochiai"
    total_fail: int
    total_pass: int
    entries: List[LineCount]

    def score_of(self, line: int) -> Optional[float]:
        for entry in self.entries:
            if entry.line == line:
                return entry.score
        return None


def ochiai(exec_fail: int, exec_pass: int, total_fail: int, total_pass: int) -> float:
    if exec_fail == 0:
        return 0.0
    return exec_fail / math.sqrt(total_fail * (exec_fail + exec_pass))


def tarantula(exec_fail: int, exec_pass: int, total_fail: int, total_pass: int) -> float:
    if exec_fail == 0:
        return 0.0
    fail_ratio = exec_fail / total_fail
    pass_ratio = exec_pass / total_pass if total_pass else 0.0
    return fail_ratio / (fail_ratio + pass_ratio)


FORMULAS: Dict[str, Callable[[int, int, int, int], float]] = {
    "ochiai": ochiai,
    "tarantula": tarantula,
}


def suspiciousness(report: SuiteReport, formula: Optional[Formula] = None) -> SuspiciousnessReport:
    """
    Score every executed line from pass/fail coverage.

    Args:
        report: Suite run with coverage
        formula: "ochiai" (default from settings) or "tarantula"

    Returns:
        SuspiciousnessReport sorted by score descending, then line descending

    Raises:
        NoFailingTests: Every test passes
    """
    formula = formula or settings.FORMULA
    score = FORMULAS[formula]

    total_fail = len(report.failed)
    total_pass = len(report.passed)
    if total_fail == 0:
        raise NoFailingTests("all tests pass; nothing to localize")

    exec_fail: Dict[int, int] = defaultdict(int)
    exec_pass: Dict[int, int] = defaultdict(int)
    for outcome in report.outcomes:
        counts = exec_pass if outcome.passed else exec_fail
        for line in outcome.result.covered:
            counts[line] += 1

    entries = [
        LineCount(
            line=line,
            score=score(exec_fail[line], exec_pass[line], total_fail, total_pass),
            exec_fail=exec_fail[line],
            exec_pass=exec_pass[line],
        )
        for line in set(exec_fail) | set(exec_pass)
    ]
    entries.sort(key=lambda entry: (-entry.score, -entry.line))

    logger.debug("{} scored {} lines ({} failing tests)", formula, len(entries), total_fail)
    return SuspiciousnessReport(
        formula=formula,
        total_fail=total_fail,
        total_pass=total_pass,
        entries=entries,
    )


def candidate_locations(susp: SuspiciousnessReport, program: Program, top_k: Optional[int] = None) -> List[FixLocation]:
    """
    Map the highest-scoring lines to fix locations.

    Args:
        susp: Suspiciousness report
        program: Program the report was computed on
        top_k: Maximum number of locations

    Returns:
        Up to top_k locations in ranking order

    Raises:
        NoRepairableLocation: No scored line holds a repairable statement
    """
    top_k = top_k or settings.TOP_K
    statements = statement_index(program)
    locations: List[FixLocation] = []
    for entry in susp.entries:
        if len(locations) >= top_k:
            break
        stmt = statements.get(entry.line)
        if entry.score <= 0 or stmt is None or is_bare_local_return(program, stmt):
            continue
        locations.append(location_at(program, entry.line))

    if not locations:
        raise NoRepairableLocation("no suspicious line holds a repairable expression")
    return locations
