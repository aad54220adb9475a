"""
Evidence for a repair: amplified tests T' around the patched program, and
an overfitting audit against held-out tests.
"""
import itertools
import random
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Set, Tuple

from loguru import logger
from pydantic import BaseModel, Field

from repairforge.config import ExecutionLimits, settings
from repairforge.errors import ArityMismatch, NoHeldOutTests
from repairforge.lang.ast import Program
from repairforge.lang.patching import Patch, PatchFile, apply_patch
from repairforge.services.interpreter import (
    ExecutionResult,
    Status,
    TestCase,
    TestSuite,
    TestVerdict,
    Verdict,
    evaluate,
    run_suite,
    run_tests,
)


class Provenance(str, Enum):
    DIFFERENCE_REVEALING = "DifferenceRevealing"
    RANDOM_PROBE = "RandomProbe"


class OracleKind(str, Enum):
    REFERENCE_PROGRAM = "ReferenceProgram"
    UNORACLED = "Unoracled"


class OracleSource(BaseModel):
    kind: OracleKind
    path: Optional[str] = None


class AmplifiedTest(BaseModel):
    name: str
    inputs: List[int]
    expected: Optional[int] = None
    provenance: Provenance
    original_output: str
    repaired_output: str


class EvidenceSummary(BaseModel):
    probes: int = 0
    difference_revealing: int = 0
    random_probes: int = 0
    reference_errors: int = 0
    passing: int = 0
    failing: int = 0


class EvidenceReport(BaseModel):
    """Amplified tests T' with provenance, oracle and verdicts on T and T'."""
    amplified: List[AmplifiedTest] = Field(default_factory=list)
    oracle_source: OracleSource
    verdicts: Optional[List[TestVerdict]] = None
    summary: EvidenceSummary = Field(default_factory=EvidenceSummary)

    def oracled_tests(self) -> List[TestCase]:
        return [
            TestCase(name=test.name, inputs=test.inputs, expected=test.expected)
            for test in self.amplified
            if test.expected is not None
        ]


class OverfitVerdict(str, Enum):
    OVERFITTING = "Overfitting"
    INVALID = "Invalid"
    GENERALIZES = "Generalizes"


class OverfitReport(BaseModel):
    patch: PatchFile
    verdict: OverfitVerdict
    suite_results: List[TestVerdict]
    held_out_results: List[TestVerdict]


class InputGenerator:
    """
    Reproducible input vectors for amplification.

    Each parameter draws from its own inclusive range. Order: every
    combination of the range endpoints, then each known test input with one
    coordinate moved by one, then seeded uniform draws. Vectors already used
    by known tests, and repeats, are skipped.
    """

    def __init__(
        self,
        arity: int,
        low: Optional[int] = None,
        high: Optional[int] = None,
        seed: Optional[int] = None,
        known: Sequence[Sequence[int]] = (),
        ranges: Optional[Sequence[Tuple[int, int]]] = None,
    ):
        """
        Args:
            arity: Number of inputs per vector
            low: Lower bound for parameters without an explicit range
            high: Upper bound for parameters without an explicit range
            seed: Seed for the random draws
            known: Input vectors of the existing tests
            ranges: One (low, high) pair per parameter; overrides low/high

        Raises:
            ArityMismatch: `ranges` does not have one entry per parameter
            ValueError: A range is empty
        """
        low = settings.INPUT_LOW if low is None else low
        high = settings.INPUT_HIGH if high is None else high
        if ranges is None:
            ranges = [(low, high)] * arity
        if len(ranges) != arity:
            raise ArityMismatch(f"{len(ranges)} input ranges given for {arity} parameters")
        self.ranges: List[Tuple[int, int]] = [(int(lo), int(hi)) for lo, hi in ranges]
        for lo, hi in self.ranges:
            if lo > hi:
                raise ValueError(f"empty input range {lo}..{hi}")
        self.arity = arity
        self.seed = settings.SEED if seed is None else seed
        self.known = [tuple(inputs) for inputs in known]
        self.rng = random.Random(self.seed)

    def _boundary(self) -> Iterator[Tuple[int, ...]]:
        yield from itertools.product(*self.ranges)

    def _neighbourhood(self) -> Iterator[Tuple[int, ...]]:
        for inputs in self.known:
            for position in range(len(inputs)):
                for delta in (-1, 1):
                    moved = list(inputs)
                    moved[position] += delta
                    yield tuple(moved)

    def _random(self, n: int) -> Iterator[Tuple[int, ...]]:
        for _ in range(n):
            yield tuple(self.rng.randint(lo, hi) for lo, hi in self.ranges)

    def generate(self, n: int) -> List[Tuple[int, ...]]:
        seen: Set[Tuple[int, ...]] = set(self.known)
        vectors: List[Tuple[int, ...]] = []
        for vector in itertools.chain(self._boundary(), self._neighbourhood(), self._random(n)):
            if vector in seen:
                continue
            seen.add(vector)
            vectors.append(vector)
        return vectors


def _observed(result: ExecutionResult) -> Tuple[Status, Optional[int]]:
    return result.status, result.value


def amplify(
    p: Program,
    p_repaired: Program,
    gen: InputGenerator,
    reference: Optional[Program] = None,
    n: Optional[int] = None,
    suite: Optional[TestSuite] = None,
    agreeing_fraction: Optional[float] = None,
    reference_path: Optional[str] = None,
    limits: Optional[ExecutionLimits] = None,
) -> EvidenceReport:
    """
    Generate T' from inputs on which the original and repaired programs are compared.

    Args:
        p: Original program
        p_repaired: Repaired program
        gen: Input generator
        reference: Oracle program; without it T' is left unoracled
        n: Number of random draws (boundary and neighbourhood probes come on top)
        suite: Original suite T, included in the verdicts
        agreeing_fraction: Share of agreeing probes kept as RandomProbe tests
        reference_path: Recorded as the oracle source
        limits: Step budget per run

    Returns:
        EvidenceReport
    """
    if p.arity != p_repaired.arity or (reference is not None and reference.arity != p.arity):
        raise ArityMismatch("programs under comparison take different numbers of inputs")
    n = n or settings.EVIDENCE_SAMPLES
    fraction = settings.AGREEING_FRACTION if agreeing_fraction is None else agreeing_fraction
    limits = limits or ExecutionLimits()
    keep_rng = random.Random(gen.seed + 1)

    summary = EvidenceSummary()
    amplified: List[AmplifiedTest] = []
    for inputs in gen.generate(n):
        summary.probes += 1
        inputs = list(inputs)
        before = evaluate(p, inputs, limits)
        after = evaluate(p_repaired, inputs, limits)
        if _observed(before) != _observed(after):
            provenance = Provenance.DIFFERENCE_REVEALING
        elif keep_rng.random() < fraction:
            provenance = Provenance.RANDOM_PROBE
        else:
            continue

        expected = None
        if reference is not None:
            oracle = evaluate(reference, inputs, limits)
            if not oracle.returned:
                summary.reference_errors += 1
                continue
            expected = oracle.value

        amplified.append(
            AmplifiedTest(
                name=f"amplified_{len(amplified) + 1:03d}",
                inputs=inputs,
                expected=expected,
                provenance=provenance,
                original_output=before.describe(),
                repaired_output=after.describe(),
            )
        )
        if provenance is Provenance.DIFFERENCE_REVEALING:
            summary.difference_revealing += 1
        else:
            summary.random_probes += 1

    report = EvidenceReport(
        amplified=amplified,
        oracle_source=OracleSource(
            kind=OracleKind.REFERENCE_PROGRAM if reference is not None else OracleKind.UNORACLED,
            path=reference_path if reference is not None else None,
        ),
        summary=summary,
    )

    if reference is not None:
        tests = list(suite.cases) if suite is not None else []
        tests += report.oracled_tests()
        verdicts = run_tests(p_repaired, tests, limits).to_verdicts()
        report.verdicts = verdicts
        summary.passing = sum(1 for v in verdicts if v.verdict is Verdict.PASS)
        summary.failing = len(verdicts) - summary.passing

    logger.info(
        "Amplified {} probes into {} tests ({} difference-revealing)",
        summary.probes,
        len(amplified),
        summary.difference_revealing,
    )
    return report


def evidence_suite(report: EvidenceReport, suite: TestSuite) -> TestSuite:
    """T extended with the oracled tests of T' (held-out tests carried over)."""
    taken = {case.name for case in suite.cases + suite.held_out}
    extra = [test for test in report.oracled_tests() if test.name not in taken]
    return TestSuite(function=suite.function, cases=list(suite.cases) + extra, held_out=list(suite.held_out))


def overfit_check(
    p: Program,
    patch: Patch,
    suite: TestSuite,
    limits: Optional[ExecutionLimits] = None,
) -> OverfitReport:
    """
    Audit a patch against the suite's held-out tests.

    Verdict is Overfitting when the patched program passes all of T but
    fails some held-out test, Invalid when it already fails T, and
    Generalizes otherwise.

    Raises:
        NoHeldOutTests: The suite has no held-out section
        LocationMismatch: The patch does not apply
    """
    if not suite.held_out:
        raise NoHeldOutTests("the suite has no held-out tests")
    patched = apply_patch(p, patch)
    on_suite = run_suite(patched, suite, limits)
    on_held_out = run_tests(patched, suite.held_out, limits)

    if not on_suite.all_passed:
        verdict = OverfitVerdict.INVALID
    elif not on_held_out.all_passed:
        verdict = OverfitVerdict.OVERFITTING
    else:
        verdict = OverfitVerdict.GENERALIZES

    logger.info("Patch {} is {}", patch.describe(), verdict.value)
    return OverfitReport(
        patch=PatchFile.from_patch(patch),
        verdict=verdict,
        suite_results=on_suite.to_verdicts(),
        held_out_results=on_held_out.to_verdicts(),
    )
