"""Tests for test amplification and the overfitting audit."""
import itertools

import pytest
from pydantic import ValidationError

from repairforge.config import RepairConfig
from repairforge.errors import ArityMismatch, NoHeldOutTests
from repairforge.lang import parse_expression
from repairforge.lang.patching import Patch, apply_patch, expression_at, location_at
from repairforge.services.evidence import (
    InputGenerator,
    OracleKind,
    OverfitVerdict,
    Provenance,
    amplify,
    evidence_suite,
    overfit_check,
)
from repairforge.services.interpreter import TestSuite, Verdict, evaluate
from repairforge.utils.file_utils import load_patch, load_program


def _line6_patch(program, replacement):
    location = location_at(program, 6)
    return Patch(
        location=location,
        replacement=parse_expression(replacement),
        original=expression_at(program, location),
    )


@pytest.fixture
def triangle_reference(corpus_dir):
    return load_program(corpus_dir / "triangle.reference.mlg")


@pytest.fixture
def triangle_fixed(triangle):
    program, _ = triangle
    return apply_patch(program, _line6_patch(program, "a == b || b == c || a == c"))


# ---------------------------------------------------------------------------
# Input generation
# ---------------------------------------------------------------------------

def test_generator_is_reproducible():
    first = InputGenerator(3, low=-2, high=10, seed=7).generate(50)
    assert first == InputGenerator(3, low=-2, high=10, seed=7).generate(50)
    assert first != InputGenerator(3, low=-2, high=10, seed=8).generate(50)


def test_generator_order_and_uniqueness():
    known = [(2, 3, 2)]
    vectors = InputGenerator(3, low=0, high=5, seed=1, known=known).generate(40)
    assert vectors[:8] == list(itertools.product((0, 5), repeat=3))
    assert vectors[8] == (1, 3, 2)
    assert len(set(vectors)) == len(vectors)
    assert (2, 3, 2) not in vectors
    assert all(0 <= v <= 5 for vector in vectors[14:] for v in vector)


def test_generator_per_parameter_ranges():
    ranges = [(0, 1), (-3, 3), (7, 7)]
    vectors = InputGenerator(3, seed=4, ranges=ranges).generate(200)
    assert vectors[:4] == [(0, -3, 7), (0, 3, 7), (1, -3, 7), (1, 3, 7)]
    for a, b, c in vectors:
        assert 0 <= a <= 1
        assert -3 <= b <= 3
        assert c == 7
    assert {b for _, b, _ in vectors} == set(range(-3, 4))


def test_generator_rejects_bad_ranges():
    with pytest.raises(ArityMismatch):
        InputGenerator(2, ranges=[(0, 1)])
    with pytest.raises(ValueError):
        InputGenerator(1, ranges=[(3, 1)])
    with pytest.raises(ValidationError):
        RepairConfig(input_ranges=[(0, 4), (3, 1)])


# ---------------------------------------------------------------------------
# Amplification
# ---------------------------------------------------------------------------

def test_amplify_with_reference(triangle, triangle_fixed, triangle_reference):
    program, suite = triangle
    gen = InputGenerator(program.arity, seed=11, known=[case.inputs for case in suite.cases])
    report = amplify(program, triangle_fixed, gen, reference=triangle_reference, n=300, suite=suite,
                     reference_path="corpus/triangle.reference.mlg")

    assert report.oracle_source.kind is OracleKind.REFERENCE_PROGRAM
    assert report.oracle_source.path == "corpus/triangle.reference.mlg"
    revealing = [t for t in report.amplified if t.provenance is Provenance.DIFFERENCE_REVEALING]
    assert len(revealing) >= 5
    for test in revealing:
        before = evaluate(program, test.inputs)
        after = evaluate(triangle_fixed, test.inputs)
        assert (before.status, before.value) != (after.status, after.value)
        assert after.value == test.expected == 2
    for test in report.amplified:
        if test.provenance is Provenance.RANDOM_PROBE:
            assert evaluate(program, test.inputs).value == evaluate(triangle_fixed, test.inputs).value
    assert report.summary.difference_revealing == len(revealing)
    assert report.summary.failing == 0
    assert len(report.verdicts) == len(suite.cases) + len(report.amplified)
    assert all(v.verdict is Verdict.PASS for v in report.verdicts)


def test_amplify_flags_the_original_bug(triangle, triangle_fixed, triangle_reference):
    program, _ = triangle
    gen = InputGenerator(program.arity, seed=11)
    report = amplify(triangle_fixed, program, gen, reference=triangle_reference, n=300)
    assert report.summary.difference_revealing > 0
    assert report.summary.failing >= report.summary.difference_revealing


def test_amplify_without_reference(triangle, triangle_fixed):
    program, suite = triangle
    report = amplify(program, triangle_fixed, InputGenerator(program.arity, seed=3), n=100, suite=suite)
    assert report.oracle_source.kind is OracleKind.UNORACLED
    assert report.verdicts is None
    assert report.amplified
    assert all(test.expected is None for test in report.amplified)
    assert evidence_suite(report, suite).cases == suite.cases


def test_amplify_is_deterministic(triangle, triangle_fixed, triangle_reference):
    program, _ = triangle

    def run():
        return amplify(program, triangle_fixed, InputGenerator(3, seed=5), reference=triangle_reference, n=100)

    assert run() == run()


def test_amplify_rejects_arity_mismatch(triangle, square):
    with pytest.raises(ArityMismatch):
        amplify(triangle[0], square[0], InputGenerator(3))


def test_evidence_suite_extends_cases(triangle, triangle_fixed, triangle_reference):
    program, suite = triangle
    report = amplify(program, triangle_fixed, InputGenerator(3, seed=11), reference=triangle_reference, n=200)
    extended = evidence_suite(report, suite)
    assert extended.cases[: len(suite.cases)] == suite.cases
    assert len(extended.cases) == len(suite.cases) + len(report.oracled_tests())
    assert extended.held_out == suite.held_out


# ---------------------------------------------------------------------------
# Overfitting audit
# ---------------------------------------------------------------------------

def test_handwritten_patch_overfits(triangle, corpus_dir):
    program, suite = triangle
    patch = load_patch(corpus_dir / "triangle.overfit.patch.json", program)
    report = overfit_check(program, patch, suite)
    assert report.verdict is OverfitVerdict.OVERFITTING
    assert all(v.verdict is Verdict.PASS for v in report.suite_results)
    failing = [v.name for v in report.held_out_results if v.verdict is Verdict.FAIL]
    assert failing == ["h3"]


def test_unrestricted_synthesis_result_overfits(triangle):
    program, suite = triangle
    report = overfit_check(program, _line6_patch(program, "a == b || c == 2"), suite)
    assert report.verdict is OverfitVerdict.OVERFITTING
    assert "h1" in [v.name for v in report.held_out_results if v.verdict is Verdict.FAIL]


def test_correct_fix_generalizes(triangle):
    program, suite = triangle
    report = overfit_check(program, _line6_patch(program, "a == b || b == c || a == c"), suite)
    assert report.verdict is OverfitVerdict.GENERALIZES
    assert report.patch.replacement == "a == b || b == c || a == c"


def test_failing_patch_is_invalid(triangle):
    program, suite = triangle
    report = overfit_check(program, _line6_patch(program, "a == b"), suite)
    assert report.verdict is OverfitVerdict.INVALID


def test_missing_held_out_section(triangle):
    program, suite = triangle
    with pytest.raises(NoHeldOutTests):
        overfit_check(program, _line6_patch(program, "a == b"), TestSuite(cases=suite.cases))
