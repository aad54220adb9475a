"""Property-based tests and seeded mutation runs over the corpus."""
import itertools
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repairforge.config import RepairConfig
from repairforge.errors import UnsupportedLocation
from repairforge.lang import format_expression, parse_expression
from repairforge.lang.analysis import statement_count, statement_lines
from repairforge.lang.ast import Binary, BinOp, IntLit, Unary, UnOp, Var, iter_subexpressions
from repairforge.lang.patching import changed_lines, expression_at, is_single_edit, location_at, replace_expression
from repairforge.services.fault_localization import ochiai, suspiciousness, tarantula
from repairforge.services.interpreter import TestSuite, evaluate, run_suite
from repairforge.services.repair_engine import RepairStatus, repair
from repairforge.utils.file_utils import load_program, load_suite

CORPUS = Path(__file__).parent.parent / "corpus"

# (program file, suite file) pairs whose program passes the suite
CORRECT = [
    ("max_of.mlg", "max_of.tests.json"),
    ("abs_value.mlg", "abs_value.tests.json"),
    ("triangle.reference.mlg", "triangle.tests.json"),
    ("sum_to.reference.mlg", "sum_to.tests.json"),
]

FLIPS = {
    BinOp.LT: BinOp.LE,
    BinOp.LE: BinOp.LT,
    BinOp.GT: BinOp.GE,
    BinOp.GE: BinOp.GT,
    BinOp.EQ: BinOp.NE,
    BinOp.NE: BinOp.EQ,
    BinOp.ADD: BinOp.SUB,
    BinOp.SUB: BinOp.ADD,
    BinOp.AND: BinOp.OR,
    BinOp.OR: BinOp.AND,
}

MUTATION_CONFIG = RepairConfig(
    top_k=2,
    max_size=5,
    max_replays=512,
    step_budget=2000,
    location_budget_secs=0.5,
    budget_secs=2,
)


def _load(program_file, suite_file):
    program = load_program(CORPUS / program_file)
    return program, load_suite(CORPUS / suite_file, program)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

variables = st.sampled_from(["a", "b", "c"]).map(Var)
literals = st.integers(min_value=0, max_value=20).map(IntLit)


def _not_unary(expr):
    return not isinstance(expr, Unary)


integer_exprs = st.recursive(
    st.one_of(variables, literals),
    lambda children: st.one_of(
        st.builds(
            Binary,
            st.sampled_from([BinOp.ADD, BinOp.SUB, BinOp.MUL, BinOp.DIV, BinOp.MOD]),
            children,
            children,
        ),
        st.builds(lambda e: Unary(UnOp.NEG, e), children.filter(_not_unary)),
    ),
    max_leaves=8,
)

comparisons = st.builds(
    Binary,
    st.sampled_from([BinOp.EQ, BinOp.NE, BinOp.LT, BinOp.LE, BinOp.GT, BinOp.GE]),
    integer_exprs,
    integer_exprs,
)

boolean_exprs = st.recursive(
    comparisons,
    lambda children: st.one_of(
        st.builds(Binary, st.sampled_from([BinOp.AND, BinOp.OR]), children, children),
        st.builds(lambda e: Unary(UnOp.NOT, e), children.filter(_not_unary)),
    ),
    max_leaves=4,
)


@st.composite
def spectra(draw):
    total_fail = draw(st.integers(min_value=1, max_value=50))
    total_pass = draw(st.integers(min_value=0, max_value=50))
    exec_fail = draw(st.integers(min_value=0, max_value=total_fail))
    exec_pass = draw(st.integers(min_value=0, max_value=total_pass))
    return exec_fail, exec_pass, total_fail, total_pass


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

@given(st.one_of(integer_exprs, boolean_exprs))
def test_printed_expressions_reparse(expr):
    assert parse_expression(format_expression(expr)) == expr


@given(st.one_of(integer_exprs, boolean_exprs))
def test_size_counts_nodes(expr):
    assert expr.size == sum(1 for _ in iter_subexpressions(expr))
    if isinstance(expr, Binary):
        assert expr.size == expr.left.size + expr.right.size + 1


@given(spectra())
def test_scores_are_bounded(spectrum):
    for formula in (ochiai, tarantula):
        assert 0.0 <= formula(*spectrum) <= 1.0 + 1e-12


@given(spectra())
def test_more_failing_coverage_never_lowers_ochiai(spectrum):
    exec_fail, exec_pass, total_fail, total_pass = spectrum
    if exec_fail < total_fail:
        assert ochiai(exec_fail + 1, exec_pass, total_fail, total_pass) >= ochiai(*spectrum)


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_suspiciousness_ignores_test_order(rnd):
    program, suite = _load("triangle.mlg", "triangle.tests.json")
    shuffled = list(suite.cases)
    rnd.shuffle(shuffled)
    before = suspiciousness(run_suite(program, suite))
    after = suspiciousness(run_suite(program, TestSuite(cases=shuffled)))
    assert {e.line: e.score for e in before.entries} == {e.line: e.score for e in after.entries}


@settings(deadline=None)
@given(st.integers(min_value=-5, max_value=40))
def test_evaluation_is_deterministic(n):
    program, _ = _load("sum_to.reference.mlg", "sum_to.tests.json")
    first = evaluate(program, [n])
    assert first == evaluate(program, [n])
    assert first.value == (n * (n + 1) // 2 if n > 0 else 0)


# ---------------------------------------------------------------------------
# Seeded mutants
# ---------------------------------------------------------------------------

def _flip(expr):
    if isinstance(expr, Binary):
        return Binary(FLIPS[expr.op], expr.left, expr.right)
    return IntLit(expr.value + 1)


def _mutable(expr):
    return isinstance(expr, IntLit) or (isinstance(expr, Binary) and expr.op in FLIPS)


def _mutate_node(expr, target):
    counter = itertools.count()

    def walk(node):
        if isinstance(node, Unary):
            node = Unary(node.op, walk(node.operand))
        elif isinstance(node, Binary):
            node = Binary(node.op, walk(node.left), walk(node.right))
        if next(counter) == target:
            return _flip(node)
        return node

    return walk(expr)


def _mutant(program, rng):
    sites = []
    for line in statement_lines(program):
        try:
            expr = expression_at(program, location_at(program, line))
        except UnsupportedLocation:
            continue
        for index, node in enumerate(iter_subexpressions(expr)):
            if _mutable(node):
                sites.append((line, expr, index))
    line, expr, index = rng.choice(sites)
    return replace_expression(program, line, _mutate_node(expr, index))


def _failing_mutant(rng, tries=200):
    """Draw (program, site) pairs until the mutant fails its suite."""
    for _ in range(tries):
        program, suite = _load(*rng.choice(CORRECT))
        mutant = _mutant(program, rng)
        if not run_suite(mutant, suite, MUTATION_CONFIG.limits()).all_passed:
            return program, mutant, suite
    raise AssertionError(f"no failing mutant in {tries} draws")


@pytest.mark.parametrize("seed", range(100))
def test_repairs_of_mutants_are_sound(seed):
    program, mutant, suite = _failing_mutant(random.Random(seed))
    assert statement_count(mutant) == statement_count(program)

    outcome = repair(mutant, suite, MUTATION_CONFIG)
    assert outcome.status is not RepairStatus.ALREADY_PASSING
    if outcome.status is RepairStatus.NO_PATCH_FOUND:
        assert outcome.patch is None and outcome.repaired is None
        return

    repaired = outcome.repaired
    assert run_suite(repaired, suite, MUTATION_CONFIG.limits()).all_passed
    assert statement_count(repaired) == statement_count(mutant)
    assert is_single_edit(mutant, repaired)
    assert changed_lines(mutant, repaired) == [outcome.patch.location.line]
