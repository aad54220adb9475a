"""
Handlers for the pipeline-stage subcommands: run, localize, constraint, synth.
"""
import argparse
import sys
from typing import List, Optional

from loguru import logger
from pydantic import BaseModel

from repairforge.commands import EXIT_NO_PATCH, EXIT_OK
from repairforge.config import RepairConfig
from repairforge.errors import EvalBudgetExceeded, InfeasibleLocation, NoFailingTests, NoRepairableLocation, SynthesisExhausted
from repairforge.lang.analysis import statement_index
from repairforge.lang.patching import FixLocation, location_at
from repairforge.lang.printer import format_expression, format_statement_header
from repairforge.services.angelic import build_repair_constraint, install_probe
from repairforge.services.fault_localization import SuspiciousnessReport, candidate_locations, suspiciousness
from repairforge.services.interpreter import TestVerdict, run_suite, run_tests
from repairforge.services.synthesis import SynthesisStats, component_levels, synthesize_in_levels
from repairforge.utils.file_utils import load_constraint, load_program, load_suite, write_json
from repairforge.utils.tables import render_table


class RunReport(BaseModel):
    """Response model for the run subcommand."""
    program: str
    function: str
    held_out_only: bool = False
    passed: int
    failed: int
    results: List[TestVerdict]


class LocalizeReport(BaseModel):
    """Response model for the localize subcommand."""
    program: str
    suspiciousness: SuspiciousnessReport
    candidates: List[FixLocation]


class SynthReport(BaseModel):
    constraint: str
    expression: str
    size: int
    candidates_generated: int
    candidates_checked: int


def _emit(model: BaseModel, report_path: Optional[str]) -> None:
    if report_path:
        write_json(report_path, model)


def run(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """
    Run a suite and print the Pass/Fail table.

    Args:
        args: Parsed arguments (program, tests, held_out_only)
        cfg: Repair configuration

    Returns:
        Exit code
    """
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    tests = suite.held_out if args.held_out_only else suite.cases
    report = run_tests(program, tests, cfg.limits())

    verdicts = report.to_verdicts()
    rows = [
        (v.name, ", ".join(map(str, v.inputs)), v.expected, v.actual, v.verdict.value)
        for v in verdicts
    ]
    sys.stdout.write(render_table(["test", "inputs", "expected", "actual", "outcome"], rows))
    sys.stdout.write(f"{len(report.passed)} passed, {len(report.failed)} failed\n")

    _emit(
        RunReport(
            program=str(args.program),
            function=program.function.name,
            held_out_only=args.held_out_only,
            passed=len(report.passed),
            failed=len(report.failed),
            results=verdicts,
        ),
        cfg.report_path,
    )
    return EXIT_OK


def localize(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """Print suspiciousness scores and the candidate fix locations."""
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    baseline = run_suite(program, suite, cfg.limits())
    try:
        susp = suspiciousness(baseline, cfg.formula)
    except NoFailingTests:
        sys.stdout.write("all tests pass; repair is unnecessary\n")
        return EXIT_OK

    statements = statement_index(program)
    rows = [
        (
            entry.line,
            f"{entry.score:.4f}",
            entry.exec_fail,
            entry.exec_pass,
            format_statement_header(statements[entry.line]) if entry.line in statements else "",
        )
        for entry in susp.entries
    ]
    sys.stdout.write(render_table(["line", cfg.formula, "fail", "pass", "statement"], rows))

    try:
        candidates = candidate_locations(susp, program, cfg.top_k)
    except NoRepairableLocation as e:
        logger.warning("{}", e)
        candidates = []
    for location in candidates:
        sys.stdout.write(
            f"candidate line {location.line}: {location.kind.value} "
            f"live [{', '.join(location.live_vars)}]\n"
        )

    report = LocalizeReport(program=str(args.program), suspiciousness=susp, candidates=candidates)
    if cfg.report_path:
        _emit(report, cfg.report_path)
    else:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def constraint(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """Dump the repair constraint for one line as JSON."""
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    pp = install_probe(program, location_at(program, args.line))
    try:
        rc = build_repair_constraint(pp, suite, cfg.bounds(), cfg.limits())
    except (InfeasibleLocation, EvalBudgetExceeded) as e:
        sys.stderr.write(f"infeasible: {e}\n")
        return EXIT_NO_PATCH

    if cfg.report_path:
        _emit(rc, cfg.report_path)
    else:
        sys.stdout.write(rc.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def synth(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """Synthesize an expression for a constraint file and print it."""
    rc = load_constraint(args.constraint)
    levels = component_levels(
        rc,
        include_div=cfg.include_div,
        unrestricted_constants=cfg.unrestricted_constants,
        unrestricted_range=cfg.unrestricted_range,
    )
    stats = SynthesisStats()
    try:
        expr = synthesize_in_levels(rc, levels, cfg.max_size, stats=stats)
    except SynthesisExhausted as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_NO_PATCH

    text = format_expression(expr)
    sys.stdout.write(text + "\n")
    _emit(
        SynthReport(
            constraint=str(args.constraint),
            expression=text,
            size=expr.size,
            candidates_generated=stats.generated,
            candidates_checked=stats.checked,
        ),
        cfg.report_path,
    )
    return EXIT_OK
