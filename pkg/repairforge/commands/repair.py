"""
Handlers for the repair, evidence and overfit-check subcommands.
"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Tuple

from loguru import logger

from repairforge.commands import EXIT_NO_PATCH, EXIT_OK, EXIT_OVERFITTING
from repairforge.config import RepairConfig
from repairforge.lang.ast import Program
from repairforge.lang.patching import Patch, PatchFile, apply_patch, diff
from repairforge.services.evidence import InputGenerator, OverfitVerdict, amplify, evidence_suite, overfit_check
from repairforge.services.interpreter import TestSuite
from repairforge.services.repair_engine import RepairOutcome, RepairStatus
from repairforge.services.repair_engine import repair as run_repair
from repairforge.utils.file_utils import load_patch, load_program, load_suite, write_json, write_suite
from repairforge.utils.tables import render_table

REPAIR_EXIT_CODES = {
    RepairStatus.REPAIRED: EXIT_OK,
    RepairStatus.ALREADY_PASSING: EXIT_OK,
    RepairStatus.NO_PATCH_FOUND: EXIT_NO_PATCH,
}

OVERFIT_EXIT_CODES = {
    OverfitVerdict.GENERALIZES: EXIT_OK,
    OverfitVerdict.INVALID: EXIT_NO_PATCH,
    OverfitVerdict.OVERFITTING: EXIT_OVERFITTING,
}


def _print_attempts(outcome: RepairOutcome) -> None:
    if not outcome.attempts:
        return
    rows = [
        (a.line, a.kind.value, a.result.value, a.candidate or "", a.detail)
        for a in outcome.to_report().attempts
    ]
    sys.stderr.write(render_table(["line", "kind", "result", "candidate", "detail"], rows))


def repair(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """
    Repair a program against its suite and print the patch as a unified diff.

    Args:
        args: Parsed arguments (program, tests, patch_out)
        cfg: Repair configuration

    Returns:
        0 for Repaired or AlreadyPassing, 2 for NoPatchFound
    """
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    outcome = run_repair(program, suite, cfg)

    _print_attempts(outcome)
    if outcome.status is RepairStatus.REPAIRED:
        sys.stdout.write(diff(program, outcome.repaired, str(args.program)))
        if args.patch_out:
            write_json(args.patch_out, PatchFile.from_patch(outcome.patch))
    else:
        sys.stdout.write(f"{outcome.status.value}\n")

    if cfg.report_path:
        write_json(cfg.report_path, outcome.to_report())
    return REPAIR_EXIT_CODES[outcome.status]


def _patched_program(
    args: argparse.Namespace, cfg: RepairConfig, program: Program, suite: TestSuite
) -> Tuple[Optional[Program], Optional[Patch]]:
    if args.patch:
        patch = load_patch(args.patch, program)
        return apply_patch(program, patch), patch
    outcome = run_repair(program, suite, cfg)
    _print_attempts(outcome)
    if outcome.status is RepairStatus.ALREADY_PASSING:
        return program, None
    return outcome.repaired, outcome.patch


def _suite_path_for(report_path: str) -> Path:
    """`out/evidence.json` -> `out/evidence.tests.json`."""
    path = Path(report_path)
    return path.with_name(f"{path.stem}.tests.json")


def evidence(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """
    Amplify the suite around a patch and report T' with its verdicts.

    The patch comes from --patch, or from a fresh repair run.
    """
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    repaired, patch = _patched_program(args, cfg, program, suite)
    if repaired is None:
        sys.stdout.write(f"{RepairStatus.NO_PATCH_FOUND.value}: nothing to amplify\n")
        return EXIT_NO_PATCH
    if patch is None:
        sys.stdout.write(f"{RepairStatus.ALREADY_PASSING.value}: amplifying around the unchanged program\n")

    reference = load_program(args.reference) if args.reference else None
    generator = InputGenerator(
        arity=program.arity,
        low=cfg.input_low,
        high=cfg.input_high,
        seed=cfg.seed,
        ranges=cfg.input_ranges,
        known=[case.inputs for case in suite.cases + suite.held_out],
    )
    report = amplify(
        program,
        repaired,
        generator,
        reference=reference,
        n=cfg.evidence_samples,
        suite=suite,
        agreeing_fraction=cfg.agreeing_fraction,
        reference_path=str(args.reference) if args.reference else None,
        limits=cfg.limits(),
    )

    rows = [
        (t.name, ", ".join(map(str, t.inputs)), t.provenance.value, t.original_output, t.repaired_output,
         "" if t.expected is None else t.expected)
        for t in report.amplified
    ]
    sys.stdout.write(render_table(["test", "inputs", "provenance", "original", "repaired", "expected"], rows))
    summary = report.summary
    sys.stdout.write(
        f"{summary.probes} probes, {summary.difference_revealing} difference-revealing, "
        f"{summary.random_probes} random\n"
    )
    if report.verdicts is not None:
        sys.stdout.write(f"{summary.passing} passed, {summary.failing} failed on T and T'\n")

    if cfg.report_path:
        write_json(cfg.report_path, report)
    suite_out = args.suite_out or (_suite_path_for(cfg.report_path) if cfg.report_path else None)
    if suite_out:
        if reference is None:
            logger.warning("No reference program; {} will hold only the original tests", suite_out)
        write_suite(suite_out, evidence_suite(report, suite))
    return EXIT_OK


def overfit(args: argparse.Namespace, cfg: RepairConfig) -> int:
    """Check a patch against the held-out tests; exit 3 when it overfits."""
    program = load_program(args.program)
    suite = load_suite(args.tests, program)
    patch = load_patch(args.patch, program)
    report = overfit_check(program, patch, suite, cfg.limits())

    rows = [
        (section, v.name, ", ".join(map(str, v.inputs)), v.expected, v.actual, v.verdict.value)
        for section, verdicts in (("suite", report.suite_results), ("held-out", report.held_out_results))
        for v in verdicts
    ]
    sys.stdout.write(render_table(["set", "test", "inputs", "expected", "actual", "outcome"], rows))
    sys.stdout.write(f"{patch.describe()}: {report.verdict.value}\n")

    if cfg.report_path:
        write_json(cfg.report_path, report)
    return OVERFIT_EXIT_CODES[report.verdict]
