import argparse
import sys
from typing import Callable, Dict, List, Optional, Tuple

from loguru import logger
from pydantic import ValidationError

from repairforge import __version__
from repairforge.commands import EXIT_USAGE, pipeline, repair
from repairforge.config import RepairConfig, settings
from repairforge.errors import RepairForgeError

Handler = Callable[[argparse.Namespace, RepairConfig], int]

HANDLERS: Dict[str, Handler] = {
    "run": pipeline.run,
    "localize": pipeline.localize,
    "constraint": pipeline.constraint,
    "synth": pipeline.synth,
    "repair": repair.repair,
    "evidence": repair.evidence,
    "overfit-check": repair.overfit,
}

# Flags that map one-to-one onto RepairConfig fields
CONFIG_FLAGS = (
    "top_k",
    "formula",
    "max_size",
    "max_evals",
    "max_paths",
    "location_budget_secs",
    "budget_secs",
    "seed",
)


class UsageExitParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _input_range(text: str) -> Tuple[int, int]:
    try:
        low, high = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH, got {text!r}")
    return low, high


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("repair options")
    group.add_argument('--top-k', type=int, metavar='K',
                       help='candidate locations tried (default: %d)' % settings.TOP_K)
    group.add_argument('--formula', choices=['ochiai', 'tarantula'],
                       help='suspiciousness formula (default: %s)' % settings.FORMULA)
    group.add_argument('--max-size', type=int, metavar='N',
                       help='largest expression size synthesized (default: %d)' % settings.MAX_SIZE)
    group.add_argument('--max-evals', type=int, metavar='N',
                       help='hole evaluations per path (default: %d)' % settings.MAX_EVALS)
    group.add_argument('--max-paths', type=int, metavar='N',
                       help='angelic paths kept per test (default: %d)' % settings.MAX_PATHS)
    group.add_argument('--unrestricted-constants', action='store_true', default=None,
                       help='draw synthesis constants from -R..R instead of the program literals')
    group.add_argument('--include-div', action='store_true', default=None,
                       help='allow / and %% in synthesized integer expressions')
    group.add_argument('--location-budget-secs', type=float, metavar='SECS',
                       help='time budget per candidate location (default: %s)' % settings.LOCATION_BUDGET_SECS)
    group.add_argument('--budget-secs', type=float, metavar='SECS',
                       help='overall repair time budget (default: %s)' % settings.BUDGET_SECS)
    group.add_argument('--seed', type=int,
                       help='seed for input generation (default: %d)' % settings.SEED)
    group.add_argument('--report', metavar='FILE',
                       help='write the JSON report to FILE')
    group.add_argument('--verbose', '-v', action='count', default=0,
                       help='log progress to stderr (repeat for debug output)')
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = UsageExitParser(
        prog="repairforge",
        description="Test-driven repair of single-function MiniLang programs.",
    )
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=UsageExitParser)
    sub.required = True

    def program_and_tests(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.add_argument('program', metavar='PROGRAM', help='MiniLang source (.mlg)')
        p.add_argument('tests', metavar='TESTS', help='test suite (.tests.json)')
        return p

    run = program_and_tests("run", "run the test suite and print Pass/Fail per test")
    run.add_argument('--held-out-only', action='store_true',
                     help='run the held-out tests instead of the suite')

    program_and_tests("localize", "rank statements by suspiciousness")

    constraint = program_and_tests("constraint", "dump the repair constraint for one line")
    constraint.add_argument('--line', type=int, required=True, help='line of the fix location')

    synth = sub.add_parser("synth", parents=[common], help="synthesize an expression for a constraint file")
    synth.add_argument('constraint', metavar='CONSTRAINT', help='constraint JSON written by `constraint`')

    rep = program_and_tests("repair", "search for a single-expression patch")
    rep.add_argument('--patch-out', metavar='FILE', help='write the accepted patch to FILE')

    evidence = program_and_tests("evidence", "amplify the suite around a patch")
    evidence.add_argument('--reference', metavar='PROGRAM', help='reference program used as the oracle')
    evidence.add_argument('--patch', metavar='FILE', help='patch to assess (default: run repair)')
    evidence.add_argument('--suite-out', metavar='FILE', help='write T plus the oracled tests to FILE')
    evidence.add_argument('--input-range', type=_input_range, action='append', metavar='LOW:HIGH',
                          help='input range for the next parameter; repeat once per parameter '
                               '(default: %d:%d for each)' % (settings.INPUT_LOW, settings.INPUT_HIGH))

    overfit = program_and_tests("overfit-check", "check a patch against the held-out tests")
    overfit.add_argument('--patch', metavar='FILE', required=True, help='patch file to check')
    return parser


def configure_logging(verbosity: int) -> None:
    level = {0: settings.LOG_LEVEL, 1: "INFO"}.get(verbosity, "DEBUG")
    logger.remove()
    logger.add(sys.stderr, level=level, format="<level>{level: <8}</level> {message}")


def config_from_args(args: argparse.Namespace) -> RepairConfig:
    """Build a RepairConfig from the flags given; the rest fall back to settings."""
    overrides = {
        name: getattr(args, name)
        for name in CONFIG_FLAGS
        if getattr(args, name, None) is not None
    }
    if args.unrestricted_constants:
        overrides["unrestricted_constants"] = True
    if args.include_div:
        overrides["include_div"] = True
    if getattr(args, "input_range", None):
        overrides["input_ranges"] = args.input_range
    overrides["report_path"] = args.report
    return RepairConfig(**overrides)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse `argv`, dispatch the subcommand and return its exit code.

    Returns:
        0 success, 1 usage or input error, 2 no patch, 3 overfitting patch
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    logger.info("repairforge {} {}", __version__, args.command)

    try:
        cfg = config_from_args(args)
        return HANDLERS[args.command](args, cfg)
    except ValidationError as e:
        sys.stderr.write(f"error: invalid configuration: {e}\n")
        return EXIT_USAGE
    except RepairForgeError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
