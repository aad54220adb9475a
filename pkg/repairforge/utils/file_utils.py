import json
from pathlib import Path
from typing import List, Mapping, Optional, Union

from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from repairforge.errors import ArityMismatch, InvalidInputFile
from repairforge.lang.ast import Program
from repairforge.lang.parser import parse_program
from repairforge.lang.patching import Patch, PatchFile
from repairforge.services.angelic import RepairConstraint
from repairforge.services.interpreter import TestCase, TestSuite

PROGRAM_EXTENSION = ".mlg"


class TestEntry(BaseModel):
    """One test as written in a suite file; `expected` may name a constant."""
    __test__ = False

    name: str
    inputs: List[int]
    expected: Union[int, str]


class SuiteFile(BaseModel):
    function: Optional[str] = None
    tests: List[TestEntry] = Field(default_factory=list)
    held_out: List[TestEntry] = Field(default_factory=list)


def read_text(path: Union[str, Path]) -> str:
    """
    Read a UTF-8 input file.

    Args:
        path: File path

    Returns:
        File contents
    """
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InvalidInputFile(f"cannot read {path}: {e}") from e


def load_program(path: Union[str, Path]) -> Program:
    """
    Parse a MiniLang source file.

    Args:
        path: Path to a `.mlg` file

    Returns:
        Parsed program
    """
    if Path(path).suffix != PROGRAM_EXTENSION:
        logger.warning("{} does not have the {} extension", path, PROGRAM_EXTENSION)
    return parse_program(read_text(path))


def _load_json(path: Union[str, Path]) -> dict:
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise InvalidInputFile(f"{path} is not valid JSON: {e}") from e


def _resolve(entry: TestEntry, constants: Mapping[str, int], path) -> TestCase:
    expected = entry.expected
    if isinstance(expected, str):
        if expected not in constants:
            raise InvalidInputFile(f"{path}: test {entry.name} expects unknown constant {expected!r}")
        expected = constants[expected]
    return TestCase(name=entry.name, inputs=entry.inputs, expected=expected)


def load_suite(path: Union[str, Path], program: Optional[Program] = None) -> TestSuite:
    """
    Load a test suite file, resolving symbolic expected values.

    Args:
        path: Path to the JSON suite
        program: Program whose constants resolve symbolic expectations and
            whose arity every test must match

    Returns:
        TestSuite

    Raises:
        InvalidInputFile: Malformed file or unknown constant name
        ArityMismatch: A test has the wrong number of inputs
    """
    try:
        raw = SuiteFile.model_validate(_load_json(path))
    except ValidationError as e:
        raise InvalidInputFile(f"{path}: {e}") from e

    constants = program.constant_values if program is not None else {}
    try:
        suite = TestSuite(
            function=raw.function,
            cases=[_resolve(entry, constants, path) for entry in raw.tests],
            held_out=[_resolve(entry, constants, path) for entry in raw.held_out],
        )
    except ValidationError as e:
        raise InvalidInputFile(f"{path}: {e}") from e

    if program is not None:
        if raw.function and raw.function != program.function.name:
            logger.warning(
                "Suite targets {} but program defines {}", raw.function, program.function.name
            )
        for case in suite.cases + suite.held_out:
            if len(case.inputs) != program.arity:
                raise ArityMismatch(
                    f"test {case.name} has {len(case.inputs)} inputs, "
                    f"{program.function.name} takes {program.arity}"
                )
    return suite


def load_patch(path: Union[str, Path], program: Program) -> Patch:
    """Load a patch interchange file and resolve it against `program`."""
    try:
        patch_file = PatchFile.model_validate(_load_json(path))
    except ValidationError as e:
        raise InvalidInputFile(f"{path}: {e}") from e
    return patch_file.to_patch(program)


def load_constraint(path: Union[str, Path]) -> RepairConstraint:
    try:
        return RepairConstraint.model_validate(_load_json(path))
    except ValidationError as e:
        raise InvalidInputFile(f"{path}: {e}") from e


def write_json(path: Union[str, Path], model: BaseModel) -> None:
    """Write a report model as indented JSON."""
    Path(path).write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("Wrote {}", path)


def write_suite(path: Union[str, Path], suite: TestSuite) -> None:
    """Write a suite in the suite-file format (numeric expectations)."""
    raw = SuiteFile(
        function=suite.function,
        tests=[TestEntry(**case.model_dump()) for case in suite.cases],
        held_out=[TestEntry(**case.model_dump()) for case in suite.held_out],
    )
    write_json(path, raw)
