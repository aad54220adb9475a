"""
Fix locations, single-expression patches and textual diffs.
"""
import difflib
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field

from repairforge.errors import LocationMismatch, UnsupportedLocation
from repairforge.lang.analysis import (
    expression_kind,
    live_variables,
    own_expression,
    statement_at,
    statement_count,
    statement_index,
)
from repairforge.lang.ast import (
    Assign,
    Expr,
    Function,
    If,
    Program,
    Stmt,
    ValueKind,
    VarDecl,
    While,
)
from repairforge.lang.parser import parse_expression
from repairforge.lang.printer import format_expression, pretty_print


class LocationKind(str, Enum):
    BRANCH_CONDITION = "BranchCondition"
    ASSIGNMENT_RHS = "AssignmentRhs"
    RETURN_EXPR = "ReturnExpr"


class FixLocation(BaseModel):
    """A statement whose condition, right-hand side or return value may be replaced."""
    model_config = ConfigDict(frozen=True)

    line: int = Field(..., ge=1)
    kind: LocationKind
    live_vars: Tuple[str, ...] = ()

    @property
    def value_kind(self) -> ValueKind:
        if self.kind is LocationKind.BRANCH_CONDITION:
            return ValueKind.BOOLEAN
        return ValueKind.INTEGER


def location_kind(stmt: Stmt) -> LocationKind:
    if isinstance(stmt, (If, While)):
        return LocationKind.BRANCH_CONDITION
    if isinstance(stmt, (VarDecl, Assign)):
        return LocationKind.ASSIGNMENT_RHS
    return LocationKind.RETURN_EXPR


def location_at(program: Program, line: int) -> FixLocation:
    """
    Build the fix location for the statement on `line`.

    Raises:
        UnsupportedLocation: No statement starts on `line`
    """
    stmt = statement_at(program, line)
    if stmt is None:
        raise UnsupportedLocation(f"line {line} holds no statement with a replaceable expression")
    return FixLocation(line=line, kind=location_kind(stmt), live_vars=live_variables(program, line))


def expression_at(program: Program, location: FixLocation) -> Expr:
    stmt = statement_at(program, location.line)
    if stmt is None or location_kind(stmt) is not location.kind:
        raise LocationMismatch(f"no {location.kind.value} at line {location.line}")
    return own_expression(stmt)


def _with_expression(stmt: Stmt, expr: Expr) -> Stmt:
    if isinstance(stmt, VarDecl):
        return replace(stmt, init=expr)
    if isinstance(stmt, (If, While)):
        return replace(stmt, cond=expr)
    return replace(stmt, value=expr)


def _rewrite_body(body: Tuple[Stmt, ...], line: int, expr: Expr) -> Tuple[Stmt, ...]:
    rewritten = []
    for stmt in body:
        if stmt.line == line:
            stmt = _with_expression(stmt, expr)
        elif isinstance(stmt, If):
            else_body = None if stmt.else_body is None else _rewrite_body(stmt.else_body, line, expr)
            stmt = replace(stmt, then_body=_rewrite_body(stmt.then_body, line, expr), else_body=else_body)
        elif isinstance(stmt, While):
            stmt = replace(stmt, body=_rewrite_body(stmt.body, line, expr))
        rewritten.append(stmt)
    return tuple(rewritten)


def replace_expression(program: Program, line: int, expr: Expr) -> Program:
    """Copy of `program` with the own expression of the statement on `line` swapped."""
    function: Function = program.function
    body = _rewrite_body(function.body, line, expr)
    return replace(program, function=replace(function, body=body))


@dataclass(frozen=True)
class Patch:
    """Replace `original` with `replacement` at `location`."""
    location: FixLocation
    replacement: Expr
    original: Expr

    @property
    def line(self) -> int:
        return self.location.line

    def describe(self) -> str:
        return (
            f"line {self.line}: {format_expression(self.original)}"
            f" -> {format_expression(self.replacement)}"
        )


def apply_patch(program: Program, patch: Patch) -> Program:
    """
    Swap the located expression for the patch replacement.

    Args:
        program: Program to patch
        patch: Patch whose `original` must equal the current expression

    Returns:
        New program; every other statement and every line is unchanged

    Raises:
        LocationMismatch: The program no longer holds `patch.original` there
    """
    current = expression_at(program, patch.location)
    if current != patch.original:
        raise LocationMismatch(
            f"line {patch.line} holds `{format_expression(current)}`, "
            f"patch expects `{format_expression(patch.original)}`"
        )
    if expression_kind(patch.replacement) is not patch.location.value_kind:
        raise LocationMismatch(
            f"replacement for line {patch.line} must be {patch.location.value_kind.value}"
        )
    return replace_expression(program, patch.line, patch.replacement)


def revert_patch(program: Program, patch: Patch) -> Program:
    """Inverse of apply_patch."""
    inverse = Patch(location=patch.location, replacement=patch.original, original=patch.replacement)
    return apply_patch(program, inverse)


def changed_lines(before: Program, after: Program) -> List[int]:
    """
    Lines whose statement differs between two programs.

    A statement counts as changed when its own expression differs or when it
    exists in only one of the programs. Nested bodies are compared through
    their own statements.
    """
    old = statement_index(before)
    new = statement_index(after)
    changed = []
    for line in sorted(set(old) | set(new)):
        a, b = old.get(line), new.get(line)
        if a is None or b is None or type(a) is not type(b):
            changed.append(line)
        elif own_expression(a) != own_expression(b):
            changed.append(line)
        elif isinstance(a, (VarDecl, Assign)) and a.name != b.name:
            changed.append(line)
    return changed


def is_single_edit(before: Program, after: Program) -> bool:
    """Exactly one expression changed and no statement was added or removed."""
    return (
        statement_count(before) == statement_count(after)
        and len(changed_lines(before, after)) == 1
    )


def diff(before: Program, after: Program, path: str = "program.mlg") -> str:
    """
    Unified diff of the pretty-printed programs.

    Args:
        before: Original program
        after: Patched program
        path: Name shown in the `---` header; `+++` shows `<path>.repaired`

    Returns:
        Diff text, empty when the programs are structurally equal
    """
    if before == after:
        return ""
    lines = difflib.unified_diff(
        pretty_print(before).splitlines(keepends=True),
        pretty_print(after).splitlines(keepends=True),
        fromfile=path,
        tofile=f"{path}.repaired",
        lineterm="\n",
    )
    return "".join(lines)


class PatchFile(BaseModel):
    """Hand-editable patch interchange format."""
    line: int = Field(..., ge=1)
    kind: LocationKind
    original: str
    replacement: str

    @classmethod
    def from_patch(cls, patch: Patch) -> "PatchFile":
        return cls(
            line=patch.line,
            kind=patch.location.kind,
            original=format_expression(patch.original),
            replacement=format_expression(patch.replacement),
        )

    def to_patch(self, program: Program) -> Patch:
        """
        Resolve both expressions against `program`.

        Raises:
            LocationMismatch: `kind` disagrees with the statement at `line`
            ParseError, TypeCheckError: Malformed expressions
        """
        location = location_at(program, self.line)
        if location.kind is not self.kind:
            raise LocationMismatch(
                f"line {self.line} is a {location.kind.value}, patch file says {self.kind.value}"
            )
        expected = location.value_kind
        original = parse_expression(self.original, program, self.line, expected=expected)
        replacement = parse_expression(self.replacement, program, self.line, expected=expected)
        return Patch(location=location, replacement=replacement, original=original)
