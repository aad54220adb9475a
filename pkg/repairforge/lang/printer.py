"""
Canonical MiniLang rendering.

The printer is line-anchored: every statement and top-level declaration is
written on the source line it was parsed from, so that localization scores,
patches and diffs keep referring to the same lines after a print/parse
cycle. Braces and `else` take a line of their own when one is free and
otherwise join the neighbouring statement line.
"""
from dataclasses import dataclass
from typing import List, Optional, Union

from repairforge.lang.ast import (
    ATOM_PRECEDENCE,
    PRECEDENCE,
    UNARY_PRECEDENCE,
    Assign,
    Binary,
    ConstDecl,
    ConstRef,
    Expr,
    Function,
    Hole,
    If,
    IntLit,
    Program,
    Return,
    Stmt,
    Unary,
    UnOp,
    Var,
    VarDecl,
    While,
)

INDENT = "    "


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return UNARY_PRECEDENCE
    if isinstance(expr, IntLit) and expr.value < 0:
        return UNARY_PRECEDENCE
    return ATOM_PRECEDENCE


def format_expression(expr: Expr) -> str:
    """Render an expression with the fewest parentheses that re-parse to it."""
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, (ConstRef, Var)):
        return expr.name
    if isinstance(expr, Hole):
        return "X"
    if isinstance(expr, Unary):
        if expr.op is UnOp.NEG and isinstance(expr.operand, IntLit):
            # `-3` would re-parse as a single literal
            return f"-({expr.operand.value})"
        inner = format_expression(expr.operand)
        if _precedence(expr.operand) < UNARY_PRECEDENCE:
            inner = f"({inner})"
        return f"{expr.op.value}{inner}"

    p = PRECEDENCE[expr.op]
    left = format_expression(expr.left)
    if _precedence(expr.left) < p:
        left = f"({left})"
    right = format_expression(expr.right)
    if _precedence(expr.right) <= p:
        right = f"({right})"
    return f"{left} {expr.op.value} {right}"


@dataclass
class _Anchor:
    line: int
    depth: int
    text: str
    opens: bool = False
    # `} else if (...) {` takes over the block of the If it continues
    continues: bool = False


@dataclass
class _Else:
    depth: int
    empty_body: bool


@dataclass
class _Close:
    depth: int


_Event = Union[_Anchor, _Else, _Close]


@dataclass
class _OpenBlock:
    line: int
    inline: bool = False


def _statement_events(stmt: Stmt, depth: int, out: List[_Event], chained_text: Optional[str] = None) -> None:
    if isinstance(stmt, VarDecl):
        out.append(_Anchor(stmt.line, depth, f"var {stmt.name} = {format_expression(stmt.init)};"))
    elif isinstance(stmt, Assign):
        out.append(_Anchor(stmt.line, depth, f"{stmt.name} = {format_expression(stmt.value)};"))
    elif isinstance(stmt, Return):
        out.append(_Anchor(stmt.line, depth, f"return {format_expression(stmt.value)};"))
    elif isinstance(stmt, While):
        out.append(_Anchor(stmt.line, depth, f"while ({format_expression(stmt.cond)}) {{", opens=True))
        _body_events(stmt.body, depth + 1, out)
        out.append(_Close(depth))
    else:
        header = f"if ({format_expression(stmt.cond)}) {{"
        if chained_text is not None:
            header = chained_text + header
        out.append(_Anchor(stmt.line, depth, header, opens=True, continues=chained_text is not None))
        _body_events(stmt.then_body, depth + 1, out)
        if stmt.else_body is None:
            out.append(_Close(depth))
        elif stmt.chained:
            # the innermost link of an else-if chain closes the whole chain
            _statement_events(stmt.else_body[0], depth, out, chained_text="} else ")
        else:
            out.append(_Else(depth, empty_body=not stmt.else_body))
            _body_events(stmt.else_body, depth + 1, out)
            out.append(_Close(depth))


def _body_events(body, depth: int, out: List[_Event]) -> None:
    for stmt in body:
        _statement_events(stmt, depth, out)


def _program_events(program: Program) -> List[_Event]:
    items: List[Union[ConstDecl, Function]] = sorted(
        [*program.constants, program.function], key=lambda item: item.line
    )
    events: List[_Event] = []
    for item in items:
        if isinstance(item, ConstDecl):
            events.append(_Anchor(item.line, 0, f"const {item.name} = {item.value};"))
        else:
            params = ", ".join(item.params)
            events.append(_Anchor(item.line, 0, f"function {item.name}({params}) {{", opens=True))
            _body_events(item.body, 1, events)
            events.append(_Close(0))
    return events


class _Layout:
    """Places events on physical lines."""

    def __init__(self, events: List[_Event]):
        self.events = events
        self.lines: List[str] = []
        self.blocks: List[_OpenBlock] = []
        self.pending_prefix: Optional[str] = None

    @property
    def cur(self) -> int:
        return len(self.lines)

    def _next_anchor(self, index: int) -> Optional[int]:
        for event in self.events[index + 1:]:
            if isinstance(event, _Anchor):
                return event.line
        return None

    def _has_room(self, index: int) -> bool:
        next_anchor = self._next_anchor(index)
        return next_anchor is None or self.cur + 1 < next_anchor

    def _new_line(self, depth: int, text: str) -> None:
        self.lines.append(INDENT * depth + text)

    def _suffix(self, text: str) -> None:
        if not self.lines:
            self.lines.append(text)
        else:
            self.lines[-1] += " " + text

    def render(self) -> str:
        for index, event in enumerate(self.events):
            if isinstance(event, _Anchor):
                self._place_anchor(event)
            elif isinstance(event, _Else):
                self._place_else(event, index)
            else:
                self._place_close(index)
        return "\n".join(self.lines) + "\n"

    def _place_anchor(self, event: _Anchor) -> None:
        if event.continues:
            self.blocks.pop()
        if self.pending_prefix is not None:
            while self.cur < event.line - 1:
                self.lines.append("")
            self.lines.append(self.pending_prefix + event.text)
            self.pending_prefix = None
        elif self.lines and event.line <= self.cur:
            if self.blocks and self.blocks[-1].line == self.cur:
                self.blocks[-1].inline = True
            self._suffix(event.text)
        else:
            while self.cur < event.line - 1:
                self.lines.append("")
            self._new_line(event.depth, event.text)
        if event.opens:
            self.blocks.append(_OpenBlock(line=self.cur))

    def _place_else(self, event: _Else, index: int) -> None:
        self.blocks.pop()
        if event.empty_body or self._has_room(index):
            if self._has_room(index):
                self._new_line(event.depth, "} else {")
            else:
                self._suffix("} else {")
            self.blocks.append(_OpenBlock(line=self.cur))
        else:
            self.pending_prefix = INDENT * event.depth + "} else { "
            self.blocks.append(_OpenBlock(line=self.cur + 1, inline=True))

    def _place_close(self, index: int) -> None:
        block = self.blocks.pop()
        depth = len(self.blocks)
        if not block.inline and self._has_room(index):
            self._new_line(depth, "}")
        else:
            self._suffix("}")


def pretty_print(program: Program) -> str:
    """
    Render a program so that re-parsing yields the same AST and lines.

    Args:
        program: Parsed (or patched) program

    Returns:
        Source text ending in a newline
    """
    return _Layout(_program_events(program)).render()


def format_statement_header(stmt: Stmt) -> str:
    """Single-line summary of a statement (for tables and logs)."""
    events: List[_Event] = []
    _statement_events(stmt, 0, events)
    return events[0].text
