"""
Static queries over a parsed program: statement lookup, live variables,
literal pools and expression fragments.
"""
from typing import Dict, List, Optional, Tuple

from repairforge.lang.ast import (
    Assign,
    ConstRef,
    Expr,
    Hole,
    If,
    IntLit,
    Program,
    Return,
    Stmt,
    ValueKind,
    Var,
    VarDecl,
    While,
    iter_statements,
    iter_subexpressions,
    result_kind,
)


def statement_index(program: Program) -> Dict[int, Stmt]:
    """Map every statement line to its statement."""
    return {stmt.line: stmt for stmt in iter_statements(program.function.body)}


def statement_at(program: Program, line: int) -> Optional[Stmt]:
    return statement_index(program).get(line)


def statement_lines(program: Program) -> List[int]:
    return sorted(statement_index(program))


def statement_count(program: Program) -> int:
    return sum(1 for _ in iter_statements(program.function.body))


def own_expression(stmt: Stmt) -> Expr:
    """The expression a statement carries directly (not its nested bodies)."""
    if isinstance(stmt, VarDecl):
        return stmt.init
    if isinstance(stmt, Assign):
        return stmt.value
    if isinstance(stmt, (If, While)):
        return stmt.cond
    return stmt.value


def expression_kind(expr: Expr) -> ValueKind:
    """Value kind of a well-typed expression."""
    if isinstance(expr, (IntLit, ConstRef, Var)):
        return ValueKind.INTEGER
    if isinstance(expr, Hole):
        return expr.kind
    return result_kind(expr.op)


def live_variables(program: Program, line: int) -> Tuple[str, ...]:
    """
    Variables readable at the statement on `line`.

    Parameters come first, followed by locals declared before `line` in the
    same block or an enclosing one, in declaration order.

    Args:
        program: Parsed program
        line: Statement line

    Returns:
        Ordered variable names (empty tuple when no statement sits on `line`)
    """
    found = _live_in_body(program.function.body, line, list(program.function.params))
    return tuple(found) if found is not None else ()


def _live_in_body(body: Tuple[Stmt, ...], line: int, visible: List[str]) -> Optional[List[str]]:
    visible = list(visible)
    for stmt in body:
        if stmt.line == line:
            return visible
        if isinstance(stmt, If):
            found = _live_in_body(stmt.then_body, line, visible)
            if found is None and stmt.else_body is not None:
                found = _live_in_body(stmt.else_body, line, visible)
            if found is not None:
                return found
        elif isinstance(stmt, While):
            found = _live_in_body(stmt.body, line, visible)
            if found is not None:
                return found
        elif isinstance(stmt, VarDecl):
            visible.append(stmt.name)
    return None


def literal_pool(program: Program) -> Tuple[int, ...]:
    """Integer literals written in the function body, plus 0 and 1, sorted."""
    values = {0, 1}
    for stmt in iter_statements(program.function.body):
        for node in iter_subexpressions(own_expression(stmt)):
            if isinstance(node, IntLit):
                values.add(node.value)
    return tuple(sorted(values))


def expression_fragments(expr: Expr) -> List[Expr]:
    """Distinct subexpressions of `expr` in post-order (holes excluded)."""
    fragments: List[Expr] = []
    seen = set()
    for node in iter_subexpressions(expr):
        if isinstance(node, Hole) or node in seen:
            continue
        seen.add(node)
        fragments.append(node)
    return fragments


def expression_variables(expr: Expr) -> List[str]:
    names: List[str] = []
    for node in iter_subexpressions(expr):
        if isinstance(node, Var) and node.name not in names:
            names.append(node.name)
    return names


def is_bare_local_return(program: Program, stmt: Stmt) -> bool:
    """`return v;` where `v` is a local (its defining assignments are the fix sites)."""
    return (
        isinstance(stmt, Return)
        and isinstance(stmt.value, Var)
        and stmt.value.name not in program.function.params
    )

