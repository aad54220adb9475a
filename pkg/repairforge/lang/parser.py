"""
MiniLang front end: lark LALR grammar, tree-to-AST builder and the
name/type checker.
"""
from typing import Dict, List, Optional, Set, Tuple

from lark import Lark, Tree
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from repairforge.errors import ParseError, TypeCheckError
from repairforge.lang.ast import (
    Assign,
    BinOp,
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
    ValueKind,
    Var,
    VarDecl,
    While,
    iter_statements,
    operand_kind,
    result_kind,
)

MINILANG_GRAMMAR = r"""
    start: item*
    ?item: const_decl | function

    const_decl: CONST NAME "=" MINUS? INT ";"
    function: FUNCTION NAME "(" params? ")" "{" stmt* RBRACE
    params: NAME ("," NAME)*

    ?stmt: var_decl | assign | if_stmt | while_stmt | return_stmt
    var_decl: VAR NAME "=" expr ";"
    assign: NAME "=" expr ";"
    if_stmt: IF "(" expr ")" block (ELSE (if_stmt | block))?
    while_stmt: WHILE "(" expr ")" block
    return_stmt: RETURN expr ";"
    block: "{" stmt* "}"

    ?expr: or_expr
    ?or_expr: and_expr
        | or_expr OROR and_expr -> binary
    ?and_expr: eq_expr
        | and_expr ANDAND eq_expr -> binary
    ?eq_expr: rel_expr
        | eq_expr EQ_OP rel_expr -> binary
    ?rel_expr: add_expr
        | rel_expr REL_OP add_expr -> binary
    ?add_expr: mul_expr
        | add_expr PLUS mul_expr -> binary
        | add_expr MINUS mul_expr -> binary
    ?mul_expr: unary
        | mul_expr MUL_OP unary -> binary
    ?unary: atom
        | MINUS unary -> neg
        | BANG unary -> not_
    ?atom: INT -> int_lit
        | NAME -> name
        | "(" expr ")" -> paren

    CONST: "const"
    FUNCTION: "function"
    VAR: "var"
    IF: "if"
    ELSE: "else"
    WHILE: "while"
    RETURN: "return"
    RBRACE: "}"

    OROR: "||"
    ANDAND: "&&"
    EQ_OP: "==" | "!="
    REL_OP: "<=" | ">=" | "<" | ">"
    PLUS: "+"
    MINUS: "-"
    MUL_OP: "*" | "/" | "%"
    BANG: "!"

    %import common.CNAME -> NAME
    %import common.INT
    %import common.WS
    COMMENT: /\/\/[^\n]*/
    %ignore WS
    %ignore COMMENT
"""

KEYWORDS = frozenset({"const", "function", "var", "if", "else", "while", "return"})

_PARSER = Lark(
    MINILANG_GRAMMAR,
    parser="lalr",
    start=["start", "expr"],
    propagate_positions=True,
)


def _raise_parse_error(exc: UnexpectedInput) -> None:
    line = exc.line if getattr(exc, "line", -1) and exc.line > 0 else None
    column = exc.column if getattr(exc, "column", -1) and exc.column > 0 else None
    if isinstance(exc, UnexpectedEOF):
        message = "unexpected end of input"
    elif isinstance(exc, UnexpectedToken):
        message = f"unexpected token {exc.token!r}"
    elif isinstance(exc, UnexpectedCharacters):
        message = f"unexpected character {exc.char!r}"
    else:
        message = "syntax error"
    raise ParseError(message, line, column) from exc


class _AstBuilder:
    """Turns the lark parse tree into AST nodes.

    Names are built as `Var`; the checker rewrites references to declared
    constants into `ConstRef` once every declaration is known.
    """

    def program(self, tree: Tree) -> Tuple[List[ConstDecl], List[Function]]:
        constants: List[ConstDecl] = []
        functions: List[Function] = []
        for item in tree.children:
            if item.data == "const_decl":
                constants.append(self.const_decl(item))
            else:
                functions.append(self.function(item))
        return constants, functions

    def const_decl(self, tree: Tree) -> ConstDecl:
        keyword, name, *rest = tree.children
        value = int(rest[-1])
        if len(rest) == 2:
            value = -value
        return ConstDecl(line=keyword.line, name=str(name), value=value)

    def function(self, tree: Tree) -> Function:
        keyword, name, *rest = tree.children
        params: Tuple[str, ...] = ()
        if rest and isinstance(rest[0], Tree) and rest[0].data == "params":
            params = tuple(str(tok) for tok in rest[0].children)
            rest = rest[1:]
        closing = rest[-1]
        body = tuple(self.stmt(child) for child in rest[:-1])
        return Function(
            line=keyword.line,
            name=str(name),
            params=params,
            body=body,
            end_line=closing.line,
        )

    def block(self, tree: Tree) -> Tuple[Stmt, ...]:
        return tuple(self.stmt(child) for child in tree.children)

    def stmt(self, tree: Tree) -> Stmt:
        kind = tree.data
        first = tree.children[0]
        line, column = first.line, first.column
        if kind == "var_decl":
            _, name, init = tree.children
            return VarDecl(line=line, name=str(name), init=self.expr(init), column=column)
        if kind == "assign":
            name, value = tree.children
            return Assign(line=line, name=str(name), value=self.expr(value), column=column)
        if kind == "if_stmt":
            _, cond, then_block, *tail = tree.children
            else_body = None
            chained = False
            if tail:
                branch = tail[1]
                if branch.data == "if_stmt":
                    else_body = (self.stmt(branch),)
                    chained = True
                else:
                    else_body = self.block(branch)
            return If(
                line=line,
                cond=self.expr(cond),
                then_body=self.block(then_block),
                else_body=else_body,
                chained=chained,
                column=column,
            )
        if kind == "while_stmt":
            _, cond, body = tree.children
            return While(line=line, cond=self.expr(cond), body=self.block(body), column=column)
        if kind == "return_stmt":
            _, value = tree.children
            return Return(line=line, value=self.expr(value), column=column)
        raise ParseError(f"unsupported statement {kind}", line, column)

    def expr(self, node) -> Expr:
        kind = node.data
        if kind == "int_lit":
            return IntLit(int(node.children[0]))
        if kind == "name":
            return Var(str(node.children[0]))
        if kind == "paren":
            return self.expr(node.children[0])
        if kind == "neg":
            operand = node.children[1]
            # `-3` written directly is one literal; `-(3)` stays a negation.
            if isinstance(operand, Tree) and operand.data == "int_lit":
                return IntLit(-int(operand.children[0]))
            return Unary(UnOp.NEG, self.expr(operand))
        if kind == "not_":
            return Unary(UnOp.NOT, self.expr(node.children[1]))
        if kind == "binary":
            left, op, right = node.children
            return Binary(BinOp(str(op)), self.expr(left), self.expr(right))
        raise ParseError(f"unsupported expression {kind}")


class _Checker:
    """Resolves names and checks types for one program."""

    def __init__(self, constants: List[ConstDecl], function: Function):
        self.constants: Dict[str, int] = {}
        self.function = function
        self.params: Set[str] = set()
        # local name -> line of its declaration
        self.locals: Dict[str, int] = {}
        self._collect_declarations(constants)

    def _collect_declarations(self, constants: List[ConstDecl]) -> None:
        for decl in constants:
            self._check_fresh(decl.name, decl.line)
            self.constants[decl.name] = decl.value
        for name in self.function.params:
            self._check_fresh(name, self.function.line)
            self.params.add(name)
        for stmt in iter_statements(self.function.body):
            if isinstance(stmt, VarDecl):
                self._check_fresh(stmt.name, stmt.line, stmt.column)
                self.locals[stmt.name] = stmt.line

    def _check_fresh(self, name: str, line: int, column: Optional[int] = None) -> None:
        if name in KEYWORDS:
            raise ParseError(f"'{name}' is a reserved word", line, column)
        if name in self.constants or name in self.params or name in self.locals:
            raise TypeCheckError(f"duplicate declaration of '{name}'", line, column)

    def check(self) -> Function:
        body = self._body(self.function.body)
        return Function(
            line=self.function.line,
            name=self.function.name,
            params=self.function.params,
            body=body,
            end_line=self.function.end_line,
        )

    def _body(self, body: Tuple[Stmt, ...]) -> Tuple[Stmt, ...]:
        return tuple(self._stmt(stmt) for stmt in body)

    def _stmt(self, stmt: Stmt) -> Stmt:
        where = (stmt.line, stmt.column)
        if isinstance(stmt, VarDecl):
            init = self._expect(stmt.init, ValueKind.INTEGER, where)
            return VarDecl(stmt.line, stmt.name, init, stmt.column)
        if isinstance(stmt, Assign):
            if stmt.name in self.constants:
                raise TypeCheckError(f"cannot assign to constant '{stmt.name}'", *where)
            self._check_variable(stmt.name, where)
            value = self._expect(stmt.value, ValueKind.INTEGER, where)
            return Assign(stmt.line, stmt.name, value, stmt.column)
        if isinstance(stmt, If):
            cond = self._expect(stmt.cond, ValueKind.BOOLEAN, where)
            else_body = None if stmt.else_body is None else self._body(stmt.else_body)
            return If(stmt.line, cond, self._body(stmt.then_body), else_body, stmt.chained, stmt.column)
        if isinstance(stmt, While):
            cond = self._expect(stmt.cond, ValueKind.BOOLEAN, where)
            return While(stmt.line, cond, self._body(stmt.body), stmt.column)
        value = self._expect(stmt.value, ValueKind.INTEGER, where)
        return Return(stmt.line, value, stmt.column)

    def _check_variable(self, name: str, where: Tuple[int, int]) -> None:
        if name in self.params:
            return
        declared = self.locals.get(name)
        if declared is None:
            raise TypeCheckError(f"unknown name '{name}'", *where)
        if declared >= where[0]:
            raise TypeCheckError(f"'{name}' used before its declaration", *where)

    def _expect(self, expr: Expr, kind: ValueKind, where: Tuple[int, int]) -> Expr:
        resolved, actual = self._expr(expr, where)
        if actual is not kind:
            raise TypeCheckError(f"expected {kind.value} expression, found {actual.value}", *where)
        return resolved

    def _expr(self, expr: Expr, where: Tuple[int, int]) -> Tuple[Expr, ValueKind]:
        if isinstance(expr, IntLit):
            return expr, ValueKind.INTEGER
        if isinstance(expr, (Var, ConstRef)):
            if expr.name in self.constants:
                return ConstRef(expr.name), ValueKind.INTEGER
            self._check_variable(expr.name, where)
            return Var(expr.name), ValueKind.INTEGER
        if isinstance(expr, Hole):
            return expr, expr.kind
        if isinstance(expr, Unary):
            operand = self._expect(expr.operand, operand_kind(expr.op), where)
            return Unary(expr.op, operand), result_kind(expr.op)
        left = self._expect(expr.left, operand_kind(expr.op), where)
        right = self._expect(expr.right, operand_kind(expr.op), where)
        return Binary(expr.op, left, right), result_kind(expr.op)


def _check_lines(function: Function) -> None:
    seen: Dict[int, Stmt] = {}
    for stmt in iter_statements(function.body):
        if stmt.line in seen:
            raise ParseError("more than one statement starts on this line", stmt.line, stmt.column)
        seen[stmt.line] = stmt


def parse_program(source: str) -> Program:
    """
    Parse and check a MiniLang source file.

    Args:
        source: Program text

    Returns:
        Program whose statements carry their physical source lines

    Raises:
        ParseError: Malformed text, missing or repeated function
        TypeCheckError: Unknown names, duplicate declarations, type errors
    """
    try:
        tree = _PARSER.parse(source, start="start")
    except UnexpectedInput as exc:
        _raise_parse_error(exc)

    constants, functions = _AstBuilder().program(tree)
    if not functions:
        raise ParseError("no function")
    if len(functions) > 1:
        raise ParseError("only one function is allowed per file", functions[1].line)

    function = functions[0]
    _check_lines(function)
    checked = _Checker(constants, function).check()
    return Program(constants=tuple(constants), function=checked)


def parse_expression(
    text: str,
    program: Optional[Program] = None,
    line: Optional[int] = None,
    expected: Optional[ValueKind] = None,
) -> Expr:
    """
    Parse a standalone expression (patch files, constraint tooling).

    Args:
        text: Expression in MiniLang concrete syntax
        program: When given, names resolve against its constants and
            variables visible at `line`
        line: Statement line used for visibility checks (defaults to the
            end of the function)
        expected: Required value kind; only checked when `program` is given

    Returns:
        Expression AST
    """
    try:
        tree = _PARSER.parse(text, start="expr")
    except UnexpectedInput as exc:
        _raise_parse_error(exc)

    expr = _AstBuilder().expr(tree)
    if program is None:
        return expr

    checker = _Checker(list(program.constants), program.function)
    where = (line if line is not None else program.function.end_line + 1, 1)
    if expected is not None:
        return checker._expect(expr, expected, where)
    resolved, _ = checker._expr(expr, where)
    return resolved
