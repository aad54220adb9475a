"""
Abstract syntax for MiniLang.

Nodes are frozen dataclasses: programs are immutable values that can be
shared freely between the interpreter, the probe installer and the
synthesizer. Statements compare by content *and* line, so two programs are
structurally equal only when every statement sits on the same source line.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Tuple, Union


class ValueKind(str, Enum):
    """Static type of a MiniLang expression."""
    BOOLEAN = "boolean"
    INTEGER = "integer"


class UnOp(str, Enum):
    NEG = "-"
    NOT = "!"


class BinOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    MOD = "%"
    EQ = "=="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"


Operator = Union[UnOp, BinOp]

ARITHMETIC = frozenset({BinOp.ADD, BinOp.SUB, BinOp.MUL, BinOp.DIV, BinOp.MOD})
COMPARISON = frozenset({BinOp.EQ, BinOp.NE, BinOp.LT, BinOp.LE, BinOp.GT, BinOp.GE})
LOGICAL = frozenset({BinOp.AND, BinOp.OR})
COMMUTATIVE = frozenset({BinOp.ADD, BinOp.MUL, BinOp.EQ, BinOp.NE, BinOp.AND, BinOp.OR})

# Binding strength used by the parser grammar and the printer.
PRECEDENCE = {
    BinOp.OR: 1,
    BinOp.AND: 2,
    BinOp.EQ: 3,
    BinOp.NE: 3,
    BinOp.LT: 4,
    BinOp.LE: 4,
    BinOp.GT: 4,
    BinOp.GE: 4,
    BinOp.ADD: 5,
    BinOp.SUB: 5,
    BinOp.MUL: 6,
    BinOp.DIV: 6,
    BinOp.MOD: 6,
}
UNARY_PRECEDENCE = 7
ATOM_PRECEDENCE = 8


def operand_kind(op: Operator) -> ValueKind:
    """Type every operand of `op` must have."""
    if op is UnOp.NOT or op in LOGICAL:
        return ValueKind.BOOLEAN
    return ValueKind.INTEGER


def result_kind(op: Operator) -> ValueKind:
    """Type of the value `op` produces."""
    if op is UnOp.NOT or op in LOGICAL or op in COMPARISON:
        return ValueKind.BOOLEAN
    return ValueKind.INTEGER


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    size: int = field(default=1, init=False, repr=False, compare=False)


@dataclass(frozen=True)
class ConstRef:
    name: str
    size: int = field(default=1, init=False, repr=False, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    size: int = field(default=1, init=False, repr=False, compare=False)


@dataclass(frozen=True)
class Unary:
    op: UnOp
    operand: "Expr"
    size: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", 1 + self.operand.size)


@dataclass(frozen=True)
class Binary:
    op: BinOp
    left: "Expr"
    right: "Expr"
    size: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", 1 + self.left.size + self.right.size)


@dataclass(frozen=True)
class Hole:
    """The unknown X installed at a fix location.

    `live_vars` names the variables whose values are snapshotted every time
    the hole is evaluated.
    """
    live_vars: Tuple[str, ...]
    kind: ValueKind
    size: int = field(default=1, init=False, repr=False, compare=False)


Expr = Union[IntLit, ConstRef, Var, Unary, Binary, Hole]


def iter_subexpressions(expr: Expr) -> Iterator[Expr]:
    """Post-order walk over `expr` (children before parents)."""
    if isinstance(expr, Unary):
        yield from iter_subexpressions(expr.operand)
    elif isinstance(expr, Binary):
        yield from iter_subexpressions(expr.left)
        yield from iter_subexpressions(expr.right)
    yield expr


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    line: int
    name: str
    init: Expr
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Assign:
    line: int
    name: str
    value: Expr
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class If:
    """Conditional. `chained` marks an `else if` (else_body is a single If
    printed on the same line as `else`)."""
    line: int
    cond: Expr
    then_body: Tuple["Stmt", ...]
    else_body: Optional[Tuple["Stmt", ...]] = None
    chained: bool = False
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class While:
    line: int
    cond: Expr
    body: Tuple["Stmt", ...]
    column: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Return:
    line: int
    value: Expr
    column: int = field(default=1, compare=False)


Stmt = Union[VarDecl, Assign, If, While, Return]


@dataclass(frozen=True)
class ConstDecl:
    line: int
    name: str
    value: int


@dataclass(frozen=True)
class Function:
    line: int
    name: str
    params: Tuple[str, ...]
    body: Tuple[Stmt, ...]
    end_line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
    constants: Tuple[ConstDecl, ...]
    function: Function

    @property
    def constant_values(self) -> dict:
        return {c.name: c.value for c in self.constants}

    @property
    def arity(self) -> int:
        return len(self.function.params)


def iter_statements(body: Tuple[Stmt, ...]) -> Iterator[Stmt]:
    """Pre-order walk over every statement nested in `body`, in source order."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, If):
            yield from iter_statements(stmt.then_body)
            if stmt.else_body is not None:
                yield from iter_statements(stmt.else_body)
        elif isinstance(stmt, While):
            yield from iter_statements(stmt.body)
