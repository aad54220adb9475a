"""
Component-based enumerative synthesis.

Expressions are built bottom-up, smallest first, from a component set of
variables, integer constants and operators. `synthesize` keeps one
representative per observed value vector (the candidate's values on every
environment recorded in the repair constraint) and returns the first
representative that reproduces some angelic path of every forest.

Search runs in component levels: the operators of the expression being
replaced first, then the default operators for the location kind.
"""
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from repairforge.errors import SynthesisExhausted
from repairforge.lang.analysis import expression_fragments, expression_kind, expression_variables
from repairforge.lang.ast import (
    COMMUTATIVE,
    Binary,
    BinOp,
    ConstRef,
    Expr,
    IntLit,
    Operator,
    Unary,
    UnOp,
    ValueKind,
    Var,
    iter_subexpressions,
    operand_kind,
    result_kind,
)
from repairforge.lang.parser import parse_expression
from repairforge.services.angelic import RepairConstraint
from repairforge.services.interpreter import Env, Value, apply_binary, apply_unary, evaluate_expression

BOOLEAN_OPERATORS: Tuple[Operator, ...] = (BinOp.EQ, BinOp.NE, BinOp.LT, BinOp.LE, BinOp.AND, BinOp.OR)
INTEGER_OPERATORS: Tuple[Operator, ...] = (UnOp.NEG, BinOp.ADD, BinOp.SUB, BinOp.MUL)
DIVISION_OPERATORS: Tuple[Operator, ...] = (BinOp.DIV, BinOp.MOD)


# Expressions are built in this kind order within one size.
KIND_ORDER = (ValueKind.INTEGER, ValueKind.BOOLEAN)

DEADLINE_CHECK_INTERVAL = 4096

Vector = Tuple[Optional[Value], ...]


@dataclass(frozen=True)
class ComponentSet:
    """Ingredients of candidate expressions.

    `seeds` are fragments of the expression being replaced; they are tried
    first within their size. `named_constants` gives the values of any
    constant references appearing in seeds.
    """
    variables: Tuple[str, ...]
    constants: Tuple[int, ...] = ()
    operators: Tuple[Operator, ...] = ()
    seeds: Tuple[Expr, ...] = ()
    named_constants: Mapping[str, int] = field(default_factory=dict)


def default_operators(kind: ValueKind, include_div: bool = False) -> Tuple[Operator, ...]:
    if kind is ValueKind.BOOLEAN:
        return BOOLEAN_OPERATORS
    if include_div:
        return INTEGER_OPERATORS + DIVISION_OPERATORS
    return INTEGER_OPERATORS


def _resolve_constant_names(expr: Expr, names: Mapping[str, int]) -> Expr:
    if isinstance(expr, Var) and expr.name in names:
        return ConstRef(expr.name)
    if isinstance(expr, Unary):
        return Unary(expr.op, _resolve_constant_names(expr.operand, names))
    if isinstance(expr, Binary):
        return Binary(
            expr.op,
            _resolve_constant_names(expr.left, names),
            _resolve_constant_names(expr.right, names),
        )
    return expr


def components_from_constraint(
    rc: RepairConstraint,
    include_div: bool = False,
    unrestricted_constants: bool = False,
    unrestricted_range: int = 10,
) -> ComponentSet:
    """
    Component set for a repair constraint.

    Args:
        rc: Repair constraint (carries live variables, literal pool and the
            original expression text)
        include_div: Add `/` and `%` for integer locations
        unrestricted_constants: Use -range..range instead of the literal pool
        unrestricted_range: Bound for the unrestricted pool

    Returns:
        ComponentSet
    """
    variables = tuple(rc.location.live_vars)
    if unrestricted_constants:
        constants = tuple(range(-unrestricted_range, unrestricted_range + 1))
    else:
        constants = tuple(sorted(set(rc.constants) | {0, 1}))

    original = _resolve_constant_names(parse_expression(rc.original), rc.named_constants)
    seeds = tuple(
        fragment
        for fragment in expression_fragments(original)
        if set(expression_variables(fragment)) <= set(variables)
    )
    return ComponentSet(
        variables=variables,
        constants=constants,
        operators=default_operators(rc.value_kind, include_div),
        seeds=seeds,
        named_constants=dict(rc.named_constants),
    )


# Canonical operator order; a component level keeps the operators it allows.
ALL_OPERATORS: Tuple[Operator, ...] = (
    UnOp.NEG, BinOp.ADD, BinOp.SUB, BinOp.MUL, BinOp.DIV, BinOp.MOD,
    BinOp.EQ, BinOp.NE, BinOp.LT, BinOp.LE, BinOp.GT, BinOp.GE,
    BinOp.AND, BinOp.OR, UnOp.NOT,
)


def component_levels(
    rc: RepairConstraint,
    include_div: bool = False,
    unrestricted_constants: bool = False,
    unrestricted_range: int = 10,
) -> List[ComponentSet]:
    """
    Component sets to search in order.

    The first level only offers the operators already used by the expression
    being replaced; the second offers the default operators for the location.
    A level equal to the one before it is dropped.

    Args:
        rc: Repair constraint
        include_div: Add `/` and `%` to the default integer operators
        unrestricted_constants: Use -range..range instead of the literal pool
        unrestricted_range: Bound for the unrestricted pool

    Returns:
        One or two ComponentSets
    """
    full = components_from_constraint(rc, include_div, unrestricted_constants, unrestricted_range)
    used = {
        node.op
        for node in iter_subexpressions(parse_expression(rc.original))
        if isinstance(node, (Unary, Binary))
    }
    own = replace(full, operators=tuple(op for op in ALL_OPERATORS if op in used))
    if own.operators == full.operators:
        return [full]
    return [own, full]


@dataclass
class SynthesisStats:
    generated: int = 0
    kept: int = 0
    checked: int = 0
    size_reached: int = 0


def _combine(op: BinOp, left: Vector, right: Vector) -> Vector:
    out: List[Optional[Value]] = []
    for lv, rv in zip(left, right):
        if op is BinOp.AND:
            out.append(None if lv is None else (rv if lv else False))
        elif op is BinOp.OR:
            out.append(None if lv is None else (True if lv else rv))
        elif lv is None or rv is None:
            out.append(None)
        else:
            try:
                out.append(apply_binary(op, lv, rv))
            except ZeroDivisionError:
                out.append(None)
    return tuple(out)


def _negate(op: UnOp, vector: Vector) -> Vector:
    return tuple(None if v is None else apply_unary(op, v) for v in vector)


class _Bank:
    """Expressions grouped by kind and size, built one size at a time."""

    def __init__(
        self,
        cs: ComponentSet,
        envs: Optional[Sequence[Env]] = None,
        deadline: Optional[float] = None,
        stats: Optional[SynthesisStats] = None,
    ):
        self.cs = cs
        self.envs = envs
        self.prune = envs is not None
        self.deadline = deadline
        self.stats = stats or SynthesisStats()
        self.exprs: Dict[ValueKind, Dict[int, List[Expr]]] = {k: defaultdict(list) for k in KIND_ORDER}
        self.vectors: Dict[ValueKind, Dict[int, List[Vector]]] = {k: defaultdict(list) for k in KIND_ORDER}
        self.seen: Dict[ValueKind, set] = {k: set() for k in KIND_ORDER}
        self.seen_vectors: Dict[ValueKind, set] = {k: set() for k in KIND_ORDER}

    def _vector_of(self, expr: Expr) -> Vector:
        if not self.prune:
            return ()
        values: List[Optional[Value]] = []
        for env in self.envs:
            try:
                values.append(evaluate_expression(expr, env, self.cs.named_constants))
            except (ZeroDivisionError, KeyError):
                values.append(None)
        return tuple(values)

    def _leaves(self) -> Iterator[Tuple[Expr, Vector]]:
        for name in self.cs.variables:
            vector = tuple(env.get(name) for env in self.envs) if self.prune else ()
            yield Var(name), vector
        for value in self.cs.constants:
            vector = (value,) * len(self.envs) if self.prune else ()
            yield IntLit(value), vector

    def _candidates(self, kind: ValueKind, size: int) -> Iterator[Tuple[Expr, Vector]]:
        for seed in self.cs.seeds:
            if seed.size == size and expression_kind(seed) is kind:
                yield seed, self._vector_of(seed)
        if size == 1 and kind is ValueKind.INTEGER:
            yield from self._leaves()

        for op in self.cs.operators:
            if result_kind(op) is not kind:
                continue
            child_kind = operand_kind(op)
            if isinstance(op, UnOp):
                if size < 2:
                    continue
                children = self.exprs[child_kind][size - 1]
                child_vectors = self.vectors[child_kind][size - 1]
                for child, vector in zip(children, child_vectors):
                    if op is UnOp.NEG and isinstance(child, IntLit):
                        continue
                    yield Unary(op, child), (_negate(op, vector) if self.prune else ())
                continue

            commutative = op in COMMUTATIVE
            for left_size in range(1, size - 1):
                right_size = size - 1 - left_size
                if commutative and left_size < right_size:
                    continue
                lefts = self.exprs[child_kind][left_size]
                left_vectors = self.vectors[child_kind][left_size]
                rights = self.exprs[child_kind][right_size]
                right_vectors = self.vectors[child_kind][right_size]
                for i, (left, lv) in enumerate(zip(lefts, left_vectors)):
                    start = i if commutative and left_size == right_size else 0
                    for j in range(start, len(rights)):
                        vector = _combine(op, lv, right_vectors[j]) if self.prune else ()
                        yield Binary(op, left, rights[j]), vector

    def grow(self, size: int) -> Iterator[Tuple[ValueKind, Expr, Vector]]:
        """Build every expression of `size` and yield the ones kept."""
        self.stats.size_reached = size
        for kind in KIND_ORDER:
            for expr, vector in self._candidates(kind, size):
                self.stats.generated += 1
                if (
                    self.deadline is not None
                    and self.stats.generated % DEADLINE_CHECK_INTERVAL == 0
                    and time.monotonic() > self.deadline
                ):
                    raise SynthesisExhausted(f"time budget ran out at size {size}")
                if expr in self.seen[kind]:
                    continue
                if self.prune:
                    if vector in self.seen_vectors[kind]:
                        continue
                    self.seen_vectors[kind].add(vector)
                self.seen[kind].add(expr)
                self.exprs[kind][size].append(expr)
                self.vectors[kind][size].append(vector)
                self.stats.kept += 1
                yield kind, expr, vector


def enumerate_expressions(cs: ComponentSet, result_type: ValueKind, max_size: int) -> Iterator[Expr]:
    """
    Stream well-typed expressions in nondecreasing size.

    Within a size: seeds, then leaves (variables, then constants), then
    operator applications in declared operator order with the left operand
    enumerated before the right. Commutative operators emit one operand
    order only. No structural duplicates; no observational pruning.

    Args:
        cs: Component set
        result_type: Kind of the expressions to yield
        max_size: Largest node count

    Returns:
        Iterator of expressions
    """
    bank = _Bank(cs)
    for size in range(1, max_size + 1):
        for kind, expr, _ in bank.grow(size):
            if kind is result_type:
                yield expr


def _indexed_forests(rc: RepairConstraint, envs: List[Env]) -> List[List[Tuple[Tuple[int, Value], ...]]]:
    index = {tuple(sorted(env.items())): i for i, env in enumerate(envs)}
    return [
        [
            tuple((index[tuple(sorted(step.env.items()))], step.forced) for step in path.steps)
            for path in forest.passing_paths
        ]
        for forest in rc.forests
    ]


def _satisfies(vector: Vector, forests) -> bool:
    return all(
        any(all(vector[i] == forced for i, forced in path) for path in paths)
        for paths in forests
    )


def check_candidate(e: Expr, rc: RepairConstraint) -> bool:
    """
    True iff, for every forest, some passing path is reproduced pointwise by `e`.

    Evaluation errors count as mismatches. An empty forest list is satisfied
    by every expression.
    """
    envs = rc.environments()
    values: List[Optional[Value]] = []
    for env in envs:
        try:
            values.append(evaluate_expression(e, env, rc.named_constants))
        except (ZeroDivisionError, KeyError):
            values.append(None)
    return _satisfies(tuple(values), _indexed_forests(rc, envs))


def synthesize(
    rc: RepairConstraint,
    cs: ComponentSet,
    max_size: int,
    deadline: Optional[float] = None,
    stats: Optional[SynthesisStats] = None,
) -> Expr:
    """
    Smallest expression satisfying the repair constraint.

    Args:
        rc: Repair constraint
        cs: Component set
        max_size: Largest node count to try
        deadline: time.monotonic() value after which the search gives up
        stats: Filled with candidate counts when given

    Returns:
        First satisfying expression in enumeration order

    Raises:
        SynthesisExhausted: Nothing up to max_size satisfies rc, or the
            deadline passed
    """
    stats = stats if stats is not None else SynthesisStats()
    envs = rc.environments()
    forests = _indexed_forests(rc, envs)
    bank = _Bank(cs, envs=envs, deadline=deadline, stats=stats)

    for size in range(1, max_size + 1):
        for kind, expr, vector in bank.grow(size):
            if kind is not rc.value_kind:
                continue
            stats.checked += 1
            if _satisfies(vector, forests):
                logger.info(
                    "Synthesized size-{} expression after {} candidates ({} kept)",
                    size,
                    stats.generated,
                    stats.kept,
                )
                return expr

    logger.info("No expression up to size {} ({} candidates)", max_size, stats.generated)
    raise SynthesisExhausted(f"no expression of size <= {max_size} satisfies the constraint")


def synthesize_in_levels(
    rc: RepairConstraint,
    levels: Sequence[ComponentSet],
    max_size: int,
    deadline: Optional[float] = None,
    stats: Optional[SynthesisStats] = None,
) -> Expr:
    """
    Run `synthesize` on each component level until one succeeds.

    Size minimality holds within a level, not across levels.

    Raises:
        SynthesisExhausted: Every level failed, or the deadline passed
    """
    for index, cs in enumerate(levels):
        try:
            return synthesize(rc, cs, max_size, deadline=deadline, stats=stats)
        except SynthesisExhausted:
            out_of_time = deadline is not None and time.monotonic() > deadline
            if out_of_time or index == len(levels) - 1:
                raise
            logger.debug("Level {} exhausted; widening to {}", index + 1, [op.value for op in levels[index + 1].operators])
    raise SynthesisExhausted("no component levels to search")
