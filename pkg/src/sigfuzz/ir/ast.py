"""Expression and statement nodes of the embedded script language.

Non-script blocks are lowered onto the same nodes (see ``lower``), so the
interpreter, compiler, instrumenter and symbolic executor all share one
tree shape.  ``Record`` and ``DecisionRoot`` only appear after
instrumentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .types import ValueType


@dataclass(frozen=True)
class Num:
    value: int | float
    type: ValueType


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or '!'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / < <= > >= == !=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Logical:
    op: str  # '&&' or '||'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IncDec:
    """Postfix ``name++`` / ``name--``; evaluates to the old value."""

    name: str
    delta: int


@dataclass(frozen=True)
class Sat:
    operand: "Expr"
    lo: int | float
    hi: int | float


@dataclass(frozen=True)
class Cast:
    type: ValueType
    operand: "Expr"


@dataclass(frozen=True)
class Record:
    """``e ? record(true, cond, dec) : record(false, cond, dec)``."""

    operand: "Expr"
    cond: int
    dec: int


@dataclass(frozen=True)
class DecisionRoot:
    """Marks one evaluation of decision ``dec``: a fresh coverage word is
    started before ``operand`` runs and stored once it finishes."""

    operand: "Expr"
    dec: int


Expr = Union[Num, BoolLit, Var, Unary, Binary, Logical, IncDec, Sat, Cast, Record, DecisionRoot]


@dataclass(frozen=True)
class Decl:
    type: ValueType
    name: str
    init: Expr | None


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple = ()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple


Stmt = Union[Decl, Assign, ExprStmt, If, While]

RELATIONAL = ("<", "<=", ">", ">=", "==", "!=")
ARITHMETIC = ("+", "-", "*", "/")


def is_boolean_expr(e: Expr) -> bool:
    """Boolean-producing syntax: relational, logical and negation nodes."""
    if isinstance(e, Binary):
        return e.op in RELATIONAL
    if isinstance(e, Logical):
        return True
    if isinstance(e, Unary):
        return e.op == "!"
    return False


def children(e: Expr) -> tuple:
    if isinstance(e, (Unary, Sat, Cast, Record, DecisionRoot)):
        return (e.operand,)
    if isinstance(e, (Binary, Logical)):
        return (e.left, e.right)
    return ()


def walk_expr(e: Expr):
    yield e
    for c in children(e):
        yield from walk_expr(c)


def walk_stmts(stmts):
    """Yield every statement, depth first, in source order."""
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def stmt_exprs(s: Stmt) -> tuple:
    if isinstance(s, Decl):
        return (s.init,) if s.init is not None else ()
    if isinstance(s, Assign):
        return (s.value,)
    if isinstance(s, ExprStmt):
        return (s.expr,)
    if isinstance(s, (If, While)):
        return (s.cond,)
    return ()
