"""Side-effect-safe MC/DC instrumentation.

Every decision ``e`` becomes ``e ? record(true, 0, d) : record(false, 0, d)``
and every condition (leaf Boolean atom) inside it gets the same treatment
with its 1-based index.  The rewrite wraps expressions in place, so short
circuiting and side effects such as ``b++`` happen exactly as before.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import ast
from .lower import Program, lower
from .model import MAX_CONDITIONS, ModelIR
from .printer import format_expr


class InstrumentError(ValueError):
    def __init__(self, block: str, text: str, count: int):
        self.block = block
        self.text = text
        self.count = count
        super().__init__(
            f"decision {text!r} in block {block!r} has {count} conditions; "
            f"at most {MAX_CONDITIONS} fit one coverage word"
        )


@dataclass(frozen=True)
class DecisionInfo:
    id: int
    block: str
    condition_count: int
    root_is_leaf: bool
    text: str
    conditions: tuple  # source text per condition index 1..n
    in_loop: bool

    @property
    def condition_indices(self) -> tuple:
        """Indices whose outcomes are objectives: (0,) for a bare atom, else 1..n."""
        if self.root_is_leaf:
            return (0,)
        return tuple(range(1, self.condition_count + 1))


@dataclass(frozen=True)
class InstrumentedModel:
    model: ModelIR
    base: Program
    program: Program
    decisions: tuple

    @property
    def unit_count(self) -> int:
        return len(self.model.blocks)

    @property
    def layout(self):
        return self.base.layout


def _leaves(e) -> list:
    if isinstance(e, ast.Logical):
        return _leaves(e.left) + _leaves(e.right)
    if isinstance(e, ast.Unary) and e.op == "!":
        return _leaves(e.operand)
    return [e]


class _Rewriter:
    def __init__(self, block_id: str, next_id: int):
        self.block = block_id
        self.next_id = next_id
        self.infos: list[DecisionInfo] = []
        self.in_loop = False

    def decision(self, e) -> ast.DecisionRoot:
        d = self.next_id
        self.next_id += 1
        slot = len(self.infos)
        self.infos.append(None)
        leaves = _leaves(e)
        root_is_leaf = len(leaves) == 1 and leaves[0] is e
        if len(leaves) > MAX_CONDITIONS:
            raise InstrumentError(self.block, format_expr(e), len(leaves))
        if root_is_leaf:
            body = ast.Record(self.operands(e), 0, d)
        else:
            counter = iter(range(1, len(leaves) + 1))
            body = ast.Record(self.tree(e, counter, d), 0, d)
        self.infos[slot] = DecisionInfo(
            d,
            self.block,
            len(leaves),
            root_is_leaf,
            format_expr(e),
            tuple(format_expr(x) for x in leaves) if not root_is_leaf else (),
            self.in_loop,
        )
        return ast.DecisionRoot(body, d)

    def tree(self, e, counter, d: int):
        if isinstance(e, ast.Logical):
            left = self.tree(e.left, counter, d)
            right = self.tree(e.right, counter, d)
            return ast.Logical(e.op, left, right)
        if isinstance(e, ast.Unary) and e.op == "!":
            return ast.Unary("!", self.tree(e.operand, counter, d))
        index = next(counter)
        return ast.Record(self.operands(e), index, d)

    def operands(self, e):
        """Instrument nested decisions inside a leaf's operands (value context)."""
        if isinstance(e, ast.Binary):
            return ast.Binary(e.op, self.value(e.left), self.value(e.right))
        return self.value(e)

    def value(self, e):
        if ast.is_boolean_expr(e):
            return self.decision(e)
        if isinstance(e, ast.Binary):
            return ast.Binary(e.op, self.value(e.left), self.value(e.right))
        if isinstance(e, ast.Unary):
            return ast.Unary(e.op, self.value(e.operand))
        if isinstance(e, ast.Sat):
            return ast.Sat(self.value(e.operand), e.lo, e.hi)
        if isinstance(e, ast.Cast):
            return ast.Cast(e.type, self.value(e.operand))
        return e

    def stmts(self, stmts) -> tuple:
        out = []
        for s in stmts:
            if isinstance(s, ast.Decl):
                out.append(replace(s, init=self.value(s.init)) if s.init is not None else s)
            elif isinstance(s, ast.Assign):
                out.append(ast.Assign(s.name, self.value(s.value)))
            elif isinstance(s, ast.ExprStmt):
                out.append(ast.ExprStmt(self.value(s.expr)))
            elif isinstance(s, ast.If):
                cond = self.decision(s.cond)
                out.append(ast.If(cond, self.stmts(s.then), self.stmts(s.orelse)))
            elif isinstance(s, ast.While):
                outer = self.in_loop
                self.in_loop = True
                cond = self.decision(s.cond)
                body = self.stmts(s.body)
                self.in_loop = outer
                out.append(ast.While(cond, body))
            else:
                raise TypeError(s)
        return tuple(out)


def instrument(model: ModelIR | Program) -> InstrumentedModel:
    base = model if isinstance(model, Program) else lower(model)
    model_ir = base.model
    by_id = {b.id: b for b in base.blocks}
    next_id = 0
    new_blocks = {}
    infos = []
    for b in model_ir.blocks:
        lb = by_id.get(b.id)
        if lb is None:
            continue
        rw = _Rewriter(b.id, next_id)
        body = rw.stmts(lb.body)
        new_blocks[b.id] = replace(lb, body=body)
        infos.extend(rw.infos)
        next_id = rw.next_id
    program = base.with_blocks(new_blocks[lb.id] for lb in base.blocks)
    infos.sort(key=lambda i: i.id)
    return InstrumentedModel(model_ir, base, program, tuple(infos))
