"""Lower every block to a small script over the shared AST and schedule it.

The resulting ``Program`` is what the interpreter, the compiler, the
instrumenter and the symbolic executor consume.  Wire and port values are
addressed by ``Source`` tuples: ``("port", id, lane)``, ``("block", id,
out_index)`` or ``("default", value)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import ast
from .layout import BufferLayout, layout_test_buffer
from .model import ModelIR
from .types import ValueType, arith_type, literal_type


@dataclass(frozen=True)
class LBlock:
    index: int
    id: str
    kind: str
    inputs: tuple  # (local name, type, source)
    outputs: tuple  # (local name, type)
    state: tuple  # (name, type, init)
    locals: tuple  # (name, type)
    body: tuple

    def env(self) -> dict:
        env = {n: t for n, t, _ in self.inputs}
        env.update({n: t for n, t in self.outputs})
        env.update({n: t for n, t, _ in self.state})
        env.update({n: t for n, t in self.locals})
        return env


@dataclass(frozen=True)
class LDelay:
    index: int
    id: str
    type: ValueType
    init: object
    source: tuple


@dataclass(frozen=True)
class Program:
    model: ModelIR
    layout: BufferLayout
    blocks: tuple  # non-delay LBlocks in evaluation order
    delays: tuple  # LDelay, output at step start, update at step end
    outputs: tuple  # (port id, lane, type, source)
    wire_types: dict = field(default_factory=dict)

    @property
    def unit_ids(self) -> tuple:
        return tuple(b.id for b in self.model.blocks)

    def with_blocks(self, blocks) -> "Program":
        return replace(self, blocks=tuple(blocks))


def expr_type(e, env: dict) -> ValueType:
    """Static C-like type of an expression in a block environment."""
    if isinstance(e, ast.Num):
        return e.type
    if isinstance(e, ast.BoolLit):
        return ValueType.BOOL
    if isinstance(e, (ast.Var, ast.IncDec)):
        return env[e.name]
    if isinstance(e, ast.Unary):
        if e.op == "!":
            return ValueType.BOOL
        t = expr_type(e.operand, env)
        return ValueType.FLOAT64 if t.is_float else ValueType.INT32
    if isinstance(e, ast.Binary):
        if e.op in ast.RELATIONAL:
            return ValueType.BOOL
        return arith_type(expr_type(e.left, env), expr_type(e.right, env))
    if isinstance(e, ast.Logical):
        return ValueType.BOOL
    if isinstance(e, ast.Sat):
        return expr_type(e.operand, env)
    if isinstance(e, ast.Cast):
        return e.type
    if isinstance(e, ast.Record):
        return ValueType.BOOL
    if isinstance(e, ast.DecisionRoot):
        return expr_type(e.operand, env)
    raise TypeError(f"unknown expression {e!r}")


def _source_of(model: ModelIR) -> dict:
    src = {}
    for ln in model.links:
        kind = "port" if any(p.id == ln.src for p in model.ports) else "block"
        src[(ln.dst, ln.dst_idx)] = (kind, ln.src, ln.src_idx)
    return src


def _num(v, ty: ValueType | None = None) -> ast.Num:
    ty = ty or literal_type(v)
    if ty is ValueType.BOOL:
        ty = ValueType.INT32
        v = int(v)
    return ast.Num(float(v) if ty.is_float else int(v), ty)


def _lower_simple(b, in_types: list) -> tuple[tuple, tuple, tuple]:
    """(inputs names/types), outputs, body for a non-script, non-delay block."""
    p = b.params
    ins = [(f"in{i}", t) for i, t in enumerate(in_types)]
    var = [ast.Var(n) for n, _ in ins]
    k = b.kind
    if k == "Constant":
        ty = p.get("type") or literal_type(p["value"])
        return ins, (("out0", ty),), (ast.Assign("out0", _num(p["value"], ty)),)
    if k == "Add":
        signs = p.get("signs", "++")
        t = ValueType.INT32
        for it in in_types:
            t = arith_type(t, it)
        ty = p.get("type") or t
        expr = var[0] if signs[0] == "+" else ast.Unary("-", var[0])
        for s, v in zip(signs[1:], var[1:]):
            expr = ast.Binary(s, expr, v)
        return ins, (("out0", ty),), (ast.Assign("out0", ast.Cast(ty, expr)),)
    if k == "Gain":
        kval = p["k"]
        ty = p.get("type") or arith_type(in_types[0], literal_type(kval))
        expr = ast.Binary("*", var[0], _num(kval))
        return ins, (("out0", ty),), (ast.Assign("out0", ast.Cast(ty, expr)),)
    if k == "RelationalOp":
        return ins, (("out0", ValueType.BOOL),), (ast.Assign("out0", ast.Binary(p["op"], var[0], var[1])),)
    if k == "LogicOp":
        op = p.get("op", "AND")
        if op == "NOT":
            expr = ast.Unary("!", var[0])
        else:
            sym = "&&" if op == "AND" else "||"
            expr = var[0]
            for v in var[1:]:
                expr = ast.Logical(sym, expr, v)
            if len(var) == 1:
                expr = ast.Binary("!=", var[0], ast.Num(0, ValueType.INT32))
        return ins, (("out0", ValueType.BOOL),), (ast.Assign("out0", expr),)
    if k == "Switch":
        crit = p.get("criteria", ">=")
        thr = p.get("threshold", 0)
        ty = in_types[0] if in_types[0] == in_types[2] else arith_type(in_types[0], in_types[2])
        pred = ast.Binary(crit, var[1], _num(thr))
        body = (
            ast.If(pred, (ast.Assign("out0", var[0]),), (ast.Assign("out0", var[2]),)),
        )
        return ins, (("out0", ty),), body
    if k == "Saturate":
        ty = in_types[0]
        lo, hi = p["lo"], p["hi"]
        if ty.is_int:
            lo, hi = int(lo), int(hi)
        elif ty.is_float:
            lo, hi = float(lo), float(hi)
        return ins, (("out0", ty),), (ast.Assign("out0", ast.Sat(var[0], lo, hi)),)
    raise ValueError(f"cannot lower {k}")


def topo_order(model: ModelIR) -> list:
    """Non-delay blocks in dependency order (stable w.r.t. declaration order)."""
    blocks = {b.id: b for b in model.blocks}
    deps = {b.id: set() for b in model.blocks if b.kind != "UnitDelay"}
    for ln in model.links:
        if ln.dst in deps and ln.src in blocks and blocks[ln.src].kind != "UnitDelay":
            deps[ln.dst].add(ln.src)
    order = []
    done = set()
    pending = [b.id for b in model.blocks if b.kind != "UnitDelay"]
    while pending:
        progressed = False
        rest = []
        for bid in pending:
            if deps[bid] <= done:
                order.append(bid)
                done.add(bid)
                progressed = True
            else:
                rest.append(bid)
        if not progressed:
            raise ValueError("algebraic loop")
        pending = rest
    return order


def lower(model: ModelIR) -> Program:
    sources = _source_of(model)
    blocks = {b.id: b for b in model.blocks}
    order = topo_order(model)

    wire_types: dict = {}
    for p in model.input_ports:
        for lane in range(p.width):
            wire_types[("port", p.id, lane)] = p.value_type
    delay_types = {}
    for b in model.blocks:
        if b.kind == "UnitDelay":
            delay_types[b.id] = b.params.get("type") or literal_type(b.params.get("init", 0))

    def src_type(src):
        if src[0] == "default":
            return literal_type(src[1])
        return wire_types[src]

    lowered = {}
    for _ in range(4):
        for bid, ty in delay_types.items():
            wire_types[("block", bid, 0)] = ty
        for bid in order:
            b = blocks[bid]
            if b.kind == "Script":
                ins = []
                for i, (name, ty, default) in enumerate(b.inputs):
                    src = sources.get((bid, i), ("default", default))
                    ins.append((name, ty, src))
                outs = tuple((n, t) for n, t in b.outputs)
                locals_ = tuple(
                    (s.name, s.type) for s in ast.walk_stmts(b.body) if isinstance(s, ast.Decl)
                )
                lb = LBlock(0, bid, "Script", tuple(ins), outs, tuple(b.state_vars), locals_, b.body)
            else:
                in_srcs = [sources[(bid, i)] for i in range(b.n_inputs)]
                in_types = [src_type(s) for s in in_srcs]
                ins, outs, body = _lower_simple(b, in_types)
                lb = LBlock(
                    0, bid, b.kind,
                    tuple((n, t, s) for (n, t), s in zip(ins, in_srcs)),
                    tuple(outs), (), (), tuple(body),
                )
            for j, (_, t) in enumerate(lb.outputs):
                wire_types[("block", bid, j)] = t
            lowered[bid] = lb
        changed = False
        for bid in delay_types:
            b = blocks[bid]
            if "type" in b.params:
                continue
            src = sources[(bid, 0)]
            t = src_type(src)
            if t is not delay_types[bid]:
                delay_types[bid] = t
                changed = True
        if not changed:
            break

    index = {b.id: i for i, b in enumerate(model.blocks)}
    lblocks = tuple(replace(lowered[bid], index=index[bid]) for bid in order)
    delays = tuple(
        LDelay(index[b.id], b.id, delay_types[b.id], b.params.get("init", 0), sources[(b.id, 0)])
        for b in model.blocks
        if b.kind == "UnitDelay"
    )
    outputs = []
    for p in model.output_ports:
        for lane in range(p.width):
            outputs.append((p.id, lane, p.value_type, sources[(p.id, lane)]))
    return Program(model, layout_test_buffer(model), lblocks, delays, tuple(outputs), wire_types)
