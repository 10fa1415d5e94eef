"""Compile a lowered program into one specialized Python function.

Every model variable becomes a local of the generated function and every
coverage probe is inlined, which is what makes tens of thousands of
executions per second possible without a native toolchain.  The generated
source is kept on the result for debugging (``CompiledModel.source``).

Coverage words use the low 64 bits for outcomes (bit 0 = decision, bit c =
condition c) and the next 64 bits as an "evaluated" mask, so a false
outcome can be told apart from a condition that short-circuiting skipped.
"""

from __future__ import annotations

import logging
import math
import struct

from ..ir import ast
from ..ir.layout import LayoutEntry
from ..ir.lower import Program
from ..ir.types import ValueType, convert, float_div, int_div, wrap_int
from .testcase import range_of
from .trace import FAULT_DIV_ZERO, FAULT_LOOP_CAP, LOOP_CAP, ExecFault

log = logging.getLogger(__name__)

_B = ValueType.BOOL
_F = ValueType.FLOAT64


def _idiv(a, b, block):
    if b == 0:
        raise ExecFault(FAULT_DIV_ZERO, block)
    return wrap_int(int_div(int(a), int(b)), ValueType.INT32)


def _fdiv(a, b):
    return float_div(float(a), float(b))


def _loop_cap(block):
    raise ExecFault(FAULT_LOOP_CAP, block)


_HELPERS = {
    "_idiv": _idiv,
    "_fdiv": _fdiv,
    "_loop_cap": _loop_cap,
    "_convert": convert,
    "_Fault": ExecFault,
    "_inf": math.inf,
    "_nan": math.nan,
    "_I8": ValueType.INT8,
    "_I16": ValueType.INT16,
    "_I32": ValueType.INT32,
}
_TYPE_HELPER = {ValueType.INT8: "_I8", ValueType.INT16: "_I16", ValueType.INT32: "_I32"}


def _lit(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        if v != v:
            return "_nan"
        if v in (math.inf, -math.inf):
            return "_inf" if v > 0 else "(-_inf)"
    text = repr(v)
    return f"({text})" if text.startswith("-") else text


def _wrap(code: str, ty: ValueType) -> str:
    half = 1 << (ty.bits - 1)
    mask = (1 << ty.bits) - 1
    return f"((({code}) + {half}) & {mask}) - {half}"


def conv(code: str, src: ValueType, dst: ValueType) -> str:
    """Source for converting a value of static type ``src`` to ``dst``."""
    if src is dst:
        return code
    if dst is _B:
        return f"({code} != 0)"
    if dst is _F:
        return f"float({code})"
    if src is _F:
        return f"_convert({code}, {_TYPE_HELPER[dst]})"
    if src is _B:
        return f"int({code})"
    if src.bits <= dst.bits:
        return code
    return f"({_wrap(code, dst)})"


def zero_lit(ty: ValueType) -> str:
    if ty is _B:
        return "False"
    return "0.0" if ty.is_float else "0"


class _Gen:
    def __init__(self, program: Program, record_outputs: bool):
        self.prog = program
        self.record_outputs = record_outputs
        self.lines: list[str] = []
        self.tmp = 0
        self.decisions: set = set()
        self.nonleaf: set = set()

    def emit(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    def fresh(self, prefix: str) -> str:
        self.tmp += 1
        return f"{prefix}{self.tmp}"

    # expressions -> (code, type)

    def expr(self, e, lb, names: dict, types: dict):
        ex = lambda x: self.expr(x, lb, names, types)  # noqa: E731
        if isinstance(e, ast.Var):
            return names[e.name], types[e.name]
        if isinstance(e, ast.Num):
            return _lit(e.value), e.type
        if isinstance(e, ast.BoolLit):
            return _lit(e.value), _B
        if isinstance(e, ast.Binary):
            lc, lt = ex(e.left)
            rc, rt = ex(e.right)
            if e.op in ast.RELATIONAL:
                return f"({lc} {e.op} {rc})", _B
            if lt is _F or rt is _F:
                if e.op == "/":
                    return f"_fdiv({lc}, {rc})", _F
                return f"({lc} {e.op} {rc})", _F
            if e.op == "/":
                return f"_idiv({lc}, {rc}, {lb.index})", ValueType.INT32
            return f"({_wrap(f'{lc} {e.op} {rc}', ValueType.INT32)})", ValueType.INT32
        if isinstance(e, ast.Logical):
            lc, lt = ex(e.left)
            rc, rt = ex(e.right)
            lc = conv(lc, lt, _B)
            rc = conv(rc, rt, _B)
            op = "and" if e.op == "&&" else "or"
            return f"({lc} {op} {rc})", _B
        if isinstance(e, ast.Unary):
            c, t = ex(e.operand)
            if e.op == "!":
                return f"(not {c})", _B
            if t is _F:
                return f"(-{c})", _F
            return f"({_wrap('-' + c, ValueType.INT32)})", ValueType.INT32
        if isinstance(e, ast.IncDec):
            name = names[e.name]
            ty = types[e.name]
            if ty is _F:
                new = f"{name} + {float(e.delta)!r}"
            else:
                new = _wrap(f"{name} + {e.delta}", ty)
            return f"({name}, ({name} := {new}))[0]", ty
        if isinstance(e, ast.Sat):
            c, t = ex(e.operand)
            v = self.fresh("_t")
            lo, hi = _lit(e.lo), _lit(e.hi)
            return f"({lo} if ({v} := {c}) < {lo} else ({hi} if {v} > {hi} else {v}))", t
        if isinstance(e, ast.Cast):
            c, t = ex(e.operand)
            return conv(c, t, e.type), e.type
        if isinstance(e, ast.Record):
            c, _ = ex(e.operand)
            w = f"_w{e.dec}"
            t_bits = (1 << e.cond) | (1 << (64 + e.cond))
            f_bits = 1 << (64 + e.cond)
            return f"((({w} := {w} | {t_bits}) > 0) if {c} else (({w} := {w} | {f_bits}) < 0))", _B
        if isinstance(e, ast.DecisionRoot):
            rec = e.operand
            assert isinstance(rec, ast.Record) and rec.cond == 0 and rec.dec == e.dec
            d = e.dec
            self.decisions.add(d)
            inner, _ = ex(rec.operand)
            t_bits = 1 | (1 << 64)
            f_bits = 1 << 64
            add = f"_E{d}a"
            if any(isinstance(x, ast.Record) and x.dec == d for x in ast.walk_expr(rec.operand)):
                self.nonleaf.add(d)
                w = f"_w{d}"
                return (
                    f"(({add}({w} | {t_bits}) is None) if (({w} := 0) or {inner}) "
                    f"else ({add}({w} | {f_bits}) is not None))",
                    _B,
                )
            return f"(({add}({t_bits}) is None) if {inner} else ({add}({f_bits}) is not None))", _B
        raise TypeError(f"cannot compile {e!r}")

    # statements

    def stmts(self, stmts, lb, names, types, indent: int) -> None:
        if not stmts:
            self.emit(indent, "pass")
            return
        for s in stmts:
            if isinstance(s, ast.Assign):
                c, t = self.expr(s.value, lb, names, types)
                self.emit(indent, f"{names[s.name]} = {conv(c, t, types[s.name])}")
            elif isinstance(s, ast.Decl):
                if s.init is None:
                    self.emit(indent, f"{names[s.name]} = {zero_lit(s.type)}")
                else:
                    c, t = self.expr(s.init, lb, names, types)
                    self.emit(indent, f"{names[s.name]} = {conv(c, t, s.type)}")
            elif isinstance(s, ast.ExprStmt):
                c, _ = self.expr(s.expr, lb, names, types)
                self.emit(indent, c)
            elif isinstance(s, ast.If):
                c, _ = self.expr(s.cond, lb, names, types)
                self.emit(indent, f"if {c}:")
                self.stmts(s.then, lb, names, types, indent + 1)
                if s.orelse:
                    self.emit(indent, "else:")
                    self.stmts(s.orelse, lb, names, types, indent + 1)
            elif isinstance(s, ast.While):
                counter = self.fresh("_c")
                c, _ = self.expr(s.cond, lb, names, types)
                self.emit(indent, f"{counter} = 0")
                self.emit(indent, f"while {c}:")
                self.emit(indent + 1, f"{counter} += 1")
                self.emit(indent + 1, f"if {counter} > {LOOP_CAP}:")
                self.emit(indent + 2, f"_loop_cap({lb.index})")
                self.stmts(s.body, lb, names, types, indent + 1)
            else:
                raise TypeError(f"cannot compile {s!r}")

    # whole program

    def port_decode(self, e: LayoutEntry, start: int) -> str:
        sl = f"_vals[{start}:{start + e.count}]"
        ty = e.value_type
        if ty is _B:
            return f"[_v != 0 for _v in {sl}]"
        if e.range is None:
            return sl
        lo, hi = (_lit(x) for x in range_of(e))
        return f"[({lo} if not (_v >= {lo}) else ({hi} if _v > {hi} else _v)) for _v in {sl}]"

    def generate(self) -> str:
        prog = self.prog
        layout = prog.layout
        ro = self.record_outputs
        body: list[str] = []
        self.lines = body
        self.emit(1, "_vals = _unpack(data)")
        pos = 0
        port_var = {}
        for i, e in enumerate(layout.entries):
            v = f"_p{i}"
            port_var[e.port_id] = (v, e)
            self.emit(1, f"{v} = {self.port_decode(e, pos)}")
            pos += e.count

        def read(src) -> tuple[str, ValueType]:
            kind = src[0]
            if kind == "port":
                v, e = port_var[src[1]]
                lane = src[2]
                if e.is_signal:
                    idx = "step" if e.width == 1 else f"step * {e.width} + {lane}"
                else:
                    idx = str(lane)
                return f"{v}[{idx}]", e.value_type
            if kind == "default":
                return _lit(src[1]), _literal_type(src[1])
            return wire_name[src], prog.wire_types[src]

        wire_name = {}
        for dl in prog.delays:
            wire_name[("block", dl.id, 0)] = f"_d{dl.index}"
        block_names = {}
        for lb in prog.blocks:
            names = {}
            for n, _, _ in lb.inputs:
                names[n] = f"b{lb.index}_{n}"
            for n, _ in lb.outputs:
                names[n] = f"b{lb.index}_{n}"
            for n, _, _ in lb.state:
                names[n] = f"b{lb.index}_{n}"
            for n, _ in lb.locals:
                names[n] = f"b{lb.index}_{n}"
            block_names[lb.id] = names
            for j, (n, _) in enumerate(lb.outputs):
                wire_name[("block", lb.id, j)] = names[n]

        state_names = []
        for lb in prog.blocks:
            for n, t, init in lb.state:
                name = block_names[lb.id][n]
                self.emit(1, f"{name} = {_lit(convert(init, t))}")
                state_names.append(name)
        for dl in prog.delays:
            self.emit(1, f"_d{dl.index} = {_lit(convert(dl.init, dl.type))}")
            state_names.append(f"_d{dl.index}")
        decl_at = len(body)
        out_ports = prog.model.output_ports
        if ro:
            for k, p in enumerate(out_ports):
                self.emit(1, f"_o{k} = []")
            self.emit(1, "_states = []")
        self.emit(1, "_fault = None")
        self.emit(1, "step = 0")
        self.emit(1, "try:")
        self.emit(2, f"for step in range({layout.sample_count}):")
        ind = 3
        emitted_any = False
        for lb in prog.blocks:
            names = block_names[lb.id]
            types = lb.env()
            self.emit(ind, f"# {lb.kind} {lb.id}")
            for n, ty, src in lb.inputs:
                c, t = read(src)
                self.emit(ind, f"{names[n]} = {conv(c, t, ty)}")
            for n, ty in lb.outputs:
                self.emit(ind, f"{names[n]} = {zero_lit(ty)}")
            for n, ty in lb.locals:
                self.emit(ind, f"{names[n]} = {zero_lit(ty)}")
            self.stmts(lb.body, lb, names, types, ind)
            emitted_any = True
        if ro:
            for k, p in enumerate(out_ports):
                lanes = []
                for pid, lane, ty, src in prog.outputs:
                    if pid == p.id:
                        c, t = read(src)
                        lanes.append(conv(c, t, ty))
                if p.width == 1:
                    self.emit(ind, f"_o{k}.append({lanes[0]})")
                else:
                    self.emit(ind, f"_o{k}.append(({', '.join(lanes)},))")
        if prog.delays:
            news = []
            for dl in prog.delays:
                c, t = read(dl.source)
                news.append(conv(c, t, dl.type))
            targets = ", ".join(f"_d{dl.index}" for dl in prog.delays)
            self.emit(ind, f"{targets}, = ({', '.join(news)},)")
            emitted_any = True
        if ro:
            snap = ", ".join(state_names)
            self.emit(ind, f"_states.append(({snap}{',' if state_names else ''}))")
            emitted_any = True
        if not emitted_any:
            self.emit(ind, "pass")
        self.emit(1, "except _Fault as _f:")
        self.emit(2, "_fault = (_f.kind, step, _f.block)")
        decisions = sorted(self.decisions)
        pairs = ", ".join(f"({d}, _E{d})" for d in decisions)
        self.emit(1, f"_ev = {{_d: _s for _d, _s in ({pairs}{',' if decisions else ''}) if _s}}")
        if ro:
            outs = ", ".join(f"{p.id!r}: _o{k}" for k, p in enumerate(out_ports))
            self.emit(1, f"return {{{outs}}}, _states, _ev, _fault")
        else:
            self.emit(1, "return None, None, _ev, _fault")

        pre = []
        for d in decisions:
            pre.append(f"    _E{d} = set()")
            pre.append(f"    _E{d}a = _E{d}.add")
            if d in self.nonleaf:
                pre.append(f"    _w{d} = 0")
        body[decl_at:decl_at] = pre
        return "def run(data):\n" + "\n".join(body) + "\n"


def _literal_type(v) -> ValueType:
    if isinstance(v, bool):
        return _B
    return _F if isinstance(v, float) else ValueType.INT32


class CompiledModel:
    """A program compiled to a Python function ``run(data)``.

    ``run`` returns (outputs | None, states | None, evaluations, fault) with
    fault = (kind, step, block index) or None.
    """

    def __init__(self, program: Program, record_outputs: bool = True):
        self.program = program
        gen = _Gen(program, record_outputs)
        self.source = gen.generate()
        fmt = program.layout.struct_format
        namespace = dict(_HELPERS)
        namespace["_unpack"] = struct.Struct(fmt).unpack
        code = compile(self.source, f"<model {program.model.name}>", "exec")
        exec(code, namespace)  # noqa: S102 - generated from a validated IR
        self.run = namespace["run"]
        log.debug("compiled %s: %d lines", program.model.name, self.source.count("\n"))


def compile_program(program: Program, record_outputs: bool = True) -> CompiledModel:
    return CompiledModel(program, record_outputs)

