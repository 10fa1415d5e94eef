"""Tree-walking reference interpreter.

Slow but direct: values carry their own Python type (bool, int, float) and
every operator follows the C-like rules in ``ir.types``.  It executes both
plain and instrumented programs, so it doubles as the oracle for the
compiled executor and for instrumentation transparency.
"""

from __future__ import annotations

from ..ir import ast
from ..ir.lower import Program
from ..ir.types import ValueType, convert, float_div, int_div, wrap_int
from .testcase import bind_inputs
from .trace import (
    FAULT_DIV_ZERO,
    FAULT_LOOP_CAP,
    LOOP_CAP,
    ExecFault,
    ExecutionTrace,
    Fault,
    cap_vectors,
    hits_for,
)

_I32 = ValueType.INT32
_M64 = (1 << 64) - 1


def zero_of(ty: ValueType):
    if ty is ValueType.BOOL:
        return False
    if ty.is_float:
        return 0.0
    return 0


def _arith(op: str, a, b, block: int):
    if isinstance(a, float) or isinstance(b, float):
        a, b = float(a), float(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return float_div(a, b)
    a, b = int(a), int(b)
    if op == "+":
        return wrap_int(a + b, _I32)
    if op == "-":
        return wrap_int(a - b, _I32)
    if op == "*":
        return wrap_int(a * b, _I32)
    if b == 0:
        raise ExecFault(FAULT_DIV_ZERO, block)
    return wrap_int(int_div(a, b), _I32)


_REL = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


class _BlockRun:
    """Evaluates one block body against its variable environment."""

    def __init__(self, interp: "Interpreter", index: int, types: dict, env: dict):
        self.interp = interp
        self.index = index
        self.types = types
        self.env = env

    def eval(self, e):
        if isinstance(e, ast.Var):
            return self.env[e.name]
        if isinstance(e, ast.Num):
            return e.value
        if isinstance(e, ast.BoolLit):
            return e.value
        if isinstance(e, ast.Binary):
            a = self.eval(e.left)
            b = self.eval(e.right)
            if e.op in _REL:
                return _REL[e.op](a, b)
            return _arith(e.op, a, b, self.index)
        if isinstance(e, ast.Logical):
            left = bool(self.eval(e.left))
            if e.op == "&&":
                return left and bool(self.eval(e.right))
            return left or bool(self.eval(e.right))
        if isinstance(e, ast.Unary):
            v = self.eval(e.operand)
            if e.op == "!":
                return not v
            if isinstance(v, float):
                return -v
            return wrap_int(-int(v), _I32)
        if isinstance(e, ast.IncDec):
            old = self.env[e.name]
            ty = self.types[e.name]
            self.env[e.name] = convert(old + e.delta, ty)
            return old
        if isinstance(e, ast.Sat):
            v = self.eval(e.operand)
            if v < e.lo:
                return e.lo
            if v > e.hi:
                return e.hi
            return v
        if isinstance(e, ast.Cast):
            return convert(self.eval(e.operand), e.type)
        if isinstance(e, ast.Record):
            res = bool(self.eval(e.operand))
            words = self.interp.words
            w = words[e.dec] | (1 << (64 + e.cond))
            if res:
                w |= 1 << e.cond
            words[e.dec] = w
            return res
        if isinstance(e, ast.DecisionRoot):
            interp = self.interp
            interp.words[e.dec] = 0
            v = self.eval(e.operand)
            w = interp.words.pop(e.dec)
            interp.evaluations.setdefault(e.dec, set()).add(w)
            if interp.step_vectors is not None:
                interp.step_vectors.append((e.dec, interp.step, w))
            return v
        raise TypeError(f"cannot evaluate {e!r}")

    def run(self, stmts) -> None:
        env = self.env
        for s in stmts:
            if isinstance(s, ast.Assign):
                env[s.name] = convert(self.eval(s.value), self.types[s.name])
            elif isinstance(s, ast.If):
                if self.eval(s.cond):
                    self.run(s.then)
                else:
                    self.run(s.orelse)
            elif isinstance(s, ast.While):
                count = 0
                while self.eval(s.cond):
                    count += 1
                    if count > LOOP_CAP:
                        raise ExecFault(FAULT_LOOP_CAP, self.index)
                    self.run(s.body)
            elif isinstance(s, ast.Decl):
                v = self.eval(s.init) if s.init is not None else zero_of(s.type)
                env[s.name] = convert(v, s.type)
            elif isinstance(s, ast.ExprStmt):
                self.eval(s.expr)
            else:
                raise TypeError(f"cannot execute {s!r}")


class Interpreter:
    def __init__(self, program: Program):
        self.program = program
        self.words: dict = {}
        self.evaluations: dict = {}
        self.step_vectors: list | None = None
        self.step = 0

    def run(self, data: bytes, step_vectors: bool = False) -> ExecutionTrace:
        prog = self.program
        layout = prog.layout
        streams = bind_inputs(data, layout)
        self.words = {}
        self.evaluations = {}
        self.step_vectors = [] if step_vectors else None

        wires: dict = {}
        scripts_state = {lb.id: {n: convert(v, t) for n, t, v in lb.state} for lb in prog.blocks}
        delay_state = {dl.id: convert(dl.init, dl.type) for dl in prog.delays}
        outputs = {p.id: [] for p in prog.model.output_ports}
        widths = {p.id: p.width for p in prog.model.output_ports}
        states = []
        envs_types = {lb.id: lb.env() for lb in prog.blocks}

        def read(src, step):
            kind = src[0]
            if kind == "port":
                v = streams[src[1]][step]
                return v[src[2]] if isinstance(v, tuple) else v
            if kind == "default":
                return src[1]
            return wires[src]

        fault = None
        for step in range(layout.sample_count):
            self.step = step
            for dl in prog.delays:
                wires[("block", dl.id, 0)] = delay_state[dl.id]
            try:
                for lb in prog.blocks:
                    env = {}
                    for name, ty, src in lb.inputs:
                        env[name] = convert(read(src, step), ty)
                    for name, ty in lb.outputs:
                        env[name] = zero_of(ty)
                    for name, ty in lb.locals:
                        env[name] = zero_of(ty)
                    env.update(scripts_state[lb.id])
                    _BlockRun(self, lb.index, envs_types[lb.id], env).run(lb.body)
                    for j, (name, _) in enumerate(lb.outputs):
                        wires[("block", lb.id, j)] = env[name]
                    for name in scripts_state[lb.id]:
                        scripts_state[lb.id][name] = env[name]
            except ExecFault as exc:
                fault = Fault(exc.kind, step, prog.unit_ids[exc.block])
                hits = hits_for(prog, step, exc.block)
                break
            row = {}
            for pid, lane, ty, src in prog.outputs:
                row.setdefault(pid, []).append(convert(read(src, step), ty))
            for pid, lanes in row.items():
                outputs[pid].append(lanes[0] if widths[pid] == 1 else tuple(lanes))
            for dl in prog.delays:
                delay_state[dl.id] = convert(read(dl.source, step), dl.type)
            snapshot = []
            for lb in prog.blocks:
                snapshot.extend(scripts_state[lb.id].values())
            snapshot.extend(delay_state[dl.id] for dl in prog.delays)
            states.append(tuple(snapshot))
        else:
            hits = hits_for(prog, None, None)

        return ExecutionTrace(
            outputs=outputs,
            states=states,
            evaluations=cap_vectors(self.evaluations),
            unit_hits=hits,
            fault=fault,
            step_vectors=self.step_vectors,
        )


def interpret(program: Program, data: bytes, step_vectors: bool = False) -> ExecutionTrace:
    return Interpreter(program).run(data, step_vectors)
