"""Serialize a ModelIR back to the textual format (inverse of parse_model)."""

from __future__ import annotations

from . import ast
from .model import ModelIR
from .types import ValueType


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, ValueType):
        return v.value
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_expr(e) -> str:
    if isinstance(e, ast.Num):
        text = format_value(e.value)
        return f"({text})" if text.startswith("-") else text
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.Unary):
        return f"{e.op}{_wrap(e.operand)}"
    if isinstance(e, (ast.Binary, ast.Logical)):
        return f"{_wrap(e.left)} {e.op} {_wrap(e.right)}"
    if isinstance(e, ast.IncDec):
        return e.name + ("++" if e.delta > 0 else "--")
    if isinstance(e, ast.Record):
        return f"({format_expr(e.operand)} ? record(true, {e.cond}, {e.dec}) : record(false, {e.cond}, {e.dec}))"
    if isinstance(e, ast.DecisionRoot):
        return format_expr(e.operand)
    if isinstance(e, ast.Sat):
        return f"sat({format_expr(e.operand)}, {format_value(e.lo)}, {format_value(e.hi)})"
    if isinstance(e, ast.Cast):
        return f"({e.type.value}){_wrap(e.operand)}"
    raise TypeError(f"cannot format {e!r}")


def _wrap(e) -> str:
    text = format_expr(e)
    if isinstance(e, (ast.Binary, ast.Logical, ast.Unary)):
        return f"({text})"
    return text


def format_stmts(stmts, indent: int = 1) -> list[str]:
    pad = "    " * indent
    lines = []
    for s in stmts:
        if isinstance(s, ast.Decl):
            init = f" = {format_expr(s.init)}" if s.init is not None else ""
            lines.append(f"{pad}{s.type.value} {s.name}{init};")
        elif isinstance(s, ast.Assign):
            lines.append(f"{pad}{s.name} = {format_expr(s.value)};")
        elif isinstance(s, ast.ExprStmt):
            lines.append(f"{pad}{format_expr(s.expr)};")
        elif isinstance(s, ast.If):
            lines.append(f"{pad}if ({format_expr(s.cond)}) {{")
            lines.extend(format_stmts(s.then, indent + 1))
            if s.orelse:
                lines.append(f"{pad}}} else {{")
                lines.extend(format_stmts(s.orelse, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(s, ast.While):
            lines.append(f"{pad}while ({format_expr(s.cond)}) {{")
            lines.extend(format_stmts(s.body, indent + 1))
            lines.append(f"{pad}}}")
        else:
            raise TypeError(f"cannot format {s!r}")
    return lines


def _decls(items, with_value: bool) -> str:
    parts = []
    for item in items:
        name, ty = item[0], item[1]
        if with_value and len(item) > 2 and item[2] is not None:
            parts.append(f"{name}:{ty.value}={format_value(item[2])}")
        else:
            parts.append(f"{name}:{ty.value}")
    return ",".join(parts)


def print_model(model: ModelIR) -> str:
    out = [f"model {model.name} samples={model.sample_count}"]
    for p in model.ports:
        ty = p.value_type.value + (f"x{p.width}" if p.width != 1 else "")
        line = f"port {p.id} {p.direction} {p.kind} {ty}"
        if p.range is not None:
            line += f" range {format_value(p.range[0])} {format_value(p.range[1])}"
        if p.candidates is not None:
            line += " candidates " + ",".join(format_value(c) for c in p.candidates)
        out.append(line)
    for b in model.blocks:
        if b.kind == "Script":
            head = f"block {b.id} Script"
            if b.inputs:
                head += f" in{{{_decls(b.inputs, True)}}}"
            if b.outputs:
                head += f" out{{{_decls(b.outputs, False)}}}"
            if b.state_vars:
                head += f" state{{{_decls(b.state_vars, True)}}}"
            out.append(head + " body{")
            out.extend(format_stmts(b.body))
            out.append("}")
        else:
            params = ",".join(f"{k}={format_value(v)}" for k, v in b.params.items())
            out.append(f"block {b.id} {b.kind}" + (f" {{{params}}}" if params else ""))
    for ln in model.links:
        out.append(f"link {ln.src}.{ln.src_idx} -> {ln.dst}.{ln.dst_idx}")
    return "\n".join(out) + "\n"
