"""Structural and script-level checks for a parsed model."""

from __future__ import annotations

from . import ast
from .model import Diagnostic, ModelError, ModelIR
from .types import ValueType


def _pos(positions, key):
    if positions and key in positions:
        return positions[key]
    return (0, 0)


def validate_model(model: ModelIR, positions: dict | None = None) -> None:
    """Raise ModelError listing every problem found; return None if valid."""
    diags: list[Diagnostic] = []

    def err(key, kind, msg):
        line, col = _pos(positions, key)
        diags.append(Diagnostic(line, col, kind, msg))

    if model.sample_count < 1:
        err("model", "invalid", "samples must be positive")

    nodes = {}
    for p in model.ports:
        if p.id in nodes:
            err(("port", p.id), "duplicate-id", f"duplicate id {p.id!r}")
        nodes[p.id] = p
        if p.width < 1:
            err(("port", p.id), "invalid", f"port {p.id!r} width must be positive")
        if p.range is not None:
            lo, hi = p.range
            if lo > hi:
                err(("port", p.id), "invalid", f"port {p.id!r} range min > max")
            elif p.candidates:
                bad = [c for c in p.candidates if not lo <= c <= hi]
                if bad:
                    err(("port", p.id), "invalid", f"port {p.id!r} candidates {bad} outside range")
        if p.candidates is not None and len(p.candidates) == 0:
            err(("port", p.id), "invalid", f"port {p.id!r} has an empty candidate list")
    for b in model.blocks:
        if b.id in nodes:
            err(("block", b.id), "duplicate-id", f"duplicate id {b.id!r}")
        nodes[b.id] = b
        _check_params(b, lambda kind, msg, b=b: err(("block", b.id), kind, msg))

    # links
    drivers: dict = {}
    for i, ln in enumerate(model.links):
        key = ("link", i)
        src = nodes.get(ln.src)
        dst = nodes.get(ln.dst)
        if src is None:
            err(key, "dangling-link", f"link source {ln.src!r} does not exist")
            continue
        if dst is None:
            err(key, "dangling-link", f"link destination {ln.dst!r} does not exist")
            continue
        n_src = src.width if _is_port(src) else src.n_outputs
        if _is_port(src) and not src.is_input:
            err(key, "dangling-link", f"output port {ln.src!r} cannot drive a link")
            continue
        if ln.src_idx >= n_src:
            err(key, "dangling-link", f"{ln.src}.{ln.src_idx}: no such output")
            continue
        if _is_port(dst) and dst.is_input:
            err(key, "dangling-link", f"input port {ln.dst!r} cannot receive a link")
            continue
        n_dst = dst.width if _is_port(dst) else dst.n_inputs
        if ln.dst_idx >= n_dst:
            err(key, "dangling-link", f"{ln.dst}.{ln.dst_idx}: no such input")
            continue
        slot = (ln.dst, ln.dst_idx)
        if slot in drivers:
            err(key, "multiple-drivers", f"{ln.dst}.{ln.dst_idx} already driven")
        drivers[slot] = ln

    for b in model.blocks:
        for i in range(b.n_inputs):
            if (b.id, i) in drivers:
                continue
            if b.kind == "Script" and b.inputs[i][2] is not None:
                continue
            err(("block", b.id), "unconnected", f"input {b.id}.{i} has no incoming link")
    for p in model.output_ports:
        for i in range(p.width):
            if (p.id, i) not in drivers:
                err(("port", p.id), "unconnected", f"output port lane {p.id}.{i} has no incoming link")

    if not diags:
        cycle = find_algebraic_loop(model)
        if cycle:
            err(("block", cycle[0]), "algebraic-loop", "cycle without UnitDelay: " + " -> ".join(cycle))

    for b in model.blocks:
        if b.kind == "Script":
            for kind, msg in check_script(b):
                line, col = _pos(positions, ("body", b.id))
                diags.append(Diagnostic(line, col, kind, f"{b.id}: {msg}"))

    if diags:
        raise ModelError(diags)


def _is_port(node) -> bool:
    return hasattr(node, "direction")


def _check_params(b, err) -> None:
    p = b.params
    if b.kind == "Constant" and "value" not in p:
        err("invalid", "Constant needs value=")
    if b.kind == "Gain" and "k" not in p:
        err("invalid", "Gain needs k=")
    if b.kind == "Saturate":
        if "lo" not in p or "hi" not in p:
            err("invalid", "Saturate needs lo= and hi=")
        elif p["lo"] > p["hi"]:
            err("invalid", "Saturate lo > hi")
    if b.kind == "RelationalOp" and "op" not in p:
        err("invalid", "RelationalOp needs op=")
    if b.kind == "LogicOp":
        n = p.get("inputs", 2)
        if p.get("op", "AND") != "NOT" and n < 1:
            err("invalid", "LogicOp needs at least one input")
    if b.kind == "Script":
        names = [v[0] for v in b.inputs] + [v[0] for v in b.outputs] + [v[0] for v in b.state_vars]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            err("invalid", f"duplicate script variable names {sorted(dup)}")


def find_algebraic_loop(model: ModelIR) -> list | None:
    """Return a cycle of block ids not broken by a UnitDelay, or None."""
    blocks = {b.id: b for b in model.blocks}
    succ: dict = {bid: [] for bid in blocks}
    for ln in model.links:
        if ln.src in blocks and ln.dst in blocks and blocks[ln.dst].kind != "UnitDelay":
            succ[ln.src].append(ln.dst)
    color = dict.fromkeys(blocks, 0)
    stack_path: list = []

    def dfs(u):
        color[u] = 1
        stack_path.append(u)
        for v in succ[u]:
            if color[v] == 1:
                return stack_path[stack_path.index(v):] + [v]
            if color[v] == 0:
                found = dfs(v)
                if found:
                    return found
        stack_path.pop()
        color[u] = 2
        return None

    for bid in blocks:
        if color[bid] == 0:
            found = dfs(bid)
            if found:
                return found
    return None


def check_script(block) -> list[tuple[str, str]]:
    """Name resolution and assignment-target checks for a script body."""
    problems = []
    inputs = {v[0]: v[1] for v in block.inputs}
    writable = {v[0]: v[1] for v in block.outputs}
    writable.update({v[0]: v[1] for v in block.state_vars})
    locals_: dict = {}
    for s in ast.walk_stmts(block.body):
        if isinstance(s, ast.Decl):
            if s.name in inputs or s.name in writable or s.name in locals_:
                problems.append(("invalid", f"redeclaration of {s.name!r}"))
            locals_[s.name] = s.type
    known = {**inputs, **writable, **locals_}
    for s in ast.walk_stmts(block.body):
        if isinstance(s, ast.Assign):
            if s.name in inputs:
                problems.append(("invalid", f"cannot assign to input {s.name!r}"))
            elif s.name not in known:
                problems.append(("unresolved-identifier", f"unknown variable {s.name!r}"))
        for e in ast.stmt_exprs(s):
            for node in ast.walk_expr(e):
                if isinstance(node, ast.Var) and node.name not in known:
                    problems.append(("unresolved-identifier", f"unknown variable {node.name!r}"))
                if isinstance(node, ast.IncDec):
                    if node.name in inputs:
                        problems.append(("invalid", f"cannot modify input {node.name!r}"))
                    elif node.name not in known:
                        problems.append(("unresolved-identifier", f"unknown variable {node.name!r}"))
                    elif known[node.name] is ValueType.BOOL:
                        problems.append(("invalid", f"++/-- on bool variable {node.name!r}"))
    return problems
