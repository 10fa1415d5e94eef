"""Parser for the textual model format.

The format is line oriented::

    model ondlc samples=20
    port u in signal int32 range 0 20
    port Tset in const int32 range 5 5 candidates 5
    port y out signal bool
    block ctl Script in{u:int32,Tset:int32} out{y:bool} state{counter:int32=0} body{
        if (u == 10) { counter = counter + 1; } else { counter = 0; }
        y = counter >= Tset;
    }
    link u.0 -> ctl.0

A logical line continues while braces are open, so script bodies may span
several physical lines.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import ast
from .model import (
    BLOCK_KINDS,
    RELOP_NAMES,
    Block,
    Diagnostic,
    Link,
    ModelError,
    ModelIR,
    PortDecl,
)
from .types import TYPE_NAMES, ValueType, parse_type

KEYWORDS = {"if", "else", "while", "true", "false"} | set(TYPE_NAMES)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|&&|\|\||==|!=|<=|>=|->|[-+*/<>=!(){};,.:])
    """,
    re.VERBOSE,
)

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$|^[+-]?inf$")


@dataclass
class Token:
    kind: str
    text: str
    offset: int


class _Source:
    """Maps offsets in the original text to (line, column)."""

    def __init__(self, text: str):
        self.text = text
        self.clean = text
        self.starts = [0]
        for m in re.finditer("\n", text):
            self.starts.append(m.end())

    def pos(self, offset: int) -> tuple[int, int]:
        lo, hi = 0, len(self.starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self.starts[lo] + 1

    def error(self, offset: int, kind: str, message: str) -> ModelError:
        line, col = self.pos(offset)
        return ModelError(Diagnostic(line, col, kind, message))


def tokenize(src: _Source, start: int, end: int) -> list[Token]:
    text = src.clean
    out = []
    i = start
    while i < end:
        m = _TOKEN_RE.match(text, i, end)
        if not m:
            raise src.error(i, "syntax", f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), i))
        i = m.end()
    out.append(Token("eof", "", end))
    return out


class _StmtParser:
    """Recursive-descent parser for script bodies (C-like subset)."""

    def __init__(self, src: _Source, tokens: list[Token]):
        self.src = src
        self.toks = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "ident") and t.text == text

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind not in ("op", "ident"):
            found = t.text or "end of input"
            raise self.src.error(t.offset, "syntax", f"expected {text!r}, found {found!r}")
        return self.next()

    def fail(self, msg: str):
        raise self.src.error(self.peek().offset, "syntax", msg)

    # statements

    def parse_body(self) -> tuple:
        stmts = []
        while self.peek().kind != "eof":
            stmts.append(self.statement())
        return tuple(stmts)

    def block(self) -> tuple:
        if self.at("{"):
            self.next()
            stmts = []
            while not self.at("}"):
                if self.peek().kind == "eof":
                    self.fail("unterminated block")
                stmts.append(self.statement())
            self.next()
            return tuple(stmts)
        return (self.statement(),)

    def statement(self):
        t = self.peek()
        if t.kind == "ident" and t.text == "if":
            self.next()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.block()
            orelse = ()
            if self.at("else"):
                self.next()
                orelse = self.block()
            return ast.If(cond, then, orelse)
        if t.kind == "ident" and t.text == "while":
            self.next()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return ast.While(cond, self.block())
        if t.kind == "ident" and t.text in TYPE_NAMES:
            self.next()
            name = self.ident()
            init = None
            if self.at("="):
                self.next()
                init = self.expression()
            self.expect(";")
            return ast.Decl(TYPE_NAMES[t.text], name, init)
        if t.kind == "op" and t.text == "{":
            self.fail("nested blocks are only allowed after if/else/while")
        if t.kind == "ident" and self.peek(1).text == "=" and self.peek(1).kind == "op":
            name = self.ident()
            self.next()
            value = self.expression()
            self.expect(";")
            return ast.Assign(name, value)
        e = self.expression()
        self.expect(";")
        return ast.ExprStmt(e)

    def ident(self) -> str:
        t = self.peek()
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(f"expected identifier, found {t.text or 'end of input'!r}")
        return self.next().text

    # expressions, lowest precedence first

    def expression(self):
        return self.logic_or()

    def logic_or(self):
        e = self.logic_and()
        while self.at("||"):
            self.next()
            e = ast.Logical("||", e, self.logic_and())
        return e

    def logic_and(self):
        e = self.equality()
        while self.at("&&"):
            self.next()
            e = ast.Logical("&&", e, self.equality())
        return e

    def equality(self):
        e = self.relational()
        while self.peek().kind == "op" and self.peek().text in ("==", "!="):
            op = self.next().text
            e = ast.Binary(op, e, self.relational())
        return e

    def relational(self):
        e = self.additive()
        while self.peek().kind == "op" and self.peek().text in ("<", "<=", ">", ">="):
            op = self.next().text
            e = ast.Binary(op, e, self.additive())
        return e

    def additive(self):
        e = self.multiplicative()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.next().text
            e = ast.Binary(op, e, self.multiplicative())
        return e

    def multiplicative(self):
        e = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.next().text
            e = ast.Binary(op, e, self.unary())
        return e

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in ("-", "!"):
            self.next()
            return ast.Unary(t.text, self.unary())
        return self.postfix()

    def postfix(self):
        e = self.primary()
        if self.peek().kind == "op" and self.peek().text in ("++", "--"):
            op = self.next()
            if not isinstance(e, ast.Var):
                raise self.src.error(op.offset, "syntax", f"{op.text} needs a variable operand")
            return ast.IncDec(e.name, 1 if op.text == "++" else -1)
        return e

    def primary(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            return _num_literal(t.text)
        if t.kind == "ident":
            if t.text in ("true", "false"):
                self.next()
                return ast.BoolLit(t.text == "true")
            return ast.Var(self.ident())
        if t.kind == "op" and t.text == "(":
            self.next()
            e = self.expression()
            self.expect(")")
            return e
        self.fail(f"unexpected {t.text or 'end of input'!r} in expression")


def _num_literal(text: str) -> ast.Num:
    if _INT_RE.match(text):
        return ast.Num(int(text), ValueType.INT32)
    return ast.Num(float(text), ValueType.FLOAT64)


def parse_number(text: str):
    text = text.strip()
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    raise ValueError(f"not a number: {text!r}")


def parse_expression(text: str):
    """Parse a standalone script expression (used by tests and tooling)."""
    src = _Source(text)
    p = _StmtParser(src, tokenize(src, 0, len(text)))
    e = p.expression()
    if p.peek().kind != "eof":
        p.fail("trailing input after expression")
    return e


def parse_statements(text: str) -> tuple:
    src = _Source(text)
    return _StmtParser(src, tokenize(src, 0, len(text))).parse_body()


# ---------------------------------------------------------------------------
# top level


def _logical_lines(src: _Source):
    """Yield (offset, text) for each logical line, comments blanked out."""
    text = src.text
    # blank comments while keeping offsets stable
    chars = list(text)
    i = 0
    while i < len(chars):
        if chars[i] == "#":
            while i < len(chars) and chars[i] != "\n":
                chars[i] = " "
                i += 1
        i += 1
    clean = "".join(chars)
    src.clean = clean
    depth = 0
    start = None
    for i, ch in enumerate(clean):
        if start is None:
            if ch.isspace():
                continue
            start = i
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise src.error(i, "syntax", "unbalanced '}'")
        elif ch == "\n" and depth == 0:
            yield start, clean[start:i]
            start = None
    if depth > 0:
        raise src.error(start, "syntax", "unterminated '{'")
    if start is not None:
        yield start, clean[start:]


def _section(src: _Source, line: str, base: int, name: str):
    """Locate ``name{...}`` in a block line; returns (inner_start, inner_end) offsets."""
    m = re.search(r"(?<![A-Za-z0-9_])" + name + r"\s*\{", line)
    if not m:
        return None
    depth = 0
    for j in range(m.end() - 1, len(line)):
        if line[j] == "{":
            depth += 1
        elif line[j] == "}":
            depth -= 1
            if depth == 0:
                return base + m.end(), base + j
    raise src.error(base + m.start(), "syntax", f"unterminated {name}{{")


def _parse_type_width(src, tok: str, offset: int) -> tuple[ValueType, int]:
    m = re.fullmatch(r"([a-z0-9]+)(?:x(\d+))?", tok)
    if not m or m.group(1) not in TYPE_NAMES:
        raise src.error(offset, "syntax", f"bad port type {tok!r}")
    width = int(m.group(2)) if m.group(2) else 1
    return TYPE_NAMES[m.group(1)], width


def _split_words(line: str, base: int):
    return [(m.group(), base + m.start()) for m in re.finditer(r"\S+", line)]


def _parse_port(src: _Source, words) -> PortDecl:
    if len(words) < 5:
        raise src.error(words[0][1], "syntax", "port needs: port <id> in|out signal|const <type>")
    _, (pid, _), (direction, doff), (kind, koff), (tyw, toff) = words[:5]
    if direction not in ("in", "out"):
        raise src.error(doff, "syntax", f"port direction must be in|out, got {direction!r}")
    if kind not in ("signal", "const"):
        raise src.error(koff, "syntax", f"port kind must be signal|const, got {kind!r}")
    vt, width = _parse_type_width(src, tyw, toff)
    rng = None
    cands = None
    rest = words[5:]
    i = 0
    while i < len(rest):
        w, off = rest[i]
        if w == "range":
            try:
                lo = parse_number(rest[i + 1][0])
                hi = parse_number(rest[i + 2][0])
            except (ValueError, IndexError):
                raise src.error(off, "syntax", "range needs two numeric bounds") from None
            rng = (lo, hi)
            i += 3
        elif w == "candidates":
            if i + 1 >= len(rest):
                raise src.error(off, "syntax", "candidates needs a value list")
            try:
                cands = tuple(parse_number(v) for v in rest[i + 1][0].split(",") if v)
            except ValueError:
                raise src.error(rest[i + 1][1], "syntax", "bad candidate value") from None
            i += 2
        else:
            raise src.error(off, "syntax", f"unexpected {w!r} in port declaration")
    return PortDecl(pid, direction, kind, vt, width, rng, cands)


_KIND_PARAMS = {
    "Constant": {"value", "type"},
    "Add": {"signs", "type"},
    "Gain": {"k", "type"},
    "UnitDelay": {"init", "type"},
    "RelationalOp": {"op"},
    "LogicOp": {"op", "inputs"},
    "Switch": {"criteria", "threshold"},
    "Saturate": {"lo", "hi"},
}


def _param_value(kind: str, key: str, raw: str):
    raw = raw.strip()
    if key == "type":
        return parse_type(raw)
    if key == "op" and kind == "RelationalOp":
        op = RELOP_NAMES.get(raw, raw)
        if op not in ast.RELATIONAL:
            raise ValueError(f"bad relational operator {raw!r}")
        return op
    if key == "op" and kind == "LogicOp":
        if raw.upper() not in ("AND", "OR", "NOT"):
            raise ValueError(f"bad logic operator {raw!r}")
        return raw.upper()
    if key == "signs":
        if not raw or set(raw) - {"+", "-"}:
            raise ValueError(f"signs must be a string of + and -, got {raw!r}")
        return raw
    if key == "criteria":
        crit = {"~=": "!="}.get(raw, raw)
        if crit not in (">=", ">", "!="):
            raise ValueError(f"bad switch criteria {raw!r}")
        return crit
    if key == "inputs":
        return int(raw)
    return parse_number(raw)


def _parse_params(src: _Source, kind: str, inner: str, base: int) -> dict:
    params = {}
    pos = 0
    for part in inner.split(","):
        off = base + pos
        pos += len(part) + 1
        if not part.strip():
            continue
        if "=" not in part:
            raise src.error(off, "syntax", f"parameter {part.strip()!r} needs key=value")
        key, raw = part.split("=", 1)
        key = key.strip()
        if key not in _KIND_PARAMS[kind]:
            raise src.error(off, "syntax", f"unknown parameter {key!r} for {kind}")
        try:
            params[key] = _param_value(kind, key, raw)
        except ValueError as exc:
            raise src.error(off, "syntax", str(exc)) from None
    return params


def _parse_decls(src, inner: str, base: int, with_value: bool, required_value: bool):
    out = []
    pos = 0
    for part in inner.split(","):
        off = base + pos + (len(part) - len(part.lstrip()))
        pos += len(part) + 1
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"([A-Za-z_]\w*)\s*:\s*([a-z0-9]+)\s*(?:=\s*(\S+))?", part)
        if not m or m.group(2) not in TYPE_NAMES:
            raise src.error(off, "syntax", f"bad declaration {part!r}")
        name, ty, val = m.group(1), TYPE_NAMES[m.group(2)], m.group(3)
        if name in KEYWORDS:
            raise src.error(off, "syntax", f"{name!r} is a reserved word")
        if val is not None and not with_value:
            raise src.error(off, "syntax", f"unexpected initializer in {part!r}")
        if val is None and required_value:
            val = "0"
        if val is not None:
            if val in ("true", "false"):
                v = val == "true"
            else:
                try:
                    v = parse_number(val)
                except ValueError:
                    raise src.error(off, "syntax", f"bad value {val!r}") from None
            out.append((name, ty, v))
        else:
            out.append((name, ty) if not with_value else (name, ty, None))
    return tuple(out)


def _parse_block(src: _Source, line: str, base: int, words, positions) -> Block:
    if len(words) < 3:
        raise src.error(words[0][1], "syntax", "block needs: block <id> <Kind>")
    bid, kind, koff = words[1][0], words[2][0], words[2][1]
    if kind not in BLOCK_KINDS:
        raise src.error(koff, "unknown-block-kind", f"unknown block kind {kind!r}")
    if kind != "Script":
        rest = line[koff - base + len(kind):].strip()
        params = {}
        if rest:
            if not (rest.startswith("{") and rest.endswith("}")):
                raise src.error(koff + len(kind), "syntax", "block parameters must be {key=value,...}")
            inner_start = line.index("{", koff - base) + 1
            inner_end = line.rindex("}")
            params = _parse_params(src, kind, line[inner_start:inner_end], base + inner_start)
        return Block(bid, kind, params)

    sections = {}
    for name in ("in", "out", "state", "body"):
        sections[name] = _section(src, line, base, name)
    if sections["body"] is None:
        raise src.error(koff, "syntax", "Script block needs body{...}")

    def inner(name):
        s = sections[name]
        return (src.clean[s[0]:s[1]], s[0]) if s else ("", 0)

    ins = _parse_decls(src, *inner("in"), with_value=True, required_value=False)
    outs = _parse_decls(src, *inner("out"), with_value=False, required_value=False)
    state = _parse_decls(src, *inner("state"), with_value=True, required_value=True)
    b0, b1 = sections["body"]
    body = _StmtParser(src, tokenize(src, b0, b1)).parse_body()
    positions[("body", bid)] = src.pos(b0)
    return Block(bid, "Script", {}, ins, outs, state, body)


def _parse_endpoint(src, text: str, off: int) -> tuple[str, int]:
    m = re.fullmatch(r"([A-Za-z_]\w*)\.(\d+)", text)
    if not m:
        raise src.error(off, "syntax", f"bad link endpoint {text!r}; expected <id>.<index>")
    return m.group(1), int(m.group(2))


def parse_model(text: str, validate: bool = True) -> ModelIR:
    """Parse model text; raises ModelError carrying line/column diagnostics."""
    from .validate import validate_model

    src = _Source(text)
    name = None
    samples = None
    ports, blocks, links = [], [], []
    positions: dict = {}
    for base, line in _logical_lines(src):
        words = _split_words(line, base)
        if not words:
            continue
        head, hoff = words[0]
        if head == "model":
            if name is not None:
                raise src.error(hoff, "syntax", "duplicate model header")
            if len(words) != 3 or not re.fullmatch(r"samples=\d+", words[2][0]):
                raise src.error(hoff, "syntax", "header must be: model <name> samples=<N>")
            name = words[1][0]
            samples = int(words[2][0].split("=")[1])
            positions["model"] = src.pos(hoff)
        elif name is None:
            raise src.error(hoff, "syntax", "expected 'model <name> samples=<N>' header first")
        elif head == "port":
            p = _parse_port(src, words)
            positions[("port", p.id)] = src.pos(hoff)
            ports.append(p)
        elif head == "block":
            b = _parse_block(src, line, base, words, positions)
            positions[("block", b.id)] = src.pos(hoff)
            blocks.append(b)
        elif head == "link":
            if len(words) != 4 or words[2][0] != "->":
                raise src.error(hoff, "syntax", "link must be: link <src>.<i> -> <dst>.<j>")
            s, si = _parse_endpoint(src, *words[1])
            d, di = _parse_endpoint(src, *words[3])
            positions[("link", len(links))] = src.pos(hoff)
            links.append(Link(s, si, d, di))
        else:
            raise src.error(hoff, "syntax", f"unknown statement {head!r}")
    if name is None:
        raise ModelError(Diagnostic(1, 1, "syntax", "missing model header"))
    model = ModelIR(name, samples, tuple(ports), tuple(blocks), tuple(links))
    if validate:
        validate_model(model, positions)
    return model
