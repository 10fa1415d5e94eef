"""Symbolic values for bounded unrolling.

A runtime value is either concrete (bool, int, float) or one of:

* ``Lin``  - an affine form over input symbols, known not to overflow;
* ``Opq``  - an opaque operation tree, only evaluable once every symbol
  has a value (nonlinear arithmetic, wrapping, float-to-int casts ...);
* ``Cmp``  - a relational comparison, the only symbolic Boolean.

``evaluate`` replays the exact runtime semantics on a full assignment, so
constraints can always be checked concretely, whatever their shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..exec.interp import _REL, _arith
from ..ir.types import ValueType, convert, wrap_int

_I32 = ValueType.INT32

NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}


@dataclass(frozen=True)
class Symbol:
    index: int
    port: str
    element: int  # element index inside the port's layout entry
    type: ValueType
    lo: int | float
    hi: int | float
    step: int | None  # None for constant ports

    @property
    def is_float(self) -> bool:
        return self.type.is_float

    @property
    def default(self):
        """Value closest to zero inside the domain."""
        if self.lo <= 0 <= self.hi:
            return 0.0 if self.is_float else 0
        return self.lo if self.lo > 0 else self.hi


class Lin:
    __slots__ = ("terms", "const", "is_float")

    def __init__(self, terms: dict, const, is_float: bool):
        self.terms = {k: v for k, v in terms.items() if v != 0}
        self.const = const
        self.is_float = is_float

    def __repr__(self) -> str:
        parts = [f"{c}*s{k}" for k, c in sorted(self.terms.items())]
        return "Lin(" + " + ".join(parts + [repr(self.const)]) + ")"


class Opq:
    __slots__ = ("op", "args", "kind")

    def __init__(self, op: str, args: tuple, kind: str):
        self.op = op  # '+', '-', '*', '/', 'neg', 'conv', 'not'
        self.args = args
        self.kind = kind  # 'int' | 'float' | 'bool'

    def __repr__(self) -> str:
        return f"Opq({self.op}, {self.args!r})"


class Cmp:
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left, right):
        self.op = op
        self.left = left
        self.right = right

    def __repr__(self) -> str:
        return f"Cmp({self.left!r} {self.op} {self.right!r})"


SYMBOLIC = (Lin, Opq, Cmp)


def is_sym(v) -> bool:
    return isinstance(v, SYMBOLIC)


def kind_of(v) -> str:
    if isinstance(v, bool) or isinstance(v, Cmp):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, Lin):
        return "float" if v.is_float else "int"
    return v.kind


def symbols_of(v, out: set | None = None) -> set:
    out = set() if out is None else out
    if isinstance(v, Lin):
        out.update(v.terms)
    elif isinstance(v, Opq):
        for a in v.args:
            symbols_of(a, out)
    elif isinstance(v, Cmp):
        symbols_of(v.left, out)
        symbols_of(v.right, out)
    return out


def has_opaque(v) -> bool:
    if isinstance(v, Opq):
        return True
    if isinstance(v, Cmp):
        return has_opaque(v.left) or has_opaque(v.right)
    return False


def has_float(v) -> bool:
    if isinstance(v, float):
        return True
    if isinstance(v, Lin):
        return v.is_float
    if isinstance(v, Opq):
        return v.kind == "float" or any(has_float(a) for a in v.args)
    if isinstance(v, Cmp):
        return has_float(v.left) or has_float(v.right)
    return False


def evaluate(v, asg):
    """Concrete value of ``v`` under a full assignment (symbol index -> value).

    May raise ExecFault (integer division by zero inside an opaque term).
    """
    if isinstance(v, Lin):
        acc = v.const
        for k, c in v.terms.items():
            acc = acc + c * asg[k]
        return float(acc) if v.is_float else acc
    if isinstance(v, Cmp):
        return _REL[v.op](evaluate(v.left, asg), evaluate(v.right, asg))
    if isinstance(v, Opq):
        op = v.op
        if op == "conv":
            return convert(evaluate(v.args[1], asg), v.args[0])
        if op == "neg":
            x = evaluate(v.args[0], asg)
            return -x if isinstance(x, float) else wrap_int(-int(x), _I32)
        if op == "not":
            return not evaluate(v.args[0], asg)
        return _arith(op, evaluate(v.args[0], asg), evaluate(v.args[1], asg), -1)
    return v


class Algebra:
    """Symbolic arithmetic with overflow tracking against symbol domains."""

    def __init__(self, symbols: list):
        self.symbols = symbols

    # helpers

    def bounds(self, lin: Lin):
        lo = hi = lin.const
        for k, c in lin.terms.items():
            s = self.symbols[k]
            a, b = c * s.lo, c * s.hi
            if a > b:
                a, b = b, a
            lo = lo + a
            hi = hi + b
        return lo, hi

    def as_lin(self, v):
        """Affine view of ``v`` or None."""
        if isinstance(v, Lin):
            return v
        if isinstance(v, bool):
            return Lin({}, int(v), False)
        if isinstance(v, int):
            return Lin({}, v, False)
        if isinstance(v, float):
            if math.isfinite(v):
                return Lin({}, v, True)
            return None
        return None

    def _fits(self, lin: Lin, ty: ValueType = _I32) -> bool:
        lo, hi = self.bounds(lin)
        return ty.min <= lo and hi <= ty.max

    def _finish(self, lin: Lin, fallback):
        if not lin.terms:
            return float(lin.const) if lin.is_float else wrap_int(int(lin.const), _I32)
        if lin.is_float:
            lin.terms = {k: float(c) for k, c in lin.terms.items()}
            lin.const = float(lin.const)
            lo, hi = self.bounds(lin)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                return fallback()
            return lin
        if self._fits(lin):
            return lin
        return fallback()

    # operations

    def arith(self, op: str, a, b):
        if isinstance(a, Cmp):
            a = Opq("conv", (_I32, a), "int")
        if isinstance(b, Cmp):
            b = Opq("conv", (_I32, b), "int")
        is_float = kind_of(a) == "float" or kind_of(b) == "float"
        kind = "float" if is_float else "int"

        def opaque():
            return Opq(op, (a, b), kind)

        la, lb = self.as_lin(a), self.as_lin(b)
        if la is None or lb is None or op == "/":
            return opaque()
        if op in ("+", "-"):
            sign = 1 if op == "+" else -1
            terms = dict(la.terms)
            for k, c in lb.terms.items():
                terms[k] = terms.get(k, 0) + sign * c
            return self._finish(Lin(terms, la.const + sign * lb.const, is_float), opaque)
        # '*': linear only when one side is constant
        if la.terms and lb.terms:
            return opaque()
        if la.terms:
            lin, k = la, lb.const
        else:
            lin, k = lb, la.const
        return self._finish(Lin({s: c * k for s, c in lin.terms.items()}, lin.const * k, is_float), opaque)

    def neg(self, v):
        if isinstance(v, Cmp):
            v = Opq("conv", (_I32, v), "int")
        lin = self.as_lin(v)
        kind = kind_of(v)
        if lin is None:
            return Opq("neg", (v,), "float" if kind == "float" else "int")
        out = Lin({k: -c for k, c in lin.terms.items()}, -lin.const, lin.is_float)
        return self._finish(out, lambda: Opq("neg", (v,), "int"))

    def convert(self, v, ty: ValueType):
        if not is_sym(v):
            return convert(v, ty)
        if ty is ValueType.BOOL:
            return self.truth(v)
        kind = kind_of(v)
        if ty.is_float:
            if isinstance(v, Lin):
                return self._finish(Lin(dict(v.terms), v.const, True), lambda: Opq("conv", (ty, v), "float"))
            if kind == "float":
                return v
            return Opq("conv", (ty, v), "float")
        # integer destination
        if isinstance(v, Lin) and not v.is_float and self._fits(v, ty):
            return v
        if kind == "int" and ty is _I32 and isinstance(v, Opq):
            return v
        return Opq("conv", (ty, v), "int")

    def compare(self, op: str, a, b):
        if isinstance(a, Cmp) and not is_sym(b):
            a = Opq("conv", (_I32, a), "int")
        if isinstance(b, Cmp) and not is_sym(a):
            b = Opq("conv", (_I32, b), "int")
        return Cmp(op, a, b)

    def truth(self, v):
        """Symbolic Boolean meaning "v is nonzero"."""
        if isinstance(v, Cmp):
            return v
        return Cmp("!=", v, 0)
