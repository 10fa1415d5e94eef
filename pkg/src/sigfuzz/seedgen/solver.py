"""Constraint search over boxes of symbol domains.

Constraints are (Cmp, wanted truth value) pairs.  Affine comparisons drive
interval propagation; everything is checked concretely at candidate points.
The search bisects the widest relevant domain, so over integer symbols it
is complete given enough nodes, and only then can it report UNSAT.
"""

from __future__ import annotations

import math
import random

from ..exec.trace import ExecFault
from .symexpr import NEGATE, Algebra, Cmp, Lin, evaluate, has_float, has_opaque, is_sym, symbols_of

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

FLOAT_SPAN = 1e15  # search box for float symbols without a finite range


def holds(constraints, asg) -> bool:
    try:
        for cmp, want in constraints:
            if bool(evaluate(cmp, asg)) != want:
                return False
    except (ExecFault, OverflowError, ValueError, ZeroDivisionError):
        return False
    return True


class _LinAtom:
    __slots__ = ("terms", "const", "op", "is_float")

    def __init__(self, terms, const, op, is_float):
        self.terms = list(terms.items())
        self.const = const
        self.op = op
        self.is_float = is_float


def _floor(x, is_float):
    if is_float:
        return math.floor(x + 1e-9 * (1 + abs(x)))
    return x


def _ceil(x, is_float):
    if is_float:
        return math.ceil(x - 1e-9 * (1 + abs(x)))
    return x


class Solver:
    def __init__(self, symbols: list, seed: int = 0):
        self.symbols = symbols
        self.alg = Algebra(symbols)
        self.rng = random.Random(seed)
        self.nodes = 0  # total search nodes over all calls

    def domain(self, k: int):
        s = self.symbols[k]
        if s.is_float:
            return (max(float(s.lo), -FLOAT_SPAN), min(float(s.hi), FLOAT_SPAN))
        return (int(s.lo), int(s.hi))

    def _normalize(self, constraints):
        """Split into affine atoms; returns (atoms, symbols, exact) or None if trivially false."""
        atoms = []
        syms: set = set()
        exact = True
        for cmp, want in constraints:
            if not isinstance(cmp, Cmp):
                if bool(cmp) != want:
                    return None
                continue
            syms |= symbols_of(cmp)
            if has_float(cmp):
                exact = False
            la = self.alg.as_lin(cmp.left) if not isinstance(cmp.left, Cmp) else None
            lb = self.alg.as_lin(cmp.right) if not isinstance(cmp.right, Cmp) else None
            if la is None or lb is None:
                continue
            is_float = la.is_float or lb.is_float
            terms = dict(la.terms)
            for k, c in lb.terms.items():
                terms[k] = terms.get(k, 0) - c
            terms = {k: c for k, c in terms.items() if c != 0}
            const = la.const - lb.const
            op = cmp.op if want else NEGATE[cmp.op]
            if not terms:
                continue  # checked concretely
            atoms.append(_LinAtom(terms, const, op, is_float))
        return atoms, syms, exact

    def _propagate(self, box: dict, atoms) -> dict | None:
        for _ in range(40):
            changed = False
            for at in atoms:
                fl = at.is_float
                if at.op == "!=":
                    free = [(k, c) for k, c in at.terms if box[k][0] != box[k][1]]
                    fixed = at.const + sum(c * box[k][0] for k, c in at.terms if box[k][0] == box[k][1])
                    if not free:
                        if fixed == 0:
                            return None
                    elif len(free) == 1 and not fl and not self.symbols[free[0][0]].is_float:
                        k, c = free[0]
                        if (-fixed) % c == 0:
                            v = (-fixed) // c
                            lo, hi = box[k]
                            if v == lo:
                                box[k] = (lo + 1, hi)
                                changed = True
                            elif v == hi:
                                box[k] = (lo, hi - 1)
                                changed = True
                            if box[k][0] > box[k][1]:
                                return None
                    continue
                sides = {"<": ((1, True),), "<=": ((1, False),), ">": ((-1, True),),
                         ">=": ((-1, False),), "==": ((1, False), (-1, False))}[at.op]
                for sg, strict in sides:
                    # sg * (sum + const) < 0  (or <= 0)
                    bound = -sg * at.const
                    if strict and not fl:
                        bound -= 1
                    mins = []
                    total_min = 0
                    for k, c in at.terms:
                        a = sg * c
                        lo, hi = box[k]
                        m = min(a * lo, a * hi)
                        mins.append(m)
                        total_min += m
                    if total_min > bound + (1e-9 * (1 + abs(bound)) if fl else 0):
                        return None
                    for (k, c), m in zip(at.terms, mins):
                        a = sg * c
                        rest = total_min - m
                        room = bound - rest
                        lo, hi = box[k]
                        is_int = not self.symbols[k].is_float
                        if a > 0:
                            if is_int:
                                nh = room // a if not fl and isinstance(room, int) else _floor(room / a, True)
                            else:
                                nh = room / a + 1e-9 * (1 + abs(room / a))
                            if nh < hi:
                                hi = nh
                                changed = True
                        else:
                            if is_int:
                                nl = -((-room) // a) if not fl and isinstance(room, int) else _ceil(room / a, True)
                            else:
                                nl = room / a - 1e-9 * (1 + abs(room / a))
                            if nl > lo:
                                lo = nl
                                changed = True
                        if lo > hi:
                            return None
                        box[k] = (lo, hi)
            if not changed:
                break
        return box

    def _point(self, box: dict, hint: dict | None) -> dict:
        pt = {}
        for k, (lo, hi) in box.items():
            v = hint.get(k) if hint else None
            if v is None or not (lo <= v <= hi):
                v = 0 if not self.symbols[k].is_float else 0.0
                v = lo if v < lo else hi if v > hi else v
            pt[k] = v
        return pt

    def _random_point(self, box: dict) -> dict:
        pt = {}
        for k, (lo, hi) in box.items():
            if self.symbols[k].is_float:
                pt[k] = self.rng.uniform(lo, hi)
            else:
                pt[k] = self.rng.randint(int(lo), int(hi))
        return pt

    def solve(self, constraints, budget: int = 400, hint: dict | None = None, base: dict | None = None):
        """Returns (status, assignment) with assignment covering the constraint symbols.

        ``base`` supplies values for symbols the constraints do not mention.
        """
        norm = self._normalize(constraints)
        if norm is None:
            return UNSAT, None
        atoms, syms, exact = norm
        if any(self.symbols[k].is_float for k in syms):
            exact = False
        opaque = any(has_opaque(c) for c, _ in constraints if is_sym(c))
        csyms = [symbols_of(c) for c, _ in constraints]
        full = dict(base) if base else {}
        box0 = {k: self.domain(k) for k in sorted(syms)}
        stack = [box0]
        nodes = 0
        gave_up = False

        def failing(asg):
            return [i for i, c in enumerate(constraints) if not holds((c,), asg)]

        while stack:
            if nodes >= budget:
                return UNKNOWN, None
            nodes += 1
            self.nodes += 1
            box = self._propagate(dict(stack.pop()), atoms)
            if box is None:
                continue
            pt = self._point(box, hint)
            full.update(pt)
            bad_idx = failing(full)
            if not bad_idx:
                return SAT, dict(full)
            if opaque:
                for _ in range(2):
                    full.update(self._random_point(box))
                    if holds(constraints, full):
                        return SAT, dict(full)
                full.update(pt)
            # split the widest domain among symbols of failing constraints
            bad: set = set()
            for i in bad_idx:
                bad |= csyms[i]
            best, width = None, 0
            for k in sorted(bad):
                lo, hi = box[k]
                w = hi - lo
                if self.symbols[k].is_float and w <= 1e-9 * (1 + abs(lo) + abs(hi)):
                    if w > 0:
                        gave_up = True
                    continue
                if w > width:
                    best, width = k, w
            if best is None:
                continue
            lo, hi = box[best]
            if self.symbols[best].is_float:
                mid = lo / 2 + hi / 2
                halves = [(lo, mid), (mid, hi)]
            else:
                mid = (lo + hi) // 2
                halves = [(lo, mid), (mid + 1, hi)]
            # explore the half containing the current point first
            halves.sort(key=lambda h: h[0] <= pt[best] <= h[1])
            for h in halves:
                nb = dict(box)
                nb[best] = h
                stack.append(nb)
        if exact and not gave_up:
            return UNSAT, None
        return UNKNOWN, None
