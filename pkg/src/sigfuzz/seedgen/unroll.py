"""Bounded unrolling of an instrumented model into per-path constraints.

Paths are enumerated depth first by replay: every run re-executes the first
K steps from scratch, following a prescribed list of fork choices and
taking the first feasible option at each new fork.  Forks happen where a
coverage probe (or a saturation) sees a symbolic operand.  Each new fork
is checked for feasibility: proven-infeasible options are pruned, options
with a concrete witness are explored depth first, and options the solver
could not decide are deferred until the witnessed ones are exhausted.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field

from ..exec.interp import _REL, _arith, zero_of
from ..exec.testcase import range_of
from ..exec.trace import ExecFault
from ..ir import ast
from ..ir.instrument import InstrumentedModel
from ..ir.types import ValueType, convert, wrap_int
from .budget import REPLAY_COST, Budget
from .solver import SAT, UNSAT, Solver, holds
from .symexpr import Algebra, Cmp, Lin, Symbol, has_float, has_opaque, is_sym

log = logging.getLogger(__name__)

PATH_CAP = 10_000
LOOP_UNROLL = 16
SNAPSHOTS_PER_TARGET = 16
FORK_BUDGET = 300  # solver nodes per feasibility check while exploring
FORK_BUDGET_INEXACT = 40  # when floats or opaque terms rule out a proof anyway


class _Truncated(Exception):
    """Loop unroll bound exceeded on this path."""


class _Dead(Exception):
    """No option at a fork has a witness; the run stops here."""


@dataclass
class Snapshot:
    constraints: tuple
    witness: dict | None
    opaque: bool


@dataclass
class PathConstraintSystem:
    model: InstrumentedModel
    K: int
    symbols: list
    targets: list  # every (decision, condition, outcome, step)
    reached: dict = field(default_factory=dict)  # target -> [Snapshot]
    vectors: dict = field(default_factory=dict)  # decision -> {vector: (step, Snapshot)}
    paths: int = 0
    truncated: int = 0
    complete: bool = False
    elapsed: float = 0.0
    seed: int = 0

    def defaults(self) -> dict:
        return {s.index: s.default for s in self.symbols}


def make_symbols(model: InstrumentedModel, K: int) -> list:
    syms = []
    for e in model.layout.entries:
        lo, hi = range_of(e)
        if e.value_type is ValueType.BOOL:
            lo, hi = 0, 1
        if e.is_signal:
            for step in range(K):
                for lane in range(e.width):
                    idx = e.element_index(step, lane)
                    syms.append(Symbol(len(syms), e.port_id, idx, e.value_type, lo, hi, step))
        else:
            for lane in range(e.width):
                syms.append(Symbol(len(syms), e.port_id, lane, e.value_type, lo, hi, None))
    return syms


def target_universe(model: InstrumentedModel, K: int) -> list:
    out = []
    for d in model.decisions:
        idxs = (0,) if d.root_is_leaf else (0,) + d.condition_indices
        for c in idxs:
            for step in range(K):
                for outcome in (True, False):
                    out.append((d.id, c, outcome, step))
    return out


class _Run:
    """One replay of the unrolled model along a choice prefix."""

    def __init__(self, ex: "Explorer", prefix: list, witness: dict | None):
        self.ex = ex
        self.alg = ex.alg
        self.prefix = prefix
        self.choices: list = []
        self.constraints: list = []
        self.witness = witness
        self.words: dict = {}
        self.step = 0

    # forking

    def branch(self, options: list) -> int:
        pos = len(self.choices)
        if pos < len(self.prefix):
            choice = self.prefix[pos]
            self.choices.append(choice)
            self.constraints.extend(options[choice])
            return choice
        witnessed, unknown = [], []
        for i, opt in enumerate(options):
            status, wit = self.ex.check(self.constraints, opt, self.witness)
            if status == SAT:
                witnessed.append((i, wit))
            elif status == UNSAT:
                self.ex.pruned += 1
            else:
                unknown.append(i)
        # options without a witness are often infeasible; explore them last
        for i in unknown:
            self.ex.deferred.append((self.choices + [i], None))
        if not witnessed:
            raise _Dead()
        first, wit = witnessed[0]
        for i, w in reversed(witnessed[1:]):
            self.ex.pending.append((self.choices + [i], w))
        self.choices.append(first)
        self.constraints.extend(options[first])
        self.witness = wit
        return first

    def decide(self, v) -> bool:
        if not is_sym(v):
            return bool(v)
        atom = self.alg.truth(v)
        return self.branch([[(atom, True)], [(atom, False)]]) == 0

    def snapshot(self) -> Snapshot:
        cons = tuple(self.constraints)
        return Snapshot(cons, self.witness, any(has_opaque(c) for c, _ in cons))

    # expressions

    def eval(self, e, env: dict, types: dict, index: int):
        ev = lambda x: self.eval(x, env, types, index)  # noqa: E731
        alg = self.alg
        if isinstance(e, ast.Var):
            return env[e.name]
        if isinstance(e, ast.Num):
            return e.value
        if isinstance(e, ast.BoolLit):
            return e.value
        if isinstance(e, ast.Binary):
            a = ev(e.left)
            b = ev(e.right)
            if e.op in _REL:
                if is_sym(a) or is_sym(b):
                    return alg.compare(e.op, a, b)
                return _REL[e.op](a, b)
            if is_sym(a) or is_sym(b):
                return alg.arith(e.op, a, b)
            return _arith(e.op, a, b, index)
        if isinstance(e, ast.Logical):
            left = self.decide(ev(e.left))
            if e.op == "&&":
                return left and self.decide(ev(e.right))
            return left or self.decide(ev(e.right))
        if isinstance(e, ast.Unary):
            v = ev(e.operand)
            if e.op == "!":
                return not self.decide(v)
            if is_sym(v):
                return alg.neg(v)
            return -v if isinstance(v, float) else wrap_int(-int(v), ValueType.INT32)
        if isinstance(e, ast.IncDec):
            old = env[e.name]
            ty = types[e.name]
            if is_sym(old):
                env[e.name] = alg.convert(alg.arith("+", old, e.delta), ty)
            else:
                env[e.name] = convert(old + e.delta, ty)
            return old
        if isinstance(e, ast.Sat):
            v = ev(e.operand)
            if not is_sym(v):
                return e.lo if v < e.lo else e.hi if v > e.hi else v
            below = alg.compare("<", v, e.lo)
            above = alg.compare(">", v, e.hi)
            choice = self.branch([[(below, True)], [(below, False), (above, True)], [(below, False), (above, False)]])
            return (e.lo, e.hi, v)[choice]
        if isinstance(e, ast.Cast):
            return alg.convert(ev(e.operand), e.type)
        if isinstance(e, ast.Record):
            v = ev(e.operand)
            res = self.decide(v)
            w = self.words[e.dec] | (1 << (64 + e.cond))
            if res:
                w |= 1 << e.cond
            self.words[e.dec] = w
            self.ex.fire((e.dec, e.cond, res, self.step), self)
            return res
        if isinstance(e, ast.DecisionRoot):
            self.words[e.dec] = 0
            v = ev(e.operand)
            w = self.words.pop(e.dec)
            self.ex.vector(e.dec, w, self)
            return v
        raise TypeError(f"cannot evaluate {e!r}")

    def run_stmts(self, stmts, env, types, index) -> None:
        for s in stmts:
            if isinstance(s, ast.Assign):
                env[s.name] = self.alg.convert(self.eval(s.value, env, types, index), types[s.name])
            elif isinstance(s, ast.If):
                if self.decide(self.eval(s.cond, env, types, index)):
                    self.run_stmts(s.then, env, types, index)
                else:
                    self.run_stmts(s.orelse, env, types, index)
            elif isinstance(s, ast.While):
                count = 0
                while self.decide(self.eval(s.cond, env, types, index)):
                    count += 1
                    if count > LOOP_UNROLL:
                        raise _Truncated()
                    self.run_stmts(s.body, env, types, index)
            elif isinstance(s, ast.Decl):
                v = self.eval(s.init, env, types, index) if s.init is not None else zero_of(s.type)
                env[s.name] = self.alg.convert(v, s.type)
            elif isinstance(s, ast.ExprStmt):
                self.eval(s.expr, env, types, index)

    def run(self) -> None:
        ex = self.ex
        prog = ex.model.program
        alg = self.alg
        wires: dict = {}
        state = {lb.id: {n: convert(v, t) for n, t, v in lb.state} for lb in prog.blocks}
        delays = {dl.id: convert(dl.init, dl.type) for dl in prog.delays}
        for step in range(ex.K):
            self.step = step

            def read(src):
                if src[0] == "port":
                    return ex.port_value(src[1], src[2], step)
                if src[0] == "default":
                    return src[1]
                return wires[src]

            for dl in prog.delays:
                wires[("block", dl.id, 0)] = delays[dl.id]
            for lb in prog.blocks:
                env = {}
                for name, ty, src in lb.inputs:
                    env[name] = alg.convert(read(src), ty)
                for name, ty in lb.outputs:
                    env[name] = zero_of(ty)
                for name, ty in lb.locals:
                    env[name] = zero_of(ty)
                env.update(state[lb.id])
                self.run_stmts(lb.body, env, ex.types[lb.id], lb.index)
                for j, (name, _) in enumerate(lb.outputs):
                    wires[("block", lb.id, j)] = env[name]
                for name in state[lb.id]:
                    state[lb.id][name] = env[name]
            for dl in prog.delays:
                delays[dl.id] = alg.convert(read(dl.source), dl.type)


class Explorer:
    def __init__(
        self,
        model: InstrumentedModel,
        K: int,
        path_cap: int = PATH_CAP,
        budget: Budget | None = None,
        seed: int = 0,
    ):
        self.model = model
        self.K = K
        self.symbols = make_symbols(model, K)
        self.alg = Algebra(self.symbols)
        self.solver = Solver(self.symbols, seed)
        self.path_cap = path_cap
        self.budget = budget or Budget.unlimited()
        self.types = {lb.id: lb.env() for lb in model.program.blocks}
        self.pending: list = []
        self.deferred: deque = deque()
        self.pruned = 0
        self.pcs = PathConstraintSystem(model, K, self.symbols, target_universe(model, K), seed=seed)
        self._values: dict = {}
        for s in self.symbols:
            lin = Lin({s.index: 1}, 0, s.is_float)
            value = Cmp("!=", lin, 0) if s.type is ValueType.BOOL else lin
            if s.step is None:
                self._values[(s.port, s.element, None)] = value
            else:
                self._values[(s.port, s.element, s.step)] = value
        self._entries = {e.port_id: e for e in model.layout.entries}

    def port_value(self, port: str, lane: int, step: int):
        e = self._entries[port]
        if e.is_signal:
            return self._values[(port, e.element_index(step, lane), step)]
        return self._values[(port, lane, None)]

    def check(self, constraints: list, extra: list, witness: dict | None):
        if witness is not None and holds(extra, witness):
            return SAT, witness
        before = self.solver.nodes
        cons = constraints + extra
        inexact = any(has_float(c) or has_opaque(c) for c, _ in extra)
        status, asg = self.solver.solve(
            cons, budget=FORK_BUDGET_INEXACT if inexact else FORK_BUDGET,
            hint=witness, base=witness or self.pcs.defaults(),
        )
        self.budget.charge(self.solver.nodes - before)
        return status, asg

    def fire(self, target: tuple, run: _Run) -> None:
        snaps = self.pcs.reached.setdefault(target, [])
        if len(snaps) < SNAPSHOTS_PER_TARGET:
            snaps.append(run.snapshot())

    def vector(self, d: int, w: int, run: _Run) -> None:
        store = self.pcs.vectors.setdefault(d, {})
        if w not in store and len(store) < 4096:
            store[w] = (run.step, run.snapshot())

    def explore(self) -> PathConstraintSystem:
        start = time.perf_counter()
        pcs = self.pcs
        self.pending = [([], pcs.defaults())]
        complete = True
        while self.pending or self.deferred:
            if pcs.paths >= self.path_cap or self.budget.expired():
                complete = False
                break
            if self.pending:
                prefix, witness = self.pending.pop()
            else:
                prefix, witness = self.deferred.popleft()
            run = _Run(self, prefix, witness)
            pcs.paths += 1
            self.budget.charge(REPLAY_COST)
            try:
                run.run()
            except _Truncated:
                pcs.truncated += 1
                complete = False
            except _Dead:
                pass
            except ExecFault:
                pass
        pcs.complete = complete
        pcs.elapsed = time.perf_counter() - start
        log.info(
            "unrolled %s to K=%d: %d paths, %d pruned, complete=%s",
            self.model.model.name, self.K, pcs.paths, self.pruned, complete,
        )
        return pcs


def unroll(model: InstrumentedModel, K: int, path_cap: int = PATH_CAP, budget: Budget | None = None,
           seed: int = 0) -> PathConstraintSystem:
    """Enumerate the paths of the first K steps and collect reachable targets."""
    if K < 1:
        raise ValueError("unroll bound K must be at least 1")
    K = min(K, model.layout.sample_count)
    return Explorer(model, K, path_cap, budget, seed).explore()
