"""Initial pool construction: solved unrolling targets, n-wise cases, zero seed."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..coverage.cumulative import signature
from ..coverage.vector import mcdc_pair
from ..exec.engine import execute, execute_reference
from ..exec.testcase import TestCase, encode_inputs, zero_test
from ..ir.instrument import InstrumentedModel, instrument
from ..ir.model import ModelIR
from ..ir.types import ValueType
from .budget import REPLAY_COST, Budget
from .nwise import fast_nwise
from .solver import SAT, Solver
from .unroll import PATH_CAP, PathConstraintSystem, unroll

log = logging.getLogger(__name__)

SOLVED = "solved"
UNSAT_BOUND = "unsat-within-bound"
UNKNOWN = "unknown"

DEFAULT_UNROLL = 4
SOLVE_BUDGET = 2000  # solver nodes per snapshot
EXPLORE_SHARE = 0.6
MCDC_SAMPLES = 64  # vector samples per decision considered for pair seeds


def default_unroll(sample_count: int) -> int:
    return max(1, min(sample_count, DEFAULT_UNROLL))


@dataclass
class TargetResult:
    target: tuple
    status: str
    test: TestCase | None = None
    search_only: bool = False


@dataclass
class SeedReport:
    model: str
    K: int
    paths: int
    complete: bool
    targets: list  # TargetResult per (decision, condition, outcome, step)
    seeds: dict = field(default_factory=dict)  # origin -> count
    elapsed: float = 0.0

    def aggregate(self) -> dict:
        """(decision, condition, outcome) -> status over all steps."""
        by: dict = {}
        for r in self.targets:
            by.setdefault(r.target[:3], []).append(r.status)
        out = {}
        for key, sts in by.items():
            if SOLVED in sts:
                out[key] = SOLVED
            elif all(s == UNSAT_BOUND for s in sts):
                out[key] = UNSAT_BOUND
            else:
                out[key] = UNKNOWN
        return out

    def as_dict(self) -> dict:
        agg = self.aggregate()
        return {
            "model": self.model,
            "unroll": self.K,
            "paths": self.paths,
            "complete": self.complete,
            "elapsed": round(self.elapsed, 3),
            "seeds": dict(self.seeds),
            "targets": [
                {
                    "decision": r.target[0],
                    "condition": r.target[1],
                    "outcome": r.target[2],
                    "step": r.target[3],
                    "status": r.status,
                    "search_only": r.search_only,
                }
                for r in self.targets
            ],
            "summary": [
                {"decision": k[0], "condition": k[1], "outcome": k[2], "status": v}
                for k, v in sorted(agg.items())
            ],
        }


@dataclass
class SeedResult:
    seeds: list
    report: SeedReport


def assignment_to_test(pcs: PathConstraintSystem, asg: dict, origin: str = "bmc") -> TestCase:
    """Bind a symbol assignment into a buffer; steps beyond K stay zero."""
    layout = pcs.model.layout
    n = layout.sample_count
    values: dict = {}
    for e in layout.entries:
        if e.is_signal:
            values[e.port_id] = [[0] * e.width if e.width > 1 else 0 for _ in range(n)]
        else:
            values[e.port_id] = [0] * e.width if e.width > 1 else 0
    for s in pcs.symbols:
        v = asg.get(s.index, s.default)
        if s.type is ValueType.BOOL:
            v = bool(v)
        e = layout.entry(s.port)
        if e.is_signal:
            lane = s.element - s.step * e.width
            if e.width > 1:
                values[s.port][s.step][lane] = v
            else:
                values[s.port][s.step] = v
        elif e.width > 1:
            values[s.port][s.element] = v
        else:
            values[s.port] = v
    return TestCase(encode_inputs(layout, values), layout, origin=origin)


def reached_targets(im: InstrumentedModel, test: TestCase) -> set:
    """Every (decision, condition, outcome, step) a re-execution covers."""
    trace = execute_reference(im, test, step_vectors=True)
    out = set()
    for d, step, w in trace.step_vectors:
        ev = w >> 64
        c = 0
        while ev:
            if ev & 1:
                out.add((d, c, bool((w >> c) & 1), step))
            ev >>= 1
            c += 1
    return out


class _TargetSolver:
    def __init__(self, pcs: PathConstraintSystem, budget: Budget | None):
        self.pcs = pcs
        self.solver = Solver(pcs.symbols, pcs.seed)
        self.budget = budget or Budget.unlimited()
        self._checked: dict = {}  # buffer bytes -> (test, reached set)

    def expired(self) -> bool:
        return self.budget.expired()

    def solve_snapshot(self, snap, budget: int):
        before = self.solver.nodes
        st, asg = self.solver.solve(list(snap.constraints), budget=budget, base=self.pcs.defaults())
        self.budget.charge(self.solver.nodes - before)
        return asg if st == SAT else None

    def verify(self, asg: dict):
        return self.hits(assignment_to_test(self.pcs, asg))

    def hits(self, test: TestCase):
        if test.data not in self._checked:
            self.budget.charge(REPLAY_COST)
            self._checked[test.data] = (test, reached_targets(self.pcs.model, test))
        return self._checked[test.data]

    def solve(self, target: tuple) -> TargetResult:
        pcs = self.pcs
        snaps = pcs.reached.get(target)
        if not snaps:
            status = UNSAT_BOUND if pcs.complete else UNKNOWN
            return TargetResult(target, status)
        search_only = all(s.opaque for s in snaps)
        for snap in snaps:
            if self.expired():
                break
            candidates = []
            if snap.witness is not None:
                candidates.append(snap.witness)
            else:
                asg = self.solve_snapshot(snap, SOLVE_BUDGET)
                if asg is not None:
                    candidates.append(asg)
            for asg in candidates:
                test, hit = self.verify(asg)
                if target in hit:
                    return TargetResult(target, SOLVED, test, search_only)
        return TargetResult(target, UNKNOWN, None, search_only)


def solve_target(pcs: PathConstraintSystem, target: tuple, budget: Budget | None = None) -> TargetResult:
    """Three-valued solving of one target: solved (verified), unsat-within-bound, unknown."""
    if target not in set(pcs.targets):
        raise ValueError(f"{target!r} is not a target of this unrolling")
    return _TargetSolver(pcs, budget).solve(target)


def _solve_all(pcs: PathConstraintSystem, budget: Budget) -> list:
    ts = _TargetSolver(pcs, budget)
    results: dict = {}
    for target in pcs.targets:
        if target in results:
            continue
        r = ts.solve(target)
        results[target] = r
        if r.status == SOLVED:
            # the same buffer settles every other target it reaches
            _, hit = ts.hits(r.test)
            for t in hit:
                if t not in results and t in pcs.reached:
                    results[t] = TargetResult(t, SOLVED, r.test, all(s.opaque for s in pcs.reached[t]))
    return [results[t] for t in pcs.targets]


def _mcdc_seeds(pcs: PathConstraintSystem, ts: _TargetSolver) -> list:
    """Best-effort pairs of buffers showing each condition's independent effect."""
    out = []
    for info in pcs.model.decisions:
        if info.root_is_leaf or ts.expired():
            continue
        samples = list(pcs.vectors.get(info.id, {}).items())[:MCDC_SAMPLES]
        solved: dict = {}

        def solve_vector(w, step, snap):
            if w in solved:
                return solved[w]
            test = None
            asg = snap.witness
            if asg is None:
                asg = ts.solve_snapshot(snap, SOLVE_BUDGET // 4)
            if asg is not None:
                cand = assignment_to_test(pcs, asg, origin="bmc")
                trace = execute_reference(pcs.model, cand, step_vectors=True)
                if (info.id, step, w) in set(trace.step_vectors):
                    test = cand
            solved[w] = test
            return test

        for c in info.condition_indices:
            for i, (w1, (s1, sn1)) in enumerate(samples):
                found = False
                for w2, (s2, sn2) in samples[i + 1:]:
                    if mcdc_pair(w1 & ((1 << 64) - 1), w1 >> 64, w2 & ((1 << 64) - 1), w2 >> 64) != c:
                        continue
                    t1 = solve_vector(w1, s1, sn1)
                    t2 = solve_vector(w2, s2, sn2) if t1 is not None else None
                    if t1 is not None and t2 is not None:
                        out.extend((t1, t2))
                        found = True
                        break
                if found or ts.expired():
                    break
    return out


def nwise_seeds(model: ModelIR | InstrumentedModel, n: int = 2, seed: int = 0) -> list:
    """One buffer per n-wise case over constant ports with candidates; signals zero."""
    im = model if isinstance(model, InstrumentedModel) else instrument(model)
    layout = im.layout
    ports = [p for p in im.model.input_ports if not p.is_signal and p.candidates]
    if not ports:
        return []
    strength = max(1, min(n, len(ports)))
    suite = fast_nwise(strength, [p.candidates for p in ports], seed)
    out = []
    for case in suite:
        values = {}
        for p, v in zip(ports, case):
            if p.value_type is ValueType.BOOL:
                v = bool(v)
            values[p.id] = [v] * p.width if p.width > 1 else v
        out.append(TestCase(encode_inputs(layout, values), layout, origin="nwise"))
    return out


def run_seedgen(
    model: ModelIR | InstrumentedModel,
    K: int | None = None,
    budget: float = 5.0,
    n: int = 2,
    seed: int = 0,
    bmc: bool = True,
    path_cap: int = PATH_CAP,
    logical: bool = True,
) -> SeedResult:
    """Build the initial pool and a per-target status report."""
    im = model if isinstance(model, InstrumentedModel) else instrument(model)
    layout = im.layout
    clock = Budget(budget, logical)
    if K is None:
        K = default_unroll(layout.sample_count)
    K = max(1, min(K, layout.sample_count))

    solved: list = []  # one per solved target, deduplicated by signature
    extra: list = []  # MC/DC pairs, n-wise cases and the zero buffer, deduplicated by bytes only
    results: list = []
    paths, complete = 0, False
    if bmc:
        # exploration gets most of the budget; solving reuses its witnesses
        explore = clock.until(EXPLORE_SHARE * budget) if budget is not None else clock
        pcs = unroll(im, K, path_cap=path_cap, budget=explore, seed=seed)
        paths, complete = pcs.paths, pcs.complete
        results = _solve_all(pcs, clock)
        solved.extend(r.test for r in results if r.test is not None)
        extra.extend(_mcdc_seeds(pcs, _TargetSolver(pcs, clock)))
    extra.extend(nwise_seeds(im, n, seed))
    extra.append(zero_test(layout))

    seeds: list = []
    seen_sig: set = set()
    seen_data: set = set()
    counts: dict = {}
    for by_sig, t in [(True, t) for t in solved] + [(False, t) for t in extra]:
        sig = signature(execute(im, t))
        if t.origin != "zero" and (t.data in seen_data or (by_sig and sig in seen_sig)):
            continue
        seen_data.add(t.data)
        seen_sig.add(sig)
        t.signature = sig
        seeds.append(t)
        counts[t.origin] = counts.get(t.origin, 0) + 1

    # elapsed on the seedgen clock: work units when logical, so reports are reproducible
    report = SeedReport(im.model.name, K, paths, complete, results, counts, clock.elapsed())
    log.info("seedgen %s: %d seeds %s in %.2fs", im.model.name, len(seeds), counts, report.elapsed)
    return SeedResult(seeds, report)


def generate_initial_seeds(model, K: int | None = None, budget: float = 5.0, n: int = 2, seed: int = 0,
                           bmc: bool = True, logical: bool = True) -> list:
    """Union of verified unrolling seeds, n-wise cases and the all-zero buffer."""
    return run_seedgen(model, K, budget, n, seed, bmc, logical=logical).seeds
