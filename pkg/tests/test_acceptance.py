"""One test per acceptance criterion; each logs a PASS/FAIL line shown in the terminal summary."""

from __future__ import annotations

import itertools
import math
import random
import re
import time

import pytest

from gen import decision_model, random_bool_tree, random_script_model
from oracles import mcdc_truth_table, nwise_complete, selection_probabilities
from sigfuzz import benchmarks
from sigfuzz.coverage import CumulativeCoverage
from sigfuzz.exec import TestCase, encode_inputs, execute, execute_uninstrumented, executor_for
from sigfuzz.exec.testcase import encode_value
from sigfuzz.fuzzer import CampaignConfig, fuzz_campaign
from sigfuzz.fuzzer.pool import PoolEntry, SeedPool
from sigfuzz.harness import run_ablation
from sigfuzz.ir import instrument, mine_constants, parse_model, print_model
from sigfuzz.seedgen import fast_nwise, run_seedgen
from sigfuzz.seedgen.seeds import SOLVED, UNSAT_BOUND, reached_targets

# pinned tolerances
C1_DECISIONS = 200
C2_PAIRS = 500
C3_SPEED_S = 1.0
C4_DRAWS = 100_000
C4_SIGMAS = 3.0
C5_TRIALS, C5_BUDGET, C5_FULL_MIN, C5_RAW_LOWER_MIN = 10, 60.0, 9, 8
C6_BUDGET = 60.0
C7_TRIALS, C7_BUDGET, C7_GAIN_PP, C7_MIN = 10, 60.0, 10.0, 8
C8_TARGET, C8_FLOOR, C8_SECONDS = 10_000, 5_000, 5.0
C9_RANDOM, C9_STEP_RANDOM = 1_000_000, 10_000


def _log(log, n, name, ok, detail):
    log.append(f"C{n} {name:<30} {'PASS' if ok else 'FAIL'}  {detail}")


def test_c1_mcdc_oracle(acceptance_log):
    rng = random.Random(1)
    t0 = time.perf_counter()
    mismatches = 0
    for i in range(C1_DECISIONS):
        k = 2 + i % 5
        names = [f"v{j}" for j in range(k)]
        script, py = random_bool_tree(rng, names)
        im = instrument(parse_model(decision_model(script, names)))
        (dec,) = im.decisions
        # condition c is the c-th name in textual order
        order = [re.sub(r"[!() ]", "", t) for t in dec.conditions]
        assert sorted(order) == names
        cov = CumulativeCoverage(im)
        for row in itertools.product((False, True), repeat=k):
            vals = {n: [v] for n, v in zip(names, row)}
            cov.merge_trace(execute(im, TestCase(encode_inputs(im.layout, vals), im.layout)))
        got = {c for _, c in cov.mcdc_satisfied}
        code = compile(py, "<decision>", "eval")
        want = mcdc_truth_table(lambda *r: eval(code, {}, dict(zip(order, r))), k)
        mismatches += got != want
    secs = time.perf_counter() - t0
    ok = mismatches == 0 and secs < 30
    _log(acceptance_log, 1, "mcdc oracle equivalence", ok,
         f"{C1_DECISIONS - mismatches}/{C1_DECISIONS} decisions exact, {secs:.1f} s (limit 30 s)")
    assert ok


def test_c2_transparency(acceptance_log):
    rng = random.Random(2)
    bad = 0
    for i in range(C2_PAIRS):
        m = parse_model(random_script_model(rng, name=f"r{i}"))
        im = instrument(m)
        data = rng.randbytes(im.layout.total_bytes)
        a, b = execute(im, data), execute_uninstrumented(m, data)
        bad += (a.outputs, a.states, a.fault) != (b.outputs, b.states, b.fault)
    _log(acceptance_log, 2, "instrumentation transparency", bad == 0,
         f"{C2_PAIRS - bad}/{C2_PAIRS} pairs bit-identical")
    assert bad == 0


def test_c3_nwise(acceptance_log):
    checked = failed = 0
    for k in range(1, 7):
        for v in range(1, 5):
            for n in (2, 3):
                if n > k:
                    continue
                for cands in ([list(range(v))] * k, [list(range(1 + (j * 7 + v) % v)) for j in range(k)]):
                    checked += 1
                    failed += not nwise_complete(fast_nwise(n, cands, seed=k * 31 + v).cases, cands, n)
    t0 = time.perf_counter()
    big = fast_nwise(2, [[0, 1, 2, 3]] * 20, seed=0)
    secs = time.perf_counter() - t0
    big_ok = nwise_complete(big.cases, [[0, 1, 2, 3]] * 20, 2)
    ok = failed == 0 and big_ok and secs < C3_SPEED_S
    _log(acceptance_log, 3, "n-wise completeness/speed", ok,
         f"{checked - failed}/{checked} suites complete; k=20 v=4 n=2: {len(big)} cases in {secs * 1000:.0f} ms")
    assert ok


def test_c4_selection_distribution(acceptance_log, ondlc_im):
    lay = ondlc_im.layout
    sts = [0, 1, 3, 0, 7]
    conds = [{(0, 0), (1, 0)}, {(1, 0)}, set(), {(0, 0)}, {(1, 0), (0, 0)}]
    exec_times = {(0, 0): 12, (1, 0): 2}
    hf = {(0, 0), (1, 0)}
    pool = SeedPool([PoolEntry(TestCase(bytes([i]) + bytes(lay.total_bytes - 1), lay, select_times=s),
                               f"s{i}", frozenset(c)) for i, (s, c) in enumerate(zip(sts, conds))])
    pool.exec_times = dict(exec_times)
    want = selection_probabilities(sts, conds, exec_times, hf)
    assert pool.probabilities(hf) == pytest.approx(want, rel=1e-12)
    rng = random.Random(4)
    counts = [0] * 5
    for _ in range(C4_DRAWS):
        e = pool.select(rng, hf)
        i = pool.entries.index(e)
        e.test.select_times = sts[i]  # fixed pool: undo the bookkeeping of the draw
        counts[i] += 1
    z = [(c - C4_DRAWS * p) / math.sqrt(C4_DRAWS * p * (1 - p)) for c, p in zip(counts, want)]
    ok = max(abs(x) for x in z) <= C4_SIGMAS
    _log(acceptance_log, 4, "seed-selection distribution", ok,
         f"max |z| = {max(abs(x) for x in z):.2f} over {C4_DRAWS} draws (limit {C4_SIGMAS})")
    assert ok


@pytest.mark.slow
def test_c5_ondlc_ablation(acceptance_log, ondlc):
    t0 = time.perf_counter()
    ab = run_ablation(ondlc, trials=C5_TRIALS, budget=C5_BUDGET, seed=0, arms=("full", "raw"))
    full_ok = sum(1 for arms in ab.by_trial().values() if arms["full"].metrics.cond_dec == 100.0)
    cmp = ab.compare("full", "raw")
    mins = (time.perf_counter() - t0) / 60
    ok = full_ok >= C5_FULL_MIN and cmp["wins"] >= C5_RAW_LOWER_MIN and mins <= 25
    raw_cd = [round(arms["raw"].metrics.cond_dec, 1) for _, arms in sorted(ab.by_trial().items())]
    _log(acceptance_log, 5, "ONDLC signal ablation", ok,
         f"full 100% cond/dec in {full_ok}/{C5_TRIALS}; raw strictly lower in {cmp['wins']}/{C5_TRIALS}"
         f" (raw cond/dec {raw_cd}); {mins:.1f} min")
    assert ok


@pytest.mark.slow
def test_c6_coverage_dominance(acceptance_log):
    rows, ok = [], True
    for name in benchmarks.NAMES:
        rep = fuzz_campaign(benchmarks.load(name), CampaignConfig(budget=C6_BUDGET, seed=0))
        i, f = rep.initial_metrics, rep.metrics
        good = f.dominates(i)
        if name in ("ondlc", "oshotc"):
            good = good and f.cond_dec > i.cond_dec
        ok &= good
        rows.append(f"{name} {i.cond_dec:.0f}->{f.cond_dec:.0f}")
    _log(acceptance_log, 6, "coverage dominance", ok, "cond/dec " + ", ".join(rows))
    assert ok


@pytest.mark.slow
def test_c7_guidance_mcdc(acceptance_log, guidance_im):
    gains = []
    for t in range(C7_TRIALS):
        rep = fuzz_campaign(guidance_im, CampaignConfig(budget=C7_BUDGET, seed=t))
        gains.append(rep.metrics.mcdc - rep.initial_metrics.mcdc)
    hits = sum(g >= C7_GAIN_PP for g in gains)
    ok = hits >= C7_MIN
    _log(acceptance_log, 7, "guidance MC/DC gain", ok,
         f"+{C7_GAIN_PP:.0f}pp reached in {hits}/{C7_TRIALS} (gains {[round(g, 1) for g in gains]})")
    assert ok


def test_c8_throughput(acceptance_log, ondlc_im):
    rep = fuzz_campaign(ondlc_im, CampaignConfig(budget=C8_SECONDS, seed=0, clock="wall", seedgen_budget=1.0,
                                                 stop_when_complete=False))
    rate = rep.executions / C8_SECONDS
    ok = rate >= C8_FLOOR
    target = "target met" if rate >= C8_TARGET else f"below the {C8_TARGET}/s target"
    _log(acceptance_log, 8, "ONDLC throughput", ok,
         f"{rate:,.0f} exec/s single worker ({target}; fail floor {C8_FLOOR}/s)")
    assert ok


def _truncated(name: str, K: int):
    text = re.sub(r"samples=\d+", f"samples={K}", print_model(benchmarks.load(name)), count=1)
    return instrument(parse_model(text))


def _biased_inputs(im, rng):
    """Random buffers where about half the elements are mined constants of the port's type."""
    consts = mine_constants(im.model)
    plan = []
    for e in im.layout.entries:
        enc = [encode_value(c, e.value_type) for c in consts.for_type(e.value_type)]
        if e.range is not None:
            enc += [encode_value(x, e.value_type) for x in e.range]
        plan.append((e.elem_size, e.count, enc))
    rb, rand, choice = rng.randbytes, rng.random, rng.choice

    def draw() -> bytes:
        parts = []
        for size, count, enc in plan:
            for _ in range(count):
                parts.append(choice(enc) if enc and rand() < 0.5 else rb(size))
        return b"".join(parts)

    return draw


def _hits(evaluations) -> set:
    out = set()
    for d, vs in evaluations.items():
        for w in vs:
            ev, c = w >> 64, 0
            while ev:
                if ev & 1:
                    out.add((d, c, bool((w >> c) & 1)))
                ev >>= 1
                c += 1
    return out


@pytest.mark.slow
def test_c9_solver_soundness(acceptance_log):
    solved = solved_ok = 0
    unsat_total = contradicted = 0
    step_total = step_contradicted = 0
    runs = 0
    for name in benchmarks.NAMES:
        im = instrument(benchmarks.load(name))
        res = run_seedgen(im)
        for r in res.report.targets:
            if r.status == SOLVED:
                solved += 1
                solved_ok += r.target in reached_targets(im, r.test)
        K = res.report.K
        agg_unsat = {k for k, s in res.report.aggregate().items() if s == UNSAT_BOUND}
        step_unsat = {r.target for r in res.report.targets if r.status == UNSAT_BOUND}
        if not step_unsat:
            continue
        tim = _truncated(name, K)
        assert [d.text for d in tim.decisions] == [d.text for d in im.decisions]
        draw = _biased_inputs(tim, random.Random(9))
        unsat_total += len(agg_unsat)
        step_total += len(step_unsat)
        seen: set = set()
        if agg_unsat:
            ex = executor_for(tim)
            for _ in range(C9_RANDOM):
                seen |= _hits(ex.coverage(draw()).evaluations) & agg_unsat
            runs += C9_RANDOM
        contradicted += len(seen)
        steps_seen: set = set()
        for _ in range(C9_STEP_RANDOM):
            steps_seen |= reached_targets(tim, TestCase(draw(), tim.layout)) & step_unsat
        runs += C9_STEP_RANDOM
        step_contradicted += len(steps_seen)
    ok = solved_ok == solved and contradicted == 0 and step_contradicted == 0
    _log(acceptance_log, 9, "solver soundness", ok,
         f"{solved_ok}/{solved} solved targets re-cover; {contradicted}/{unsat_total} aggregate and"
         f" {step_contradicted}/{step_total} per-step unsat targets contradicted over {runs:,} random runs")
    assert ok
