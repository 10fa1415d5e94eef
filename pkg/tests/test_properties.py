from __future__ import annotations

import random

from hypothesis import given
from hypothesis import strategies as st

from gen import decision_model, random_bool_tree, random_script_model
from oracles import exactly_one_flip, nwise_complete
from sigfuzz import benchmarks
from sigfuzz.coverage import CumulativeCoverage, cond_flipped
from sigfuzz.exec import TestCase, bind_inputs, encode_inputs, execute, execute_uninstrumented
from sigfuzz.fuzzer import CampaignConfig, MutationConfig, fuzz_campaign, mutate
from sigfuzz.fuzzer.mutators import OPERATORS
from sigfuzz.ir import instrument, layout_test_buffer, parse_model, print_model
from sigfuzz.seedgen import fast_nwise

M64 = (1 << 64) - 1
seeds = st.integers(0, 2**32 - 1)
BENCH = {name: instrument(benchmarks.load(name)) for name in benchmarks.NAMES}


def _random_model(seed):
    return parse_model(random_script_model(random.Random(seed)))


@given(seeds)
def test_round_trip(seed):
    m = _random_model(seed)
    assert parse_model(print_model(m)) == m


@given(seeds, st.randoms(use_true_random=False))
def test_instrumentation_transparent(seed, r):
    m = _random_model(seed)
    im = instrument(m)
    data = bytes(r.randrange(256) for _ in range(im.layout.total_bytes))
    a, b = execute(im, data), execute_uninstrumented(m, data)
    assert a.outputs == b.outputs
    assert a.states == b.states
    assert a.fault == b.fault


@given(st.integers(2, 5), seeds, st.randoms(use_true_random=False))
def test_short_circuit_no_record(k, seed, r):
    names = [f"v{i}" for i in range(k)]
    expr = f"v0 || ({random_bool_tree(random.Random(seed), names[1:])[0]})" if k > 1 else "v0"
    im = instrument(parse_model(decision_model(expr, names)))
    vals = {n: [bool(r.getrandbits(1))] for n in names}
    vals["v0"] = [True]
    tr = execute(im, TestCase(encode_inputs(im.layout, vals), im.layout))
    (vs,) = tr.evaluations.values()
    (v,) = vs
    evaluated = v >> 64
    # bit 0 is the decision; of the conditions only v0 was evaluated
    assert evaluated == 0b11
    assert v & M64 == 0b11


@given(st.sampled_from(sorted(BENCH)), seeds)
def test_layout_total(name, seed):
    m = _random_model(seed) if seed % 2 else BENCH[name].model
    lay = layout_test_buffer(m)
    entries = sorted(lay.entries, key=lambda e: e.offset)
    assert sum(e.elem_size * e.count for e in entries) == lay.total_bytes
    pos = 0
    for e in entries:
        assert e.offset == pos
        pos += e.elem_size * e.count


@given(st.integers(0, 255), st.integers(0, 255), st.integers(1, 7))
def test_cond_flipped_exact(w1, w2, c):
    assert cond_flipped(w1, w2, c) == exactly_one_flip(w1, w2, c)


@given(st.sampled_from(sorted(BENCH)), st.lists(st.binary(min_size=0, max_size=300), min_size=1, max_size=12))
def test_coverage_monotone(name, blobs):
    im = BENCH[name]
    n = im.layout.total_bytes
    cov = CumulativeCoverage(im)
    prev = cov.metrics().as_tuple()
    for b in blobs:
        data = (b * (n // max(len(b), 1) + 1))[:n] if b else bytes(n)
        cov.merge_trace(execute(im, data))
        cur = cov.metrics().as_tuple()
        assert all(c >= p for c, p in zip(cur, prev))
        prev = cur


@given(st.integers(1, 8), st.integers(1, 5), st.integers(1, 3), seeds)
def test_nwise_complete(k, v, n, seed):
    n = min(n, k)
    r = random.Random(seed)
    cands = [list(range(r.randint(1, v))) for _ in range(k)]
    suite = fast_nwise(n, cands, seed)
    assert nwise_complete(suite.cases, cands, n)
    total = 1
    for c in cands:
        total *= len(c)
    assert len(suite) <= total


@given(st.sampled_from(sorted(BENCH)), st.sampled_from(OPERATORS), seeds, st.randoms(use_true_random=False))
def test_mutation_closure(name, op, seed, r):
    lay = BENCH[name].layout
    parent = TestCase(bytes(r.randrange(256) for _ in range(lay.total_bytes)), lay)
    child = mutate(parent, random.Random(seed), MutationConfig(enabled=(op,)))
    assert len(child.data) == len(parent.data)
    bind_inputs(child, lay)


@given(st.sampled_from(["ondlc", "oshotc", "guidance"]), st.integers(0, 1000))
def test_pool_sound_and_series_monotone(name, seed):
    rep = fuzz_campaign(BENCH[name], CampaignConfig(budget=0.2, seed=seed, seedgen_budget=0.2,
                                                     stop_when_complete=False))
    sigs = rep.pool.signatures
    assert len(sigs) == len(set(sigs))
    for prev, cur in zip(rep.series, rep.series[1:]):
        assert all(c >= p for c, p in zip(cur[3:], prev[3:]))
    assert rep.metrics.dominates(rep.initial_metrics)
