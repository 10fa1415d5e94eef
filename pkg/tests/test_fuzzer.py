from __future__ import annotations

import math
import random

import pytest

from oracles import selection_probabilities
from sigfuzz.coverage import CumulativeCoverage, signature
from sigfuzz.coverage.cumulative import CoverageDelta
from sigfuzz.exec import TestCase, bind_inputs, encode_inputs, execute, zero_test
from sigfuzz.fuzzer import (
    CampaignConfig,
    MutationConfig,
    MutationContext,
    apply_math,
    bit_flip_all,
    curve_values,
    fuzz_campaign,
    mut_bit_flip,
    mut_curve_signal,
    mut_havoc,
    mut_math,
    mut_random_set,
    mut_square_signal,
    mutate,
)
from sigfuzz.fuzzer.mutators import bit_flip, extremes, mutate_bytes, square
from sigfuzz.fuzzer.pool import PoolEntry, SeedPool, pool_update, seed_select
from sigfuzz.ir import ValueType, instrument, mine_constants, parse_model


def _entry(layout, st, conds, tag):
    t = TestCase(bytes([tag]) + bytes(layout.total_bytes - 1), layout, select_times=st)
    return PoolEntry(t, f"sig{tag}", frozenset(conds))


def test_select_two_seeds(ondlc_im):
    lay = ondlc_im.layout
    pool = SeedPool([_entry(lay, 0, {(0, 0)}, 1), _entry(lay, 1, {(1, 0)}, 2)])
    probs = pool.probabilities({(0, 0), (1, 0)})
    assert probs == pytest.approx([2 / 3, 1 / 3])


def test_select_single_and_empty(ondlc_im):
    pool = SeedPool([_entry(ondlc_im.layout, 3, set(), 1)])
    e = seed_select(pool, random.Random(0))
    assert e is pool.entries[0] and e.select_times == 4
    with pytest.raises(IndexError):
        seed_select(SeedPool(), random.Random(0))


def test_select_uniform_chi_square(ondlc_im):
    lay = ondlc_im.layout
    pool = SeedPool([_entry(lay, 2, set(), i) for i in range(4)])
    rng = random.Random(7)
    counts = [0] * 4
    for _ in range(10_000):
        e = pool.select(rng, set())
        e.test.select_times -= 1  # keep the statistics identical
        counts[pool.entries.index(e)] += 1
    chi2 = sum((c - 2500) ** 2 / 2500 for c in counts)
    assert chi2 < 16.27  # 3 dof, p = 0.001


def test_weights_match_oracle(ondlc_im):
    lay = ondlc_im.layout
    conds = [{(0, 0), (1, 0)}, {(1, 0)}, set(), {(0, 0), (2, 1)}]
    sts = [0, 3, 1, 5]
    pool = SeedPool([_entry(lay, st, c, i) for i, (st, c) in enumerate(zip(sts, conds))])
    pool.exec_times = {(0, 0): 4, (1, 0): 0, (2, 1): 9}
    hf = {(0, 0), (1, 0)}
    assert pool.probabilities(hf) == pytest.approx(selection_probabilities(sts, conds, pool.exec_times, hf))


def test_pool_update_rules(ondlc_im):
    lay = ondlc_im.layout
    cov = CumulativeCoverage(ondlc_im)
    pool = SeedPool()
    parent = zero_test(lay)
    tr = execute(ondlc_im, parent)
    assert pool_update(pool, parent, tr, cov.merge_trace(tr), signature(tr))
    # same coverage again: rejected
    twin = TestCase(encode_inputs(lay, {"u": [3] * 20}), lay)
    tr2 = execute(ondlc_im, twin)
    assert not pool_update(pool, twin, tr2, cov.merge_trace(tr2), signature(tr2))
    # new outcome: accepted
    hit = TestCase(encode_inputs(lay, {"u": [10] * 20, "Tset": 5}), lay)
    tr3 = execute(ondlc_im, hit)
    assert pool_update(pool, hit, tr3, cov.merge_trace(tr3), signature(tr3))
    assert hit.select_times == 0
    # no new coverage, unseen combination of known outcomes: accepted on signature
    mix = TestCase(encode_inputs(lay, {"u": [10] + [0] * 19, "Tset": 5}), lay)
    tr4 = execute(ondlc_im, mix)
    delta = cov.merge_trace(tr4)
    assert not delta
    assert pool_update(pool, mix, tr4, delta, signature(tr4))
    sigs = pool.signatures
    assert len(sigs) == len(set(sigs)) == 3
    # exec_times counts every executed trace
    assert pool.exec_times[(0, 0)] == 4


def test_random_set_constant_and_ranges(ondlc_im):
    consts = mine_constants(ondlc_im.model)
    ctx = MutationContext(ondlc_im.layout, consts)
    assert 10 in ctx.by_port["u"].constants
    sl = ctx.by_port["u"]
    buf = bytearray(ondlc_im.layout.total_bytes)
    sl.write(buf, 3, 10)
    assert bind_inputs(bytes(buf), ondlc_im.layout)["u"][3] == 10
    m = parse_model("model r samples=8\nport p in signal int32 range 0 1\nport o out signal int32\nlink p.0 -> o.0\n")
    lay = instrument(m).layout
    rng = random.Random(2)
    t = zero_test(lay)
    for _ in range(100):
        t = mut_random_set(t, rng, mine_constants(m))
        assert set(bind_inputs(t, lay)["p"]) <= {0, 1}


def test_random_set_empty_buffer():
    m = parse_model("model k samples=2\nport o out signal int32\nblock c Constant {value=3,type=int32}\nlink c.0 -> o.0\n")
    lay = instrument(m).layout
    t = zero_test(lay)
    assert mut_random_set(t, random.Random(0)).data == b""


def test_bit_flip_examples(ondlc_im):
    assert list(bit_flip_all(bytes([0b01110001]))) == [bytes([0b10001110])]
    children = list(bit_flip_all(b"\x00\x01\x02\x03"))
    assert len(children) == 4
    assert all(sum(x != y for x, y in zip(c, b"\x00\x01\x02\x03")) == 1 for c in children)
    buf = bytearray([0b01110001])
    bit_flip(buf, random.Random(0))
    assert buf[0] in (0b10001110, 0b01110001)  # only whole-byte complements
    t = zero_test(ondlc_im.layout)
    assert mut_bit_flip(t, random.Random(1)).data != t.data


def test_math_examples():
    assert apply_math(10, "+", 3, ValueType.INT32) == 13
    assert apply_math(127, "+", 1, ValueType.INT8) == -128
    assert apply_math(10, "/", 4, ValueType.INT32) == 2
    assert apply_math(3, "/", 4, ValueType.INT32) == 0
    t = zero_test(instrument(parse_model(
        "model m samples=4\nport p in signal int16\nport o out signal int16\nlink p.0 -> o.0\n")).layout)
    assert len(mut_math(t, random.Random(0)).data) == len(t.data)


def test_havoc_extremes():
    assert set(extremes(ValueType.INT16)) >= {-32768, 32767}
    assert set(extremes(ValueType.INT8)) >= {-128, 127}
    fl = extremes(ValueType.FLOAT64)
    assert math.inf in fl and -math.inf in fl and 5e-324 in fl
    m = parse_model("model h samples=6\nport p in signal int16\nport o out signal int16\nlink p.0 -> o.0\n")
    lay = instrument(m).layout
    rng = random.Random(4)
    seen = set()
    for _ in range(300):
        t = mut_havoc(zero_test(lay), rng)
        seen.update(bind_inputs(t, lay)["p"])
    assert {-32768, 32767} <= seen
    # splicing a buffer with itself leaves it unchanged
    t = TestCase(bytes(range(12)), lay)
    ctx = MutationContext(lay, donor=lambda r: t.data)
    for _ in range(20):
        buf = bytearray(t.data)
        from sigfuzz.fuzzer.mutators import havoc

        havoc(buf, rng, ctx)
        assert len(buf) == 12


def test_square_example():
    m = parse_model("model s samples=6\nport p in signal int32\nport o out signal int32\nlink p.0 -> o.0\n")
    lay = instrument(m).layout
    ctx = MutationContext(lay)
    sl = ctx.by_port["p"]
    buf = bytearray(encode_inputs(lay, {"p": [1, 2, 3, 4, 5, 6]}))
    sl.write_lane(buf, 0, 2, [9] * 3)
    assert bind_inputs(bytes(buf), lay)["p"] == [1, 2, 9, 9, 9, 6]
    rng = random.Random(0)
    for _ in range(50):
        out = mut_square_signal(TestCase(encode_inputs(lay, {"p": [1, 2, 3, 4, 5, 6]}), lay), rng)
        vals = bind_inputs(out, lay)["p"]
        changed = [i for i, (a, b) in enumerate(zip(vals, [1, 2, 3, 4, 5, 6])) if a != b]
        if changed:
            span = vals[changed[0]:changed[-1] + 1]
            assert len(set(span)) == 1


def test_square_ondlc_scenario(ondlc_im):
    lay = ondlc_im.layout
    ctx = MutationContext(lay)
    buf = bytearray(encode_inputs(lay, {"u": [0] * 20, "Tset": 5}))
    ctx.by_port["u"].write_lane(buf, 0, 3, [10] * 5)
    tr = execute(ondlc_im, bytes(buf))
    assert True in tr.outputs["y"]


def test_square_without_signals():
    m = parse_model("model k samples=2\nport c in const int32\nport o out signal int32\nlink c.0 -> o.0\n")
    lay = instrument(m).layout
    t = TestCase(encode_inputs(lay, {"c": 5}), lay)
    buf = bytearray(t.data)
    square(buf, random.Random(0), MutationContext(lay))
    assert bytes(buf) == t.data


def test_curve_bounds_and_determinism():
    rng = random.Random(0)
    for _ in range(200):
        vals = curve_values(rng, 20, 0, 0, -2.0, 2.0)
        assert all(-2.0 - 1e-9 <= v <= 2.0 + 1e-9 for v in vals)
    m = parse_model("model c samples=20\nport p in signal int32 range 0 100\nport o out signal int32\nlink p.0 -> o.0\n")
    lay = instrument(m).layout
    for s in range(50):
        out = mut_curve_signal(zero_test(lay), random.Random(s))
        assert all(0 <= v <= 100 for v in bind_inputs(out, lay)["p"])
    a = mut_curve_signal(zero_test(lay), random.Random(42)).data
    b = mut_curve_signal(zero_test(lay), random.Random(42)).data
    assert a == b


def test_curve_frozen_vector():
    vals = curve_values(random.Random(2024), 6, 2, 2, 0.0, 100.0)
    assert [round(v, 6) for v in vals] == FROZEN_CURVE


FROZEN_CURVE = [21.037151, 28.041632, 38.714007, 48.501568, 54.496056, 56.851102]


def test_mutate_locality_and_length(ondlc_im):
    lay = ondlc_im.layout
    cfg = MutationConfig(enabled=("bit_flip",))
    rng = random.Random(5)
    parent = zero_test(lay)
    for _ in range(50):
        child = mutate(parent, rng, cfg)
        assert len(child.data) == len(parent.data)
        assert child.data != parent.data
    ctx = MutationContext(lay, config=MutationConfig(enabled=("square", "bit_flip")))
    for _ in range(100):
        child = mutate_bytes(parent.data, rng, ctx)
        bind_inputs(child, lay)


def test_mutation_config_validation():
    with pytest.raises(ValueError):
        MutationConfig(enabled=())
    with pytest.raises(ValueError):
        MutationConfig(enabled=("nope",))
    with pytest.raises(ValueError):
        MutationConfig(curve_n1=-1)


def test_campaign_budget_zero(ondlc_im):
    rep = fuzz_campaign(ondlc_im, CampaignConfig(budget=0, seedgen_budget=1.0))
    assert rep.executions == 0
    assert rep.metrics == rep.initial_metrics
    assert rep.series == [(0.0, 0, len(rep.pool), *rep.metrics.as_tuple())]


def test_campaign_ondlc_reaches_full(ondlc_im):
    rep = fuzz_campaign(ondlc_im, CampaignConfig(budget=60, seed=7))
    assert rep.metrics.cond_dec == 100.0
    assert rep.series[-1][3:] == rep.metrics.as_tuple()


def test_campaign_deterministic(guidance_im):
    cfg = CampaignConfig(budget=0.5, seed=3, stop_when_complete=False, seedgen_budget=1.0)
    a = fuzz_campaign(guidance_im, cfg)
    b = fuzz_campaign(guidance_im, cfg)
    assert a.summary() == b.summary()
    assert a.series == b.series
    assert [e.test.data for e in a.pool.entries] == [e.test.data for e in b.pool.entries]


def test_campaign_series_monotone(guidance_im):
    rep = fuzz_campaign(guidance_im, CampaignConfig(budget=1.0, seed=1, stop_when_complete=False,
                                                    signal_mutations=False, seedgen_budget=0.5))
    for prev, cur in zip(rep.series, rep.series[1:]):
        assert cur[0] >= prev[0]
        assert all(c >= p for c, p in zip(cur[3:], prev[3:]))
    assert rep.series[-1][3:] == rep.metrics.as_tuple()


def test_campaign_threads(guidance_im):
    rep = fuzz_campaign(guidance_im, CampaignConfig(budget=0.5, workers=3, seed=1, seedgen_budget=0.5))
    sigs = [e.signature for e in rep.pool.entries]
    assert len(sigs) == len(set(sigs))
    assert rep.metrics.dominates(rep.initial_metrics)


def test_findings_recorded():
    m = parse_model("""
model dz samples=4
port a in signal int32
port o out signal int32
block s Script in{a:int32} out{r:int32} state{} body{ r = 100 / (a - 3); }
link a.0 -> s.0
link s.0 -> o.0
""")
    # no decisions: coverage is complete at once, so keep fuzzing
    rep = fuzz_campaign(m, CampaignConfig(budget=1.0, seed=0, seedgen_budget=0.5, stop_when_complete=False))
    assert rep.findings and rep.findings[0].kind == "div-by-zero"
    keys = {(f.kind, f.block, f.test.signature) for f in rep.findings}
    assert len(keys) == len(rep.findings)


def test_campaign_config_validation():
    with pytest.raises(ValueError):
        CampaignConfig(budget=-1)
    with pytest.raises(ValueError):
        CampaignConfig(workers=0)
    assert CampaignConfig(workers=1).logical and not CampaignConfig(workers=2).logical


def test_cov_delta_truthiness():
    assert not CoverageDelta()
    assert CoverageDelta(units=["x"])
