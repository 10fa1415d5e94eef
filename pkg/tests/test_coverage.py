from __future__ import annotations

from oracles import exactly_one_flip
from sigfuzz.coverage import CoverageVector, CumulativeCoverage, cond_flipped, dec_flipped, record, signature
from sigfuzz.coverage.report import coverage_report, series_csv
from sigfuzz.coverage.vector import mcdc_pair
from sigfuzz.exec import TestCase, encode_inputs, execute, zero_test
from sigfuzz.exec.trace import ExecutionTrace
from sigfuzz.ir import instrument, parse_model

M64 = (1 << 64) - 1


def test_record_examples():
    v = CoverageVector()
    assert record(True, 0, 0, v) is True and v.word == 0b1
    v = CoverageVector()
    assert record(False, 2, 0, v) is False and v.word == 0
    v = CoverageVector()
    record(True, 3, 0, v)
    record(True, 0, 0, v)
    assert v.word == 0b1001


def test_dec_flipped_examples():
    assert dec_flipped(0b011, 0b110)
    assert not dec_flipped(0b101, 0b101)
    assert dec_flipped(0b10, 0b11)


def test_cond_flipped_examples():
    assert cond_flipped(0b011, 0b110, 2)
    assert not cond_flipped(0b011, 0b101, 1)
    for c in (1, 2, 3):
        assert not cond_flipped(0b0110, 0b0110, c)


def test_cond_flipped_matches_popcount_predicate():
    import random

    rng = random.Random(1)
    for _ in range(5000):
        w1, w2 = rng.randrange(1 << 8), rng.randrange(1 << 8)
        for c in range(1, 8):
            assert cond_flipped(w1, w2, c) == exactly_one_flip(w1, w2, c)


AND2 = """
model and2 samples=1
port a in signal bool
port b in signal bool
port o out signal bool
block s Script in{a:bool,b:bool} out{r:bool} state{} body{ r = a && b; }
link a.0 -> s.0
link b.0 -> s.1
link s.0 -> o.0
"""


def _run(im, **vals):
    return execute(im, TestCase(encode_inputs(im.layout, {k: [v] for k, v in vals.items()}), im.layout))


def test_mcdc_and_pair():
    im = instrument(parse_model(AND2))
    cov = CumulativeCoverage(im)
    cov.merge_trace(_run(im, a=True, b=True))
    delta = cov.merge_trace(_run(im, a=False, b=True))
    # a=F short-circuits b, so the pair shows condition 1 only
    assert delta.mcdc == [(0, 1)]
    assert cov.mcdc_satisfied == {(0, 1)}
    delta = cov.merge_trace(_run(im, a=True, b=False))
    assert (0, 2) in delta.mcdc


def test_mcdc_pair_on_full_words():
    # a&&b with both conditions evaluated: TT=0b111, FT=0b100 (bit1=a=F, bit2=b=T)
    assert mcdc_pair(0b111, 0b111, 0b100, 0b111) == 1
    assert mcdc_pair(0b111, 0b111, 0b010, 0b111) == 2


def test_single_condition_equals_decision_coverage(relop):
    im = instrument(relop)
    cov = CumulativeCoverage(im)
    cov.merge_trace(_run(im, inp=5))
    assert cov.metrics().mcdc == 0.0
    cov.merge_trace(_run(im, inp=-5))
    m = cov.metrics()
    assert m.mcdc == 100.0 and m.cond_dec == 100.0
    assert cov.mcdc_satisfied == {(0, 0)}


def test_merge_first_and_replay(ondlc_im):
    cov = CumulativeCoverage(ondlc_im)
    t = TestCase(encode_inputs(ondlc_im.layout, {"u": [10] * 20, "Tset": 5}), ondlc_im.layout)
    tr = execute(ondlc_im, t)
    first = cov.merge_trace(tr)
    assert first
    assert set(first.units) == set(tr.unit_hits)
    assert not cov.merge_trace(tr)


def test_ondlc_output_true_delta(ondlc_im):
    cov = CumulativeCoverage(ondlc_im)
    cov.merge_trace(execute(ondlc_im, zero_test(ondlc_im.layout)))
    t = TestCase(encode_inputs(ondlc_im.layout, {"u": [10] * 5 + [0] * 15, "Tset": 5}), ondlc_im.layout)
    delta = cov.merge_trace(execute(ondlc_im, t))
    thresh = next(d for d in ondlc_im.decisions if "Tset" in d.text)
    assert (thresh.id, 0, True) in delta.outcomes


def test_half_flipped(ondlc_im):
    cov = CumulativeCoverage(ondlc_im)
    cov.merge_trace(execute(ondlc_im, zero_test(ondlc_im.layout)))
    # zero input: u == 10 false, counter >= Tset false
    assert cov.half_flipped() == {(0, 0), (1, 0)}


def test_signature_properties(ondlc_im):
    lay = ondlc_im.layout
    a = execute(ondlc_im, TestCase(encode_inputs(lay, {"u": [3] * 20, "Tset": 5}), lay))
    b = execute(ondlc_im, TestCase(encode_inputs(lay, {"u": [4] * 20, "Tset": 5}), lay))
    c = execute(ondlc_im, TestCase(encode_inputs(lay, {"u": [10] + [4] * 19, "Tset": 5}), lay))
    assert signature(a) == signature(b)
    assert signature(a) != signature(c)
    empty = ExecutionTrace({}, [])
    assert signature(empty) == signature(ExecutionTrace({}, [])) and len(signature(empty)) == 32


def test_signature_order_independent(ondlc_im):
    tr = execute(ondlc_im, TestCase(encode_inputs(ondlc_im.layout, {"u": [10, 0] * 10, "Tset": 5}), ondlc_im.layout))
    shuffled = ExecutionTrace(tr.outputs, tr.states, {d: set(sorted(v, reverse=True)) for d, v in
                                                       reversed(list(tr.evaluations.items()))}, tr.unit_hits)
    assert signature(tr) == signature(shuffled)


def test_reports(ondlc_im):
    cov = CumulativeCoverage(ondlc_im)
    cov.merge_trace(execute(ondlc_im, zero_test(ondlc_im.layout)))
    rep = coverage_report(cov)
    assert rep["summary"]["cond_dec_pct"] == 50.0
    assert [r["id"] for r in rep["decisions"]] == [0, 1]
    text = series_csv([(0.0, 0, 1, 100.0, 50.0, 0.0)])
    assert text.splitlines()[0].startswith("elapsed_s,")
