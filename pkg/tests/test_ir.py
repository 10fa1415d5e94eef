from __future__ import annotations

import pytest

from sigfuzz import benchmarks
from sigfuzz.ir import (
    InstrumentError,
    ModelError,
    ValueType,
    instrument,
    layout_test_buffer,
    mine_constants,
    parse_expression,
    parse_model,
    print_model,
)

FIG_ADD = """
model add2 samples=1
port in1 in signal int32
port in2 in signal int32
port out1 out signal int32
block add Add {signs=++,type=int32}
link in1.0 -> add.0
link in2.0 -> add.1
link add.0 -> out1.0
"""


def test_two_input_add_model():
    m = parse_model(FIG_ADD)
    assert len(m.input_ports) == 2
    assert len(m.output_ports) == 1
    assert [b.kind for b in m.blocks] == ["Add"]


def test_passthrough_is_valid(passthrough):
    assert passthrough.blocks == ()
    assert len(passthrough.links) == 1


def test_algebraic_loop_rejected():
    text = """
model loop samples=2
port inp in signal int32
port outp out signal int32
block add Add {signs=++,type=int32}
link inp.0 -> add.0
link add.0 -> add.1
link add.0 -> outp.0
"""
    with pytest.raises(ModelError) as exc:
        parse_model(text)
    assert "algebraic-loop" in exc.value.kinds


def test_loop_through_delay_accepted():
    text = """
model acc samples=4
port inp in signal int32
port outp out signal int32
block add Add {signs=++,type=int32}
block z UnitDelay {init=0,type=int32}
link inp.0 -> add.0
link z.0 -> add.1
link add.0 -> z.0
link add.0 -> outp.0
"""
    parse_model(text)


def test_dangling_link_and_unknown_kind():
    with pytest.raises(ModelError) as exc:
        parse_model(FIG_ADD + "link nowhere.0 -> out1.0\n")
    assert exc.value.kinds & {"dangling-link", "multiple-drivers"}
    with pytest.raises(ModelError):
        parse_model(FIG_ADD.replace("Add {", "Frobnicate {"))


def test_syntax_error_has_position():
    with pytest.raises(ModelError) as exc:
        parse_model("model x samples=1\nport a in signal int32\nblock s Script in{a:int32} out{} state{} body{ a = ; }\n")
    d = exc.value.diagnostics[0]
    assert d.line == 3 and d.col > 0


def test_mined_constants_ondlc(ondlc):
    ints = set(mine_constants(ondlc).for_type(ValueType.INT32))
    assert {0, 1, 10} <= ints
    assert {-1, 2, 9, 11} <= ints


def test_mined_constants_empty(passthrough):
    assert mine_constants(passthrough).for_type(ValueType.INT32) == []


def test_mined_constants_saturate():
    m = parse_model("""
model sat samples=1
port inp in signal int32
port outp out signal int32
block s Saturate {lo=-5,hi=5}
link inp.0 -> s.0
link s.0 -> outp.0
""")
    assert {-5, 5, -6, -4, 4, 6} <= set(mine_constants(m).for_type(ValueType.INT32))


def test_layout_single_signal():
    m = parse_model("model one samples=20\nport inp in signal int32\nport o out signal int32\nlink inp.0 -> o.0\n")
    lay = layout_test_buffer(m)
    assert lay.total_bytes == 80
    (e,) = lay.entries
    assert (e.offset, e.elem_size, e.count) == (0, 4, 20)


def test_layout_ondlc(ondlc):
    lay = layout_test_buffer(ondlc)
    assert lay.total_bytes == 84
    u, tset = lay.entries
    assert (u.port_id, u.offset, u.count) == ("u", 0, 20)
    assert (tset.port_id, tset.offset, tset.count) == ("Tset", 80, 1)


def test_layout_no_inputs():
    m = parse_model("model k samples=2\nport o out signal int32\nblock c Constant {value=3,type=int32}\nlink c.0 -> o.0\n")
    lay = layout_test_buffer(m)
    assert lay.total_bytes == 0 and lay.entries == ()


def _script(body: str, ins="a:int32,b:int32,c:int32,d:int32") -> str:
    names = [x.split(":")[0] for x in ins.split(",")]
    ports = "\n".join(f"port {n} in signal {t.split(':')[1]}" for n, t in zip(names, ins.split(",")))
    links = "\n".join(f"link {n}.0 -> s.{i}" for i, n in enumerate(names))
    return (f"model sc samples=1\n{ports}\nport o out signal bool\n"
            f"block s Script in{{{ins}}} out{{r:bool}} state{{}} body{{ {body} }}\n{links}\nlink s.0 -> o.0\n")


def test_instrument_condition_counts():
    im = instrument(parse_model(_script("int32 bb = b; r = c < d || a < bb++;")))
    (d,) = im.decisions
    assert d.condition_count == 2 and d.condition_indices == (1, 2)

    im = instrument(parse_model(_script("r = a < b;")))
    (d,) = im.decisions
    assert d.condition_count == 1 and d.condition_indices == (0,)

    im = instrument(parse_model(_script("r = (a < b && b < c) || c < d;")))
    (d,) = im.decisions
    assert d.condition_count == 3
    assert d.conditions == ("a < b", "b < c", "c < d")


def test_instrument_ids_stable():
    a = instrument(benchmarks.load("guidance"))
    b = instrument(benchmarks.load("guidance"))
    assert [(d.id, d.block, d.text) for d in a.decisions] == [(d.id, d.block, d.text) for d in b.decisions]


def test_instrument_capacity():
    n = 64
    ins = ",".join(f"v{i}:bool" for i in range(n))
    expr = " && ".join(f"v{i}" for i in range(n))
    with pytest.raises(InstrumentError):
        instrument(parse_model(_script(f"r = {expr};", ins)))
    ins = ",".join(f"v{i}:bool" for i in range(63))
    expr = " && ".join(f"v{i}" for i in range(63))
    (d,) = instrument(parse_model(_script(f"r = {expr};", ins))).decisions
    assert d.condition_count == 63


@pytest.mark.parametrize("name", benchmarks.NAMES)
def test_benchmark_round_trip(name):
    m = benchmarks.load(name)
    assert parse_model(print_model(m)) == m


def test_parse_expression_precedence():
    e1 = parse_expression("a || b && c")
    e2 = parse_expression("a || (b && c)")
    assert e1 == e2
