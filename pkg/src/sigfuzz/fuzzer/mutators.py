"""Byte-buffer mutation operators.

Operators work in place on a ``bytearray`` through a ``MutationContext``
that knows the buffer layout, the mined constants and (for splicing) how
to borrow another pool entry.  The public ``mut_*`` wrappers take and
return TestCase objects.
"""

from __future__ import annotations

import bisect
import math
import random
import struct
from dataclasses import dataclass, field

from ..exec.testcase import TestCase, range_of
from ..ir.layout import BufferLayout, ConstantDictionary
from ..ir.types import ValueType, int_div, wrap_int

OPERATORS = ("random_set", "bit_flip", "math", "havoc", "square", "curve")
SIGNAL_OPERATORS = ("square", "curve")

UNRANGED_FLOAT_SPAN = 1e6  # uniform draws for float ports without a range
FLAT_TABLE_MAX = 1 << 16  # element count up to which element choice is a table lookup


@dataclass
class MutationConfig:
    enabled: tuple = OPERATORS
    math_max: int = 16
    curve_n1: int = 2
    curve_n2: int = 2
    mutations_per_seed: int = 256
    stack_min: int = 1
    stack_max: int = 8
    havoc_extremes: dict = field(default_factory=dict)  # ValueType -> extra extreme values

    def __post_init__(self):
        self.enabled = tuple(self.enabled)
        unknown = set(self.enabled) - set(OPERATORS)
        if unknown:
            raise ValueError(f"unknown mutation operators: {sorted(unknown)}")
        if not self.enabled:
            raise ValueError("at least one mutation operator must be enabled")
        if self.curve_n1 < 0 or self.curve_n2 < 0:
            raise ValueError("curve term counts must be non-negative")
        if not 1 <= self.stack_min <= self.stack_max:
            raise ValueError("bad stacking range")

    @classmethod
    def without_signal_operators(cls, **kw) -> "MutationConfig":
        return cls(enabled=tuple(o for o in OPERATORS if o not in SIGNAL_OPERATORS), **kw)


def extremes(ty: ValueType) -> list:
    if ty is ValueType.BOOL:
        return [0, 1]
    if ty.is_float:
        return [-math.inf, math.inf, 0.0, -1.0, 5e-324, -1.7976931348623157e308, 1.7976931348623157e308]
    return [ty.min, ty.max, 0, -1]


class Slot:
    """One port's elements inside the buffer, with cached packing."""

    __slots__ = ("entry", "port_id", "offset", "size", "count", "width", "steps", "type", "is_bool",
                 "is_int", "is_float", "packer", "bits", "half", "mask", "code", "lo", "hi", "constants",
                 "extremes")

    def __init__(self, e, constants: list):
        ty = e.value_type
        self.entry = e
        self.port_id = e.port_id
        self.offset = e.offset
        self.size = e.elem_size
        self.count = e.count
        self.width = e.width
        self.steps = e.count // e.width if e.is_signal else 1
        self.type = ty
        self.is_bool = ty is ValueType.BOOL
        self.is_int = ty.is_int
        self.is_float = ty.is_float
        self.code = ty.struct_code
        self.packer = struct.Struct("<" + self.code)
        self.bits = ty.bits
        self.half = 1 << (self.bits - 1)
        self.mask = (1 << self.bits) - 1
        self.lo, self.hi = range_of(e)
        self.constants = constants
        self.extremes = extremes(ty)

    def read(self, buf, i):
        return self.packer.unpack_from(buf, self.offset + i * self.size)[0]

    def write(self, buf, i, v) -> None:
        if self.is_bool:
            buf[self.offset + i] = 1 if v else 0
            return
        if self.is_int:
            v = ((int(v) + self.half) & self.mask) - self.half
        self.packer.pack_into(buf, self.offset + i * self.size, v)

    def write_lane(self, buf, lane: int, start: int, values) -> None:
        """Write consecutive steps of one lane."""
        if self.width == 1 and not self.is_bool:
            if self.is_int:
                h, m = self.half, self.mask
                values = [((int(v) + h) & m) - h for v in values]
            struct.pack_into(f"<{len(values)}{self.code}", buf, self.offset + start * self.size, *values)
            return
        for j, v in enumerate(values):
            self.write(buf, (start + j) * self.width + lane, v)


class MutationContext:
    """Layout facts precomputed once per model."""

    def __init__(self, layout: BufferLayout, constants: ConstantDictionary | None = None,
                 config: MutationConfig | None = None, donor=None):
        self.layout = layout
        self.config = config or MutationConfig()
        consts = constants or ConstantDictionary()
        self.slots = []
        for e in layout.entries:
            if e.count <= 0:
                continue
            lo, hi = range_of(e)
            if e.value_type is ValueType.BOOL:
                cs = [0, 1]
            else:
                cs = [v for v in consts.for_type(e.value_type) if lo <= v <= hi]
            sl = Slot(e, cs)
            sl.extremes = sl.extremes + list(self.config.havoc_extremes.get(e.value_type, ()))
            self.slots.append(sl)
        self.by_port = {s.port_id: s for s in self.slots}
        self.signals = [s for s in self.slots if s.entry.is_signal]
        self.numeric_signals = [s for s in self.signals if not s.is_bool]
        # cumulative element counts for uniform element choice
        self._cum = []
        total = 0
        for sl in self.slots:
            total += sl.count
            self._cum.append(total)
        self.element_total = total
        # small layouts get a flat (slot, index) table instead of a bisection
        self._flat = [(sl, i) for sl in self.slots for i in range(sl.count)] if total <= FLAT_TABLE_MAX else None
        self.donor = donor  # callable rng -> bytes | None

    def pick_element(self, rng: random.Random):
        k = int(rng.random() * self.element_total)
        if self._flat is not None:
            return self._flat[k]
        j = bisect.bisect_right(self._cum, k)
        return self.slots[j], k - (self._cum[j - 1] if j else 0)

    def random_value(self, rng: random.Random, sl: Slot):
        """Half the time a mined constant, otherwise uniform over the port range."""
        consts = sl.constants
        if consts and rng.random() < 0.5:
            return consts[int(rng.random() * len(consts))]
        if sl.is_bool:
            return rng.random() < 0.5
        if sl.is_float:
            lo = max(sl.lo, -UNRANGED_FLOAT_SPAN)
            hi = min(sl.hi, UNRANGED_FLOAT_SPAN)
            return lo + (hi - lo) * rng.random()
        lo, hi = int(sl.lo), int(sl.hi)
        return lo + int(rng.random() * (hi - lo + 1))


# operators on bytearrays
# (random.random() based draws: randint/randrange dominate the profile otherwise)


def _between(rng, a: int, b: int) -> int:
    return a + int(rng.random() * (b - a + 1))


def _below(rng, n: int) -> int:
    return int(rng.random() * n)


def _pick(rng, seq):
    return seq[int(rng.random() * len(seq))]


def random_set(buf: bytearray, rng: random.Random, ctx: MutationContext) -> None:
    if not ctx.element_total:
        return
    pick, value = ctx.pick_element, ctx.random_value
    for _ in range(1 + int(rng.random() * 8)):
        sl, i = pick(rng)
        sl.write(buf, i, value(rng, sl))


def bit_flip(buf: bytearray, rng: random.Random, ctx: MutationContext | None = None) -> None:
    n = len(buf)
    if not n:
        return
    rand = rng.random
    for _ in range(1 + int(rand() * 8)):
        buf[int(rand() * n)] ^= 0xFF


def bit_flip_all(data: bytes):
    """Deterministic stage: one child per byte, that byte complemented."""
    for j in range(len(data)):
        child = bytearray(data)
        child[j] ^= 0xFF
        yield bytes(child)


def math_op(buf: bytearray, rng: random.Random, ctx: MutationContext) -> None:
    if not ctx.element_total:
        return
    top = max(2, ctx.config.math_max)
    for _ in range(_between(rng, 1, 4)):
        sl, i = ctx.pick_element(rng)
        op = _pick(rng, "+-*/")
        k = _between(rng, 2, top) if op in "*/" else _between(rng, 1, top)
        if sl.is_bool:
            off = sl.offset + i
            buf[off] = apply_math(buf[off], op, k, None) & 0xFF
            continue
        sl.write(buf, i, apply_math(sl.read(buf, i), op, k, sl.type))


def apply_math(v, op: str, k: int, ty: ValueType | None):
    """One arithmetic step; integers wrap at the declared width (raw bytes when ty is None)."""
    if isinstance(v, float):
        if op == "+":
            return v + k
        if op == "-":
            return v - k
        if op == "*":
            return v * k
        return v / k
    if op == "+":
        r = v + k
    elif op == "-":
        r = v - k
    elif op == "*":
        r = v * k
    else:
        r = int_div(v, k)
    return wrap_int(r, ty) if ty is not None else r


def havoc(buf: bytearray, rng: random.Random, ctx: MutationContext) -> None:
    n = len(buf)
    if not n:
        return
    rand = rng.random
    for _ in range(2 + int(rand() * 15)):
        what = int(rand() * 4)
        if what == 0 and ctx.element_total:
            sl, i = ctx.pick_element(rng)
            ex = sl.extremes
            sl.write(buf, i, ex[int(rand() * len(ex))])
        elif what == 1:
            start = int(rand() * n)
            length = 1 + int(rand() * (n - start))
            buf[start:start + length] = (b"\xff" if rand() < 0.5 else b"\x00") * length
        elif what == 2 and n >= 2:
            length = 1 + int(rand() * (n // 2))
            a = int(rand() * (n - length + 1))
            b = int(rand() * (n - length + 1))
            if a != b:
                sa = buf[a:a + length]
                sb = buf[b:b + length]
                buf[b:b + length] = sa
                buf[a:a + length] = sb
        elif what == 3 and ctx.donor is not None:
            other = ctx.donor(rng)
            if other is not None and len(other) == n:
                cut = int(rand() * (n + 1))
                buf[cut:] = other[cut:]


def _stream_span(rng: random.Random, sl: Slot):
    lane = _below(rng, sl.width) if sl.width > 1 else 0
    length = _between(rng, 1, sl.steps)
    start = _below(rng, sl.steps - length + 1)
    return lane, start, length


def square(buf: bytearray, rng: random.Random, ctx: MutationContext) -> None:
    if not ctx.signals:
        return
    sl = ctx.signals[int(rng.random() * len(ctx.signals))]
    lane, start, length = _stream_span(rng, sl)
    sl.write_lane(buf, lane, start, [ctx.random_value(rng, sl)] * length)


def curve_values(rng: random.Random, count: int, n1: int, n2: int, lo: float, hi: float) -> list:
    """Samples of a random sine/cosine mixture rescaled onto [lo, hi]."""
    rand = rng.random
    sines = [(rand(), rand()) for _ in range(n1 + 1)]
    cosines = [(rand(), rand()) for _ in range(n2 + 1)]
    phase = int(rand() * 1024)
    bound = (n1 + 1) + (n2 + 1)
    scale = (hi - lo) / (2 * bound)
    xs = range(phase, phase + count)
    sin, cos = math.sin, math.cos
    rows = [[sin(a * x + b) for x in xs] for a, b in sines]
    rows += [[cos(a * x + b) for x in xs] for a, b in cosines]
    base = lo + bound * scale
    return [base + r * scale for r in map(sum, zip(*rows))]


def curve(buf: bytearray, rng: random.Random, ctx: MutationContext) -> None:
    if not ctx.numeric_signals:
        return
    sl = ctx.numeric_signals[int(rng.random() * len(ctx.numeric_signals))]
    lane, start, length = _stream_span(rng, sl)
    if sl.entry.range is not None:
        lo, hi = sl.lo, sl.hi
    else:
        cur = [sl.read(buf, s * sl.width + lane) for s in range(sl.steps)]
        cur = [v for v in cur if not sl.is_float or math.isfinite(v)]
        lo, hi = (min(cur), max(cur)) if cur else (0, 0)
    vals = curve_values(rng, length, ctx.config.curve_n1, ctx.config.curve_n2, float(lo), float(hi))
    if sl.is_int:
        tmin, tmax = sl.type.min, sl.type.max
        vals = [min(max(int(round(v)), tmin), tmax) for v in vals]
    sl.write_lane(buf, lane, start, vals)


_OPS = {
    "random_set": random_set,
    "bit_flip": bit_flip,
    "math": math_op,
    "havoc": havoc,
    "square": square,
    "curve": curve,
}


def mutate_bytes(data: bytes, rng: random.Random, ctx: MutationContext) -> bytes:
    """Apply a random stack of enabled operators."""
    cfg = ctx.config
    buf = bytearray(data)
    ops = cfg.enabled
    n = len(ops)
    for _ in range(_between(rng, cfg.stack_min, cfg.stack_max)):
        _OPS[ops[int(rng.random() * n)]](buf, rng, ctx)
    return bytes(buf)


def mutate(entry: TestCase, rng: random.Random, config: MutationConfig | None = None, pool=None,
           ctx: MutationContext | None = None) -> TestCase:
    """Child test case from a stack of 1..8 operators; length is preserved."""
    if ctx is None:
        donor = pool.donor if pool is not None else None
        ctx = MutationContext(entry.layout, None, config, donor)
    return TestCase(mutate_bytes(entry.data, rng, ctx), entry.layout, origin="mutation")


# TestCase-level wrappers


def _apply(fn, test: TestCase, rng, ctx) -> TestCase:
    buf = bytearray(test.data)
    fn(buf, rng, ctx)
    return TestCase(bytes(buf), test.layout, origin="mutation")


def mut_random_set(test: TestCase, rng, constants: ConstantDictionary | None = None) -> TestCase:
    return _apply(random_set, test, rng, MutationContext(test.layout, constants))


def mut_bit_flip(test: TestCase, rng) -> TestCase:
    return _apply(bit_flip, test, rng, None)


def mut_math(test: TestCase, rng, max_operand: int = 16) -> TestCase:
    return _apply(math_op, test, rng, MutationContext(test.layout, None, MutationConfig(math_max=max_operand)))


def mut_havoc(test: TestCase, rng, donor=None) -> TestCase:
    return _apply(havoc, test, rng, MutationContext(test.layout, None, None, donor))


def mut_square_signal(test: TestCase, rng, constants: ConstantDictionary | None = None) -> TestCase:
    return _apply(square, test, rng, MutationContext(test.layout, constants))


def mut_curve_signal(test: TestCase, rng, n1: int = 2, n2: int = 2) -> TestCase:
    cfg = MutationConfig(curve_n1=n1, curve_n2=n2)
    return _apply(curve, test, rng, MutationContext(test.layout, None, cfg))
