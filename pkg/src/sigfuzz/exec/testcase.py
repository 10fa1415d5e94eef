"""Test cases as flat byte buffers and their decoding into port streams."""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

from ..ir.layout import BufferLayout, LayoutEntry
from ..ir.types import ValueType, clamp_to

ORIGINS = ("bmc", "nwise", "mutation", "random", "zero")


class LayoutMismatch(ValueError):
    """Buffer length does not match the model's input layout."""


@dataclass
class TestCase:
    data: bytes
    layout: BufferLayout
    select_times: int = 0
    signature: str | None = None
    origin: str = "random"

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not isinstance(self.data, bytes):
            self.data = bytes(self.data)
        if len(self.data) != self.layout.total_bytes:
            raise LayoutMismatch(
                f"buffer has {len(self.data)} bytes, layout needs {self.layout.total_bytes}"
            )

    @property
    def digest(self) -> str:
        return hashlib.blake2b(self.data, digest_size=16).hexdigest()


def zero_test(layout: BufferLayout, origin: str = "zero") -> TestCase:
    return TestCase(bytes(layout.total_bytes), layout, origin=origin)


def range_of(entry: LayoutEntry):
    """Effective (lo, hi) of a port: the declared range or the full type range."""
    ty = entry.value_type
    if ty is ValueType.BOOL:
        return (False, True)
    if entry.range is None:
        return (ty.min, ty.max)
    lo, hi = entry.range
    if ty.is_int:
        lo = max(ty.min, math.ceil(lo))
        hi = min(ty.max, math.floor(hi))
    else:
        lo, hi = float(lo), float(hi)
    return (lo, hi)


def decode_entry(data: bytes, entry: LayoutEntry) -> list:
    """Raw little-endian decode of one port's elements, then range clamping."""
    ty = entry.value_type
    raw = struct.unpack_from(f"<{entry.count}{ty.struct_code}", data, entry.offset)
    if ty is ValueType.BOOL:
        return [b != 0 for b in raw]
    if entry.range is None:
        return list(raw)
    lo, hi = range_of(entry)
    return [clamp_to(v, lo, hi) for v in raw]


def encode_value(value, ty: ValueType) -> bytes:
    if ty is ValueType.BOOL:
        return b"\x01" if value else b"\x00"
    if ty.is_int:
        value = int(value)
    return struct.pack("<" + ty.struct_code, value)


def bind_inputs(test: TestCase | bytes, layout: BufferLayout) -> dict:
    """Decode a buffer into per-port streams of ``sample_count`` values.

    Width-1 ports give one scalar per step, wider ports a tuple of lanes.
    Constant ports repeat their single value at every step.
    """
    data = test.data if isinstance(test, TestCase) else bytes(test)
    if len(data) != layout.total_bytes:
        raise LayoutMismatch(f"buffer has {len(data)} bytes, layout needs {layout.total_bytes}")
    out = {}
    n = layout.sample_count
    for e in layout.entries:
        vals = decode_entry(data, e)
        w = e.width
        if e.is_signal:
            steps = [vals[s * w:(s + 1) * w] for s in range(n)]
        else:
            steps = [vals] * n
        out[e.port_id] = [s[0] if w == 1 else tuple(s) for s in steps]
    return out


def encode_inputs(layout: BufferLayout, values: dict) -> bytes:
    """Inverse of bind_inputs for in-range values; missing ports are zero.

    ``values`` maps port id to either a per-step list (signal ports) or a
    scalar (constant ports); wide ports take tuples of lanes per step.
    """
    buf = bytearray(layout.total_bytes)
    for e in layout.entries:
        if e.port_id not in values:
            continue
        v = values[e.port_id]
        if e.is_signal:
            elems = []
            for step in v:
                elems.extend(step if e.width > 1 else [step])
        else:
            elems = list(v) if e.width > 1 else [v]
        for i, x in enumerate(elems[: e.count]):
            off = e.elem_offset(i)
            buf[off:off + e.elem_size] = encode_value(x, e.value_type)
    return bytes(buf)
