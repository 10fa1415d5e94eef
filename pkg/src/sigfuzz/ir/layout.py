"""Byte-buffer layout of a test case and constant mining."""

from __future__ import annotations

import struct
from dataclasses import dataclass

from . import ast
from .model import ModelIR
from .types import ValueType


@dataclass(frozen=True)
class LayoutEntry:
    port_id: str
    offset: int
    elem_size: int
    count: int
    value_type: ValueType
    is_signal: bool
    width: int
    range: tuple | None

    @property
    def nbytes(self) -> int:
        return self.elem_size * self.count

    @property
    def end(self) -> int:
        return self.offset + self.nbytes

    def elem_offset(self, index: int) -> int:
        return self.offset + index * self.elem_size

    def element_index(self, step: int, lane: int = 0) -> int:
        """Signal elements are stored step-major: step * width + lane."""
        if not self.is_signal:
            return lane
        return step * self.width + lane


@dataclass(frozen=True)
class BufferLayout:
    total_bytes: int
    entries: tuple
    sample_count: int

    def entry(self, port_id: str) -> LayoutEntry:
        for e in self.entries:
            if e.port_id == port_id:
                return e
        raise KeyError(port_id)

    @property
    def struct_format(self) -> str:
        """Little-endian struct format decoding the whole buffer in order."""
        return "<" + "".join(f"{e.count}{e.value_type.struct_code}" for e in self.entries)

    def describe(self) -> dict:
        return {
            "total_bytes": self.total_bytes,
            "sample_count": self.sample_count,
            "entries": [
                {
                    "port": e.port_id,
                    "offset": e.offset,
                    "bytes_per_element": e.elem_size,
                    "count": e.count,
                    "type": e.value_type.value,
                    "signal": e.is_signal,
                    "width": e.width,
                }
                for e in self.entries
            ],
        }


def layout_test_buffer(model: ModelIR) -> BufferLayout:
    entries = []
    offset = 0
    for p in model.input_ports:
        count = model.sample_count * p.width if p.is_signal else p.width
        e = LayoutEntry(
            p.id, offset, p.value_type.size, count, p.value_type, p.is_signal, p.width, p.range
        )
        entries.append(e)
        offset += e.nbytes
    layout = BufferLayout(offset, tuple(entries), model.sample_count)
    assert struct.calcsize(layout.struct_format) == offset
    return layout


# ---------------------------------------------------------------------------
# constant mining


class ConstantDictionary(dict):
    """value_type -> set of literal values mined from the model."""

    def add(self, ty: ValueType, value) -> None:
        if ty is ValueType.BOOL or isinstance(value, bool):
            return
        if ty.is_float:
            value = float(value)
        self.setdefault(ty, set()).add(value)

    def for_type(self, ty: ValueType) -> list:
        """Sorted constants usable for a port of type ``ty`` (fitting its range)."""
        if ty is ValueType.BOOL:
            return [0, 1]
        vals = set()
        for t, s in self.items():
            for v in s:
                if ty.is_int:
                    if isinstance(v, float):
                        if v != v or v in (float("inf"), float("-inf")) or v != int(v):
                            continue
                        v = int(v)
                    if ty.min <= v <= ty.max:
                        vals.add(v)
                else:
                    vals.add(float(v))
        return sorted(vals)


def _literal_type(v) -> ValueType:
    return ValueType.FLOAT64 if isinstance(v, float) else ValueType.INT32


def mine_constants(model: ModelIR) -> ConstantDictionary:
    found: list[tuple[ValueType, object]] = []
    for p in model.ports:
        if p.range is not None:
            found.extend((p.value_type, v) for v in p.range)
        if p.candidates:
            found.extend((p.value_type, v) for v in p.candidates)
    for b in model.blocks:
        ptype = b.params.get("type")
        for key in ("value", "k", "init", "lo", "hi", "threshold"):
            if key in b.params:
                v = b.params[key]
                found.append((ptype or _literal_type(v), v))
        for item in b.state_vars:
            found.append((item[1], item[2]))
        for item in b.inputs:
            if item[2] is not None:
                found.append((item[1], item[2]))
        for s in ast.walk_stmts(b.body):
            for e in ast.stmt_exprs(s):
                for node in ast.walk_expr(e):
                    if isinstance(node, ast.Num):
                        found.append((node.type, node.value))
    out = ConstantDictionary()
    for ty, v in found:
        if isinstance(v, bool) or ty is ValueType.BOOL:
            continue
        for d in (0, -1, 1):
            w = v + d
            if ty.is_int and not ty.min <= w <= ty.max:
                continue
            out.add(ty, w)
    return out
