"""Scalar value types and their C-like arithmetic semantics."""

from __future__ import annotations

import enum
import math


class ValueType(enum.Enum):
    BOOL = "bool"
    INT8 = "int8"
    INT16 = "int16"
    INT32 = "int32"
    FLOAT64 = "float64"

    @property
    def size(self) -> int:
        return _SIZES[self]

    @property
    def struct_code(self) -> str:
        return _CODES[self]

    @property
    def is_int(self) -> bool:
        return self in (ValueType.INT8, ValueType.INT16, ValueType.INT32)

    @property
    def is_float(self) -> bool:
        return self is ValueType.FLOAT64

    @property
    def is_numeric(self) -> bool:
        return self is not ValueType.BOOL

    @property
    def bits(self) -> int:
        return self.size * 8

    @property
    def min(self):
        if self is ValueType.BOOL:
            return 0
        if self.is_float:
            return -math.inf
        return -(1 << (self.bits - 1))

    @property
    def max(self):
        if self is ValueType.BOOL:
            return 1
        if self.is_float:
            return math.inf
        return (1 << (self.bits - 1)) - 1

    def __str__(self) -> str:
        return self.value


_SIZES = {
    ValueType.BOOL: 1,
    ValueType.INT8: 1,
    ValueType.INT16: 2,
    ValueType.INT32: 4,
    ValueType.FLOAT64: 8,
}
_CODES = {
    ValueType.BOOL: "B",
    ValueType.INT8: "b",
    ValueType.INT16: "h",
    ValueType.INT32: "i",
    ValueType.FLOAT64: "d",
}

BOOL = ValueType.BOOL
INT8 = ValueType.INT8
INT16 = ValueType.INT16
INT32 = ValueType.INT32
FLOAT64 = ValueType.FLOAT64

TYPE_NAMES = {t.value: t for t in ValueType}


def parse_type(name: str) -> ValueType:
    try:
        return TYPE_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown value type {name!r}") from None


def wrap_int(value: int, ty: ValueType) -> int:
    """Two's-complement wrap of ``value`` into the width of ``ty``."""
    bits = ty.bits
    half = 1 << (bits - 1)
    return ((value + half) & ((1 << bits) - 1)) - half


def convert(value, ty: ValueType):
    """Convert a runtime value to ``ty`` the way a C assignment would.

    float -> int truncates toward zero; NaN becomes 0 and infinities
    saturate at the type bounds.
    """
    if ty is ValueType.BOOL:
        return value != 0
    if ty.is_float:
        return float(value)
    if isinstance(value, float):
        if value != value:
            return 0
        if value >= ty.max:
            return ty.max
        if value <= ty.min:
            return ty.min
        return int(value)
    return wrap_int(int(value), ty)


def arith_type(a: ValueType, b: ValueType) -> ValueType:
    """Result type of a binary arithmetic operator (usual C promotions)."""
    if a.is_float or b.is_float:
        return ValueType.FLOAT64
    return ValueType.INT32


def int_div(a: int, b: int) -> int:
    """C integer division (truncates toward zero); caller checks b != 0."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def float_div(a: float, b: float) -> float:
    if b == 0.0:
        if a != a or a == 0.0:
            return math.nan
        neg = (a < 0) != (math.copysign(1.0, b) < 0)
        return -math.inf if neg else math.inf
    return a / b


def literal_type(value) -> ValueType:
    if isinstance(value, bool):
        return ValueType.BOOL
    if isinstance(value, float):
        return ValueType.FLOAT64
    return ValueType.INT32


def clamp_to(value, lo, hi):
    """Clamp into [lo, hi]; NaN maps to ``lo``."""
    if value != value:
        return lo
    if value < lo:
        return lo
    if value > hi:
        return hi
    return value
