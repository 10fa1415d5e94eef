"""Per-evaluation coverage words and the flipped-bit predicates.

A packed vector is an int: the low 64 bits are the outcome word (bit 0 =
decision, bit c = condition c) and bits 64..127 flag which of those were
evaluated at all.  ``record(false, c, d)`` leaves the outcome word untouched,
so without the second half a false condition and a short-circuited one
would look the same.
"""

from __future__ import annotations

from dataclasses import dataclass

WORD_BITS = 64
M64 = (1 << WORD_BITS) - 1


@dataclass
class CoverageVector:
    word: int = 0
    evaluated: int = 0

    @property
    def packed(self) -> int:
        return self.word | (self.evaluated << WORD_BITS)

    @classmethod
    def unpack(cls, packed: int) -> "CoverageVector":
        return cls(packed & M64, packed >> WORD_BITS)


def record(res: bool, cond_index: int, dec_index: int, vector: CoverageVector) -> bool:
    """``vector.word |= res << cond_index``; returns ``res`` unchanged.

    ``dec_index`` only selects the vector in the caller's table and is
    accepted for signature compatibility with the instrumented call.
    """
    if not 0 <= cond_index < WORD_BITS:
        raise ValueError(f"condition index {cond_index} does not fit a 64-bit word")
    vector.word |= int(bool(res)) << cond_index
    vector.evaluated |= 1 << cond_index
    return res


def _word(v) -> int:
    if isinstance(v, CoverageVector):
        return v.word
    return v & M64


def dec_flipped(v1, v2) -> bool:
    return ((_word(v1) ^ _word(v2)) & 0x1) == 1


def cond_flipped(v1, v2, cond_idx: int) -> bool:
    """True iff condition ``cond_idx`` (1-based) differs and no other condition does."""
    return ((_word(v1) >> 1) ^ (_word(v2) >> 1)) == 1 << (cond_idx - 1)


def split(packed: int, full_mask: int) -> tuple[int, int]:
    """(outcome word, evaluated mask); bare words count as fully evaluated."""
    ev = packed >> WORD_BITS
    if ev == 0:
        ev = full_mask
    return packed & M64, ev


def mcdc_pair(low1: int, ev1: int, low2: int, ev2: int) -> int:
    """Condition index shown independent by this pair, or -1.

    The flip formulas are applied to the two words restricted to the
    conditions evaluated in both; a condition skipped by short-circuiting in
    either evaluation cannot have influenced that evaluation's outcome.
    Index 0 is returned for a decision without sub-conditions.
    """
    common = ev1 & ev2
    a = low1 & common
    b = low2 & common
    if not dec_flipped(a, b):
        return -1
    x = (a ^ b) >> 1
    if x == 0:
        return 0
    if x & (x - 1):
        return -1
    c = x.bit_length()
    return c if cond_flipped(a, b, c) else -1
