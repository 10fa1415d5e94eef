"""Independent reference implementations used to check the package.

Nothing here imports the code under test except for plain data types, so a
bug in the package cannot silently agree with its own oracle.
"""

from __future__ import annotations

import itertools
import math
import struct

# value type name -> (struct code, lo, hi) written out by hand
TYPE_TABLE = {
    "bool": ("B", 0, 1),
    "int8": ("b", -(2**7), 2**7 - 1),
    "int16": ("h", -(2**15), 2**15 - 1),
    "int32": ("i", -(2**31), 2**31 - 1),
    "float64": ("d", -math.inf, math.inf),
}


def decode_port(buf: bytes, offset: int, count: int, type_name: str, rng=None) -> list:
    """Little-endian decode of ``count`` elements followed by range clamping."""
    code, lo, hi = TYPE_TABLE[type_name]
    size = struct.calcsize(code)
    out = []
    for i in range(count):
        (v,) = struct.unpack("<" + code, buf[offset + i * size: offset + (i + 1) * size])
        if type_name == "bool":
            out.append(v != 0)
            continue
        if rng is not None:
            if type_name == "float64" and v != v:
                v = rng[0]
            v = min(max(v, rng[0]), rng[1])
        out.append(v)
    return out


def ondlc_outputs(u: list, tset: int) -> list:
    """Hand simulation of the forced-shutdown logic: true once u has been 10 for tset samples."""
    counter = 0
    out = []
    for x in u:
        counter = counter + 1 if x == 10 else 0
        out.append(counter >= tset)
    return out


def mcdc_truth_table(fn, k: int) -> set:
    """Unique-cause MC/DC straight from the definition on the full truth table.

    Condition c (1-based) is shown when two rows differ only in c and the
    decision value differs.
    """
    shown = set()
    rows = list(itertools.product((False, True), repeat=k))
    value = {r: bool(fn(*r)) for r in rows}
    for r in rows:
        for c in range(k):
            if r[c]:
                continue
            other = r[:c] + (True,) + r[c + 1:]
            if value[r] != value[other]:
                shown.add(c + 1)
    return shown


def exactly_one_flip(w1: int, w2: int, c: int) -> bool:
    """Condition bits (above bit 0) differ in exactly one place, and that place is c."""
    x = (w1 >> 1) ^ (w2 >> 1)
    return bin(x).count("1") == 1 and x == 1 << (c - 1)


def nwise_complete(cases, candidates, n: int) -> bool:
    for subset in itertools.combinations(range(len(candidates)), n):
        have = {tuple(case[i] for i in subset) for case in cases}
        for combo in itertools.product(*(candidates[i] for i in subset)):
            if combo not in have:
                return False
    return True


def selection_probabilities(select_times, conditions, exec_times, half_flipped) -> list:
    """Per-seed probabilities: 1/(1+selected) scaled by the mean of 1/(1+exec) over half-flipped conditions."""
    weights = []
    for st, conds in zip(select_times, conditions):
        w = 1.0 / (1 + st)
        hf = [c for c in conds if c in half_flipped]
        if hf:
            w *= sum(1.0 / (1 + exec_times.get(c, 0)) for c in hf) / len(hf)
        weights.append(w)
    total = sum(weights)
    return [w / total for w in weights]
