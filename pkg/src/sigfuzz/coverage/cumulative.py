"""Test-suite-level coverage: outcome sets, MC/DC pairs, units, signatures."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field

from ..exec.trace import VECTOR_CAP, ExecutionTrace
from ..ir.instrument import InstrumentedModel
from .vector import M64, WORD_BITS, mcdc_pair, split


@dataclass
class CoverageDelta:
    outcomes: list = field(default_factory=list)  # (decision, condition, bool)
    mcdc: list = field(default_factory=list)  # (decision, condition)
    units: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.outcomes or self.mcdc or self.units)


@dataclass(frozen=True)
class Metrics:
    unit: float
    cond_dec: float
    mcdc: float

    def as_tuple(self) -> tuple:
        return (self.unit, self.cond_dec, self.mcdc)

    def dominates(self, other: "Metrics") -> bool:
        return all(a >= b for a, b in zip(self.as_tuple(), other.as_tuple()))


def _pct(num: int, den: int) -> float:
    return 100.0 if den == 0 else 100.0 * num / den


def trace_outcomes(evaluations: dict, full_masks: dict | None = None) -> dict:
    """decision -> (true-outcome mask, false-outcome mask) over all vectors."""
    out = {}
    for d, vs in evaluations.items():
        t = f = 0
        full = full_masks.get(d, M64) if full_masks else M64
        for v in vs:
            low, ev = split(v, full)
            t |= low
            f |= ev & ~low
        out[d] = (t, f)
    return out


def coverage_key(trace: ExecutionTrace) -> tuple:
    """Canonical, order-independent description of what one trace covered."""
    outs = trace_outcomes(trace.evaluations)
    return tuple(sorted((d, t, f) for d, (t, f) in outs.items() if t or f)), tuple(sorted(trace.unit_hits))


def signature_of_key(key: tuple) -> str:
    """128-bit stable hash of a canonical coverage key.

    The key holds only sorted ints and unit-name strings, so its repr is canonical.
    """
    return hashlib.blake2b(repr(key).encode(), digest_size=16).hexdigest()


def signature(trace: ExecutionTrace) -> str:
    return signature_of_key(coverage_key(trace))


class CumulativeCoverage:
    """Global coverage state; merges are atomic per trace."""

    def __init__(self, model: InstrumentedModel):
        self.model = model
        self.decisions = {d.id: d for d in model.decisions}
        self.full_masks = {
            d.id: (1 << (d.condition_count + 1)) - 1 if not d.root_is_leaf else 1 for d in model.decisions
        }
        self.objectives = {d.id: d.condition_indices for d in model.decisions}
        self.units_total = tuple(model.program.unit_ids)
        self.true_mask = dict.fromkeys(self.decisions, 0)
        self.false_mask = dict.fromkeys(self.decisions, 0)
        self.mcdc_mask = dict.fromkeys(self.decisions, 0)
        self.vectors = {d: set() for d in self.decisions}
        self.units: set = set()
        self.lock = threading.RLock()
        n_sub = sum(d.condition_count for d in model.decisions if not d.root_is_leaf)
        self._cd_total = 2 * len(self.decisions) + 2 * n_sub
        self._mcdc_total = sum(len(v) for v in self.objectives.values())

    # views

    @property
    def decision_outcomes(self) -> set:
        out = set()
        for d in self.decisions:
            if self.true_mask[d] & 1:
                out.add((d, True))
            if self.false_mask[d] & 1:
                out.add((d, False))
        return out

    @property
    def condition_outcomes(self) -> set:
        out = set()
        for d, idxs in self.objectives.items():
            for c in idxs:
                if (self.true_mask[d] >> c) & 1:
                    out.add((d, c, True))
                if (self.false_mask[d] >> c) & 1:
                    out.add((d, c, False))
        return out

    @property
    def mcdc_satisfied(self) -> set:
        return {(d, c) for d, idxs in self.objectives.items() for c in idxs if (self.mcdc_mask[d] >> c) & 1}

    @property
    def unit_hits(self) -> set:
        return set(self.units)

    def half_flipped(self) -> set:
        """Conditions (index 0 being the decision) with exactly one outcome observed."""
        out = set()
        for d, idxs in self.objectives.items():
            t, f = self.true_mask[d], self.false_mask[d]
            for c in {0, *idxs}:
                if ((t >> c) ^ (f >> c)) & 1:
                    out.add((d, c))
        return out

    def metrics(self) -> Metrics:
        with self.lock:
            cd = 0
            for d, info in self.decisions.items():
                t, f = self.true_mask[d], self.false_mask[d]
                cd += (t & 1) + (f & 1)
                if not info.root_is_leaf:
                    for c in range(1, info.condition_count + 1):
                        cd += ((t >> c) & 1) + ((f >> c) & 1)
            mc = sum(bin(m).count("1") for m in self.mcdc_mask.values())
            return Metrics(
                _pct(len(self.units), len(self.units_total)),
                _pct(cd, self._cd_total),
                _pct(mc, self._mcdc_total),
            )

    # updates

    def _add_vector(self, d: int, v: int, delta: CoverageDelta) -> None:
        full = self.full_masks[d]
        low, ev = split(v, full)
        t_new = low & ~self.true_mask[d]
        f_new = ev & ~low & ~self.false_mask[d]
        if t_new or f_new:
            self.true_mask[d] |= t_new
            self.false_mask[d] |= f_new
            for c in range(self.decisions[d].condition_count + 1):
                if (t_new >> c) & 1:
                    delta.outcomes.append((d, c, True))
                if (f_new >> c) & 1:
                    delta.outcomes.append((d, c, False))
        store = self.vectors[d]
        objectives = self.objectives[d]
        done = self.mcdc_mask[d]
        goal = 0
        for c in objectives:
            goal |= 1 << c
        if done != goal:
            for u in store:
                lu, eu = split(u, full)
                c = mcdc_pair(low, ev, lu, eu)
                if c >= 0 and c in objectives and not (done >> c) & 1:
                    done |= 1 << c
                    delta.mcdc.append((d, c))
            self.mcdc_mask[d] = done
        if len(store) < VECTOR_CAP:
            store.add(low | (ev << WORD_BITS))

    def mcdc_update(self, evaluations: dict, delta: CoverageDelta | None = None) -> list:
        """Fold new vectors into the per-decision stores; returns new MC/DC pairs."""
        delta = delta if delta is not None else CoverageDelta()
        before = len(delta.mcdc)
        with self.lock:
            for d, vs in evaluations.items():
                store = self.vectors[d]
                full = self.full_masks[d]
                for v in sorted(vs):
                    low, ev = split(v, full)
                    if (low | (ev << WORD_BITS)) in store:
                        continue
                    self._add_vector(d, v, delta)
        return delta.mcdc[before:]

    def merge_trace(self, trace: ExecutionTrace) -> CoverageDelta:
        delta = CoverageDelta()
        with self.lock:
            ev = trace.evaluations
            for d, vs in ev.items():
                if vs <= self.vectors[d]:
                    continue
                self.mcdc_update({d: vs}, delta)
            new_units = trace.unit_hits - self.units
            if new_units:
                self.units |= new_units
                delta.units.extend(sorted(new_units))
        return delta

    def merge_all(self, traces) -> CoverageDelta:
        total = CoverageDelta()
        for t in traces:
            d = self.merge_trace(t)
            total.outcomes += d.outcomes
            total.mcdc += d.mcdc
            total.units += d.units
        return total
