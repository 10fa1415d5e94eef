"""Seed pool with signature deduplication and half-flip-aware selection."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..coverage.cumulative import CoverageDelta
from ..exec.testcase import TestCase
from ..exec.trace import ExecutionTrace


def evaluated_conditions(trace: ExecutionTrace) -> frozenset:
    """(decision, condition) pairs evaluated at least once in the trace."""
    out = set()
    for d, vs in trace.evaluations.items():
        ev = 0
        for v in vs:
            ev |= v >> 64
        c = 0
        while ev:
            if ev & 1:
                out.add((d, c))
            ev >>= 1
            c += 1
    return frozenset(out)


@dataclass
class PoolEntry:
    test: TestCase
    signature: str
    conditions: frozenset = frozenset()  # what this case evaluates

    @property
    def select_times(self) -> int:
        return self.test.select_times


@dataclass
class SeedPool:
    entries: list = field(default_factory=list)
    exec_times: dict = field(default_factory=dict)  # (decision, condition) -> traces evaluating it
    accepted: int = 0
    rejected: int = 0

    def __post_init__(self):
        self.lock = threading.RLock()
        self._by_sig = {e.signature: i for i, e in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def signatures(self) -> list:
        return [e.signature for e in self.entries]

    def record_execution(self, conditions) -> None:
        with self.lock:
            et = self.exec_times
            for key in conditions:
                et[key] = et.get(key, 0) + 1

    def weights(self, half_flipped: set) -> list:
        """Per-entry selection weight: novelty times mean rarity of its half-flipped conditions."""
        et = self.exec_times
        out = []
        for e in self.entries:
            prob = 1.0 / (1 + e.test.select_times)
            hf = [c for c in e.conditions if c in half_flipped]
            if hf:
                prob2 = sum(1.0 / (1 + et.get(c, 0)) for c in hf)
                prob *= prob2 / len(hf)
            out.append(prob)
        return out

    def probabilities(self, half_flipped: set) -> list:
        w = self.weights(half_flipped)
        total = sum(w)
        return [x / total for x in w]

    def select(self, rng, half_flipped: set) -> PoolEntry:
        with self.lock:
            if not self.entries:
                raise IndexError("cannot select from an empty seed pool")
            w = self.weights(half_flipped)
            r = rng.random() * sum(w)
            acc = 0.0
            chosen = self.entries[-1]
            for e, x in zip(self.entries, w):
                acc += x
                if r < acc:
                    chosen = e
                    break
            chosen.test.select_times += 1
            return chosen

    def update(self, test: TestCase, signature: str, delta: CoverageDelta, conditions=frozenset()) -> bool:
        """Accept on new coverage or an unseen signature; signatures stay unique."""
        with self.lock:
            idx = self._by_sig.get(signature)
            if idx is None:
                test.signature = signature
                test.select_times = 0
                self._by_sig[signature] = len(self.entries)
                self.entries.append(PoolEntry(test, signature, frozenset(conditions)))
                self.accepted += 1
                return True
            if delta:
                # same outcome set but new pairs: the newer case replaces the old one
                test.signature = signature
                test.select_times = 0
                self.entries[idx] = PoolEntry(test, signature, frozenset(conditions))
                self.accepted += 1
                return True
            self.rejected += 1
            return False

    def donor(self, rng):
        """Random entry's bytes for splicing."""
        with self.lock:
            if not self.entries:
                return None
            return self.entries[rng.randrange(len(self.entries))].test.data


def seed_select(pool: SeedPool, rng, half_flipped: set | None = None) -> PoolEntry:
    return pool.select(rng, half_flipped or set())


def pool_update(pool: SeedPool, child: TestCase, trace: ExecutionTrace, cov_delta: CoverageDelta,
                signature: str) -> bool:
    conds = evaluated_conditions(trace)
    pool.record_execution(conds)
    return pool.update(child, signature, cov_delta, conds)
