"""Fast n-wise combination generation over constant-port candidate values.

The suite for ports 0..k is built from the suites for ports 0..k-1: one
representative value ``a`` of port k is paired with every n-wise case of the
earlier ports, and each remaining value is paired with every (n-1)-wise
case.  Memoizing on (n, k) keeps the recursion polynomial.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class NWiseSuite:
    n: int
    cases: tuple  # tuples of values, one per port in index order

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)


class FastNWise:
    def __init__(self, candidates, seed: int = 0):
        self.candidates = [list(dict.fromkeys(c)) for c in candidates]
        for i, c in enumerate(self.candidates):
            if not c:
                raise ValueError(f"port {i} has an empty candidate set")
        self.rng = random.Random(seed)
        self.memo: dict = {}
        self.reps: dict = {}

    def _rep(self, n: int, k: int):
        key = (n, k)
        if key not in self.reps:
            self.reps[key] = self.rng.choice(self.candidates[k])
        return self.reps[key]

    def suite(self, n: int, k: int) -> list:
        """n-wise cases over ports 0..k (k = -1 means no ports)."""
        key = (n, k)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if n < 0:
            out = []
        elif k < 0:
            out = [()] if n == 0 else []
        elif n == k + 1:
            out = list(itertools.product(*self.candidates[: k + 1]))
        elif n > k + 1:
            out = []
        else:
            a = self._rep(n, k)
            rest = [v for v in self.candidates[k] if v != a]
            out = [case + (a,) for case in self.suite(n, k - 1)]
            if rest:
                lower = self.suite(n - 1, k - 1)
                out.extend(case + (r,) for r in rest for case in lower)
        self.memo[key] = out
        return out


def fast_nwise(n: int, candidates, seed: int = 0) -> NWiseSuite:
    """n-wise suite for ports whose candidate lists are given in index order."""
    candidates = [list(c) for c in candidates]
    k = len(candidates)
    if n < 1:
        raise ValueError("n-wise strength must be at least 1")
    if n > k:
        raise ValueError(f"strength {n} exceeds the number of ports ({k})")
    gen = FastNWise(candidates, seed)
    return NWiseSuite(n, tuple(gen.suite(n, k - 1)))


def covers_nwise(cases, candidates, n: int) -> bool:
    """Brute-force check: every value combination of every n ports appears."""
    cases = list(cases)
    for subset in itertools.combinations(range(len(candidates)), n):
        seen = {tuple(case[i] for i in subset) for case in cases}
        for combo in itertools.product(*(candidates[i] for i in subset)):
            if combo not in seen:
                return False
    return True
