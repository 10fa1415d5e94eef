"""Time allowances for seed generation, on a wall or a work-unit clock.

The work clock charges solver nodes and model replays, so a run with the
same inputs always stops at the same point.
"""

from __future__ import annotations

import time

WORK_RATE = 10_000  # work units per logical second (about one solver node each)
REPLAY_COST = 20  # units charged per unrolled path or verification run


class Budget:
    def __init__(self, seconds: float | None, logical: bool = True):
        self.seconds = seconds
        self.logical = logical
        self.used = 0
        self.start = time.perf_counter()

    @classmethod
    def unlimited(cls) -> "Budget":
        return cls(None)

    def charge(self, units: int) -> None:
        self.used += units

    def elapsed(self) -> float:
        if self.logical:
            return self.used / WORK_RATE
        return time.perf_counter() - self.start

    def expired(self) -> bool:
        return self.seconds is not None and self.elapsed() >= self.seconds

    def until(self, seconds: float) -> "Budget":
        """A view of this budget that expires once ``seconds`` have elapsed."""
        return _Window(self, seconds)


class _Window(Budget):
    def __init__(self, parent: Budget, seconds: float):
        self.parent = parent
        self.seconds = seconds
        self.logical = parent.logical

    @property
    def used(self):
        return self.parent.used

    def charge(self, units: int) -> None:
        self.parent.charge(units)

    def elapsed(self) -> float:
        return self.parent.elapsed()

    def expired(self) -> bool:
        return self.parent.expired() or self.elapsed() >= self.seconds
