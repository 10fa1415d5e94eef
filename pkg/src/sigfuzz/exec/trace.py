"""Execution results shared by both executors."""

from __future__ import annotations

from dataclasses import dataclass, field

LOOP_CAP = 10_000  # iterations per while-loop entry
VECTOR_CAP = 4_096  # distinct coverage vectors kept per decision per trace

FAULT_DIV_ZERO = "div-by-zero"
FAULT_LOOP_CAP = "loop-cap"


class ExecFault(Exception):
    def __init__(self, kind: str, block: int):
        super().__init__(kind)
        self.kind = kind
        self.block = block  # index into model.blocks


@dataclass(frozen=True)
class Fault:
    kind: str
    step: int
    block: str


@dataclass
class ExecutionTrace:
    outputs: dict  # port id -> per-step values (completed steps only)
    states: list  # per completed step: tuple of state values after the step
    evaluations: dict = field(default_factory=dict)  # decision id -> set of vectors
    unit_hits: frozenset = frozenset()
    fault: Fault | None = None
    step_vectors: list | None = None  # (decision, step, vector) in evaluation order

    @property
    def steps_completed(self) -> int:
        return len(self.states)


def cap_vectors(evaluations: dict) -> dict:
    """Enforce VECTOR_CAP; keeps the numerically smallest vectors so the
    result does not depend on set iteration order."""
    for d, vs in evaluations.items():
        if len(vs) > VECTOR_CAP:
            evaluations[d] = set(sorted(vs)[:VECTOR_CAP])
    return evaluations


def hits_for(program, fault_step: int | None, fault_block: int | None) -> frozenset:
    """Blocks that started executing, given where (if anywhere) a fault hit."""
    ids = program.unit_ids
    if fault_step is None or fault_step > 0:
        return frozenset(ids)
    hit = {ids[dl.index] for dl in program.delays}
    for lb in program.blocks:
        hit.add(lb.id)
        if lb.index == fault_block:
            break
    return frozenset(hit)
