"""Public execution entry points."""

from __future__ import annotations

import threading

from ..ir.instrument import InstrumentedModel, instrument
from ..ir.lower import Program, lower
from ..ir.model import ModelIR
from .compiler import CompiledModel
from .interp import interpret
from .testcase import LayoutMismatch, TestCase
from .trace import ExecutionTrace, Fault, cap_vectors, hits_for


class Executor:
    """Compiled executor for one instrumented model.

    ``run`` gives a full trace (outputs and state snapshots); ``coverage``
    skips output recording and is what the fuzzing loop calls.
    """

    def __init__(self, model: InstrumentedModel):
        self.model = model
        self.program = model.program
        self._full = CompiledModel(model.program, record_outputs=True)
        self._fast = CompiledModel(model.program, record_outputs=False)
        self.total_bytes = model.program.layout.total_bytes

    @property
    def source(self) -> str:
        return self._full.source

    def _trace(self, result, data) -> ExecutionTrace:
        outputs, states, ev, fault = result
        if fault is None:
            hits = hits_for(self.program, None, None)
            f = None
        else:
            kind, step, block = fault
            hits = hits_for(self.program, step, block)
            f = Fault(kind, step, self.program.unit_ids[block])
        return ExecutionTrace(outputs or {}, states or [], cap_vectors(ev), hits, f)

    def _data(self, test) -> bytes:
        data = test.data if isinstance(test, TestCase) else test
        if len(data) != self.total_bytes:
            raise LayoutMismatch(f"buffer has {len(data)} bytes, layout needs {self.total_bytes}")
        return data

    def run(self, test) -> ExecutionTrace:
        data = self._data(test)
        return self._trace(self._full.run(data), data)

    def coverage(self, test) -> ExecutionTrace:
        data = self._data(test)
        return self._trace(self._fast.run(data), data)


_cache: dict = {}
_cache_lock = threading.Lock()


def executor_for(model: InstrumentedModel) -> Executor:
    key = id(model)
    with _cache_lock:
        hit = _cache.get(key)
        if hit is not None and hit[0] is model:
            return hit[1]
    ex = Executor(model)
    with _cache_lock:
        if len(_cache) >= 64:
            _cache.clear()
        _cache[key] = (model, ex)
    return ex


def execute(model: InstrumentedModel | ModelIR, test) -> ExecutionTrace:
    """Run the instrumented model on one test case with the compiled executor."""
    if isinstance(model, ModelIR):
        model = instrument(model)
    return executor_for(model).run(test)


def execute_uninstrumented(model: ModelIR | Program | InstrumentedModel, test) -> ExecutionTrace:
    """Run the plain (unrewritten) model with the reference interpreter.

    Coverage fields of the result stay empty; outputs, state snapshots and
    faults are directly comparable with ``execute``.
    """
    if isinstance(model, InstrumentedModel):
        program = model.base
    elif isinstance(model, ModelIR):
        program = lower(model)
    else:
        program = model
    data = test.data if isinstance(test, TestCase) else bytes(test)
    return interpret(program, data)


def execute_reference(model: InstrumentedModel, test, step_vectors: bool = False) -> ExecutionTrace:
    """Instrumented execution through the interpreter (slow, step-aware)."""
    data = test.data if isinstance(test, TestCase) else bytes(test)
    return interpret(model.program, data, step_vectors)
