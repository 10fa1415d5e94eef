"""Model execution: input binding, compiled and reference executors, corpus files."""

from .engine import Executor, execute, execute_reference, execute_uninstrumented, executor_for
from .testcase import LayoutMismatch, TestCase, bind_inputs, encode_inputs, zero_test
from .trace import ExecFault, ExecutionTrace, Fault

__all__ = [
    "ExecFault",
    "ExecutionTrace",
    "Executor",
    "Fault",
    "LayoutMismatch",
    "TestCase",
    "bind_inputs",
    "encode_inputs",
    "execute",
    "execute_reference",
    "execute_uninstrumented",
    "executor_for",
    "zero_test",
]
