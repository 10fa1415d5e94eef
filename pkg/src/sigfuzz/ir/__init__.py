"""Model intermediate representation: parsing, validation, layout, instrumentation."""

from .instrument import DecisionInfo, InstrumentedModel, InstrumentError, instrument
from .layout import BufferLayout, ConstantDictionary, LayoutEntry, layout_test_buffer, mine_constants
from .lower import Program, lower
from .model import Block, Diagnostic, Link, ModelError, ModelIR, PortDecl
from .parser import parse_expression, parse_model, parse_statements
from .printer import print_model
from .types import ValueType

__all__ = [
    "Block",
    "BufferLayout",
    "ConstantDictionary",
    "DecisionInfo",
    "Diagnostic",
    "InstrumentError",
    "InstrumentedModel",
    "LayoutEntry",
    "Link",
    "ModelError",
    "ModelIR",
    "PortDecl",
    "Program",
    "ValueType",
    "instrument",
    "layout_test_buffer",
    "lower",
    "mine_constants",
    "parse_expression",
    "parse_model",
    "parse_statements",
    "print_model",
]
