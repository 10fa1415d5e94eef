"""Block-diagram model IR: ports, blocks, links."""

from __future__ import annotations

from dataclasses import dataclass, field

from .types import ValueType

BLOCK_KINDS = (
    "Constant",
    "Add",
    "Gain",
    "UnitDelay",
    "RelationalOp",
    "LogicOp",
    "Switch",
    "Saturate",
    "Script",
)

RELOP_NAMES = {"lt": "<", "le": "<=", "gt": ">", "ge": ">=", "eq": "==", "ne": "!="}
MAX_CONDITIONS = 63


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.kind}: {self.message}"


class ModelError(Exception):
    """Raised with one or more diagnostics when a model is rejected."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def kinds(self) -> set:
        return {d.kind for d in self.diagnostics}


@dataclass(frozen=True)
class PortDecl:
    id: str
    direction: str  # "in" | "out"
    kind: str  # "signal" | "const"
    value_type: ValueType
    width: int = 1
    range: tuple | None = None
    candidates: tuple | None = None

    @property
    def is_input(self) -> bool:
        return self.direction == "in"

    @property
    def is_signal(self) -> bool:
        return self.kind == "signal"


@dataclass(frozen=True)
class Block:
    id: str
    kind: str
    params: dict = field(default_factory=dict)
    # Script only: (name, type, default-or-None), (name, type), (name, type, init)
    inputs: tuple = ()
    outputs: tuple = ()
    state_vars: tuple = ()
    body: tuple = ()

    @property
    def n_inputs(self) -> int:
        k = self.kind
        if k == "Constant":
            return 0
        if k == "Add":
            return len(self.params.get("signs", "++"))
        if k in ("Gain", "UnitDelay", "Saturate"):
            return 1
        if k == "RelationalOp":
            return 2
        if k == "LogicOp":
            if self.params.get("op", "AND") == "NOT":
                return 1
            return int(self.params.get("inputs", 2))
        if k == "Switch":
            return 3
        return len(self.inputs)

    @property
    def n_outputs(self) -> int:
        if self.kind == "Script":
            return len(self.outputs)
        return 1


@dataclass(frozen=True)
class Link:
    src: str
    src_idx: int
    dst: str
    dst_idx: int


@dataclass(frozen=True)
class ModelIR:
    name: str
    sample_count: int
    ports: tuple = ()
    blocks: tuple = ()
    links: tuple = ()

    @property
    def input_ports(self) -> tuple:
        return tuple(p for p in self.ports if p.is_input)

    @property
    def output_ports(self) -> tuple:
        return tuple(p for p in self.ports if not p.is_input)

    def port(self, pid: str) -> PortDecl:
        for p in self.ports:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def block(self, bid: str) -> Block:
        for b in self.blocks:
            if b.id == bid:
                return b
        raise KeyError(bid)
