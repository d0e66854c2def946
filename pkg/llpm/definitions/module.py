from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from llpm.datatypes import HWType
from llpm.definitions.graph import DataflowGraph


class Direction(Enum):
    IN = "in"
    OUT = "out"

    @property
    def nickname(self):
        return self.value


@dataclass(frozen=True)
class Port:
    """
    A typed latency-insensitive channel endpoint of a module.
    """

    name: str
    direction: Direction
    type: HWType

    @property
    def width(self) -> int:
        return self.type.bit_width


@dataclass(frozen=True)
class DataflowBody:
    graph: DataflowGraph


@dataclass(frozen=True)
class SignalNames:
    """RTL signal names realizing one LI channel of an extern module."""

    data: Optional[str]
    valid: str
    ready: str


@dataclass(frozen=True)
class ExternBody:
    """
    Pre-existing RTL wrapped with typed LI port metadata. The optional model is
    a behavioral dataflow graph used by the interpreter and the simulator.
    """

    sources: Tuple[str, ...]
    top: str
    signals: Dict[str, SignalNames] = field(default_factory=dict, compare=False)
    model: Optional[DataflowGraph] = None
    registered: bool = False


@dataclass(frozen=True)
class Module:
    name: str
    ports: Tuple[Port, ...]
    body: object

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))

    @property
    def is_extern(self) -> bool:
        return isinstance(self.body, ExternBody)

    @property
    def behavior(self) -> Optional[DataflowGraph]:
        """The graph that defines the module's token semantics, if any."""
        if isinstance(self.body, DataflowBody):
            return self.body.graph
        return self.body.model

    @property
    def inputs(self):
        return [p for p in self.ports if p.direction == Direction.IN]

    @property
    def outputs(self):
        return [p for p in self.ports if p.direction == Direction.OUT]

    def port(self, name: str) -> Optional[Port]:
        return next((p for p in self.ports if p.name == name), None)

    def with_graph(self, graph: DataflowGraph) -> "Module":
        """Copy of the module whose behavior graph is replaced."""
        if isinstance(self.body, DataflowBody):
            return Module(self.name, self.ports, DataflowBody(graph))
        body = self.body
        return Module(self.name, self.ports, ExternBody(body.sources, body.top, body.signals, graph, body.registered))
