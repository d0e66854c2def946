from collections import namedtuple
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx

from llpm.counter import Counter
from llpm.datatypes import HWType
from llpm.definitions.ops import OpKind

Edge = namedtuple("Edge", ["src", "dst", "index"])


@dataclass(frozen=True)
class Node:
    """
    One dataflow node. Every node has a single output; inputs lists the ids
    of the producers feeding each input slot, in order.
    """

    id: int
    kind: OpKind
    inputs: Tuple[int, ...] = ()
    name: Optional[str] = None
    type: Optional[HWType] = None
    value: Any = None
    field: Optional[str] = None
    variant: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def is_delay(self) -> bool:
        return self.kind == OpKind.DELAY

    @property
    def label(self) -> str:
        """Short description used in diagnostics."""
        detail = self.name or self.field or self.variant
        return f"{self.kind.nickname}#{self.id}" + (f"({detail})" if detail else "")


@dataclass(frozen=True)
class DataflowGraph:
    """
    Rate-1 synchronous dataflow graph. Nodes are kept sorted by id.
    """

    nodes: Tuple[Node, ...] = ()
    _index: Dict[int, Node] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.nodes, key=lambda n: n.id))
        object.__setattr__(self, "nodes", ordered)
        object.__setattr__(self, "_index", {n.id: n for n in ordered})

    def __contains__(self, node_id):
        return node_id in self._index

    def __len__(self):
        return len(self.nodes)

    def node(self, node_id: int) -> Node:
        return self._index[node_id]

    @property
    def node_ids(self) -> List[int]:
        return [n.id for n in self.nodes]

    def edges(self) -> List[Edge]:
        """All edges, ordered by consumer id then input slot."""
        return [Edge(src, n.id, i) for n in self.nodes for i, src in enumerate(n.inputs)]

    def consumers(self, node_id: int) -> List[Edge]:
        return [e for e in self.edges() if e.src == node_id]

    def nodes_of_kind(self, kind: OpKind) -> List[Node]:
        return [n for n in self.nodes if n.kind == kind]

    def input_node(self, name: str) -> Optional[Node]:
        return next((n for n in self.nodes_of_kind(OpKind.INPUT) if n.name == name), None)

    def output_node(self, name: str) -> Optional[Node]:
        return next((n for n in self.nodes_of_kind(OpKind.OUTPUT) if n.name == name), None)

    def combinational_graph(self) -> nx.DiGraph:
        """
        Graph of the edges that carry a value within one firing: edges leaving
        a Delay are dropped, so Delay outputs act as sources and Delay inputs
        as sinks.
        """
        g = nx.DiGraph()
        g.add_nodes_from(self.node_ids)
        for e in self.edges():
            if e.src in self._index and not self._index[e.src].is_delay:
                g.add_edge(e.src, e.dst)
        return g

    def full_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.node_ids)
        g.add_edges_from((e.src, e.dst) for e in self.edges() if e.src in self._index)
        return g

    def replace_nodes(self, nodes) -> "DataflowGraph":
        return DataflowGraph(tuple(nodes))


class GraphBuilder:
    """
    Incremental construction of a DataflowGraph, one method per op kind.
    Each method returns the id of the node it added.
    """

    def __init__(self):
        self.counter = Counter()
        self.nodes: List[Node] = []

    def add(self, kind: OpKind, inputs=(), **attrs) -> int:
        node = Node(self.counter.next(), kind, tuple(inputs), **attrs)
        self.nodes.append(node)
        return node.id

    def input(self, name, type):
        return self.add(OpKind.INPUT, name=name, type=type)

    def output(self, name, src):
        return self.add(OpKind.OUTPUT, (src,), name=name)

    def const(self, type, value):
        return self.add(OpKind.CONST, type=type, value=value)

    def add_op(self, a, b):
        return self.add(OpKind.ADD, (a, b))

    def sub(self, a, b):
        return self.add(OpKind.SUB, (a, b))

    def mul(self, a, b):
        return self.add(OpKind.MUL, (a, b))

    def eq(self, a, b):
        return self.add(OpKind.EQ, (a, b))

    def lt(self, a, b):
        return self.add(OpKind.LT, (a, b))

    def and_op(self, a, b):
        return self.add(OpKind.AND, (a, b))

    def or_op(self, a, b):
        return self.add(OpKind.OR, (a, b))

    def xor(self, a, b):
        return self.add(OpKind.XOR, (a, b))

    def not_op(self, a):
        return self.add(OpKind.NOT, (a,))

    def mux(self, sel, a, b):
        return self.add(OpKind.MUX, (sel, a, b))

    def struct_pack(self, type, *fields):
        return self.add(OpKind.STRUCT_PACK, fields, type=type)

    def field_extract(self, src, field):
        return self.add(OpKind.FIELD_EXTRACT, (src,), field=field)

    def array_pack(self, type, *elems):
        return self.add(OpKind.ARRAY_PACK, elems, type=type)

    def array_index(self, array, index):
        return self.add(OpKind.ARRAY_INDEX, (array, index))

    def union_pack(self, type, variant, src):
        return self.add(OpKind.UNION_PACK, (src,), type=type, variant=variant)

    def tag_of(self, src):
        return self.add(OpKind.TAG_OF, (src,))

    def unwrap_variant(self, src, variant):
        return self.add(OpKind.UNWRAP_VARIANT, (src,), variant=variant)

    def delay(self, type, init, src=None):
        """
        Add a Delay. The input may be left open (src=None) and closed later with
        connect(), which is how feedback loops are built.
        """
        return self.add(OpKind.DELAY, (src,) if src is not None else (), type=type, value=init)

    def connect(self, node_id, *inputs):
        """Replace the inputs of an already added node."""
        for position, node in enumerate(self.nodes):
            if node.id == node_id:
                self.nodes[position] = Node(
                    node.id, node.kind, tuple(inputs), node.name, node.type, node.value, node.field, node.variant
                )
                return
        raise KeyError(node_id)

    def build(self) -> DataflowGraph:
        return DataflowGraph(tuple(self.nodes))
