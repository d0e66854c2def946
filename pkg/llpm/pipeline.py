"""
Automatic pipelining: ASAP stage scheduling of a dataflow graph and its
realization as a stage-registered netlist behind a latency-insensitive
ready/valid wrapper with a global stall.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import networkx as nx
from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from llpm.datatypes import HWType
from llpm.definitions.graph import DataflowGraph, Edge
from llpm.definitions.module import DataflowBody, Module
from llpm.definitions.ops import OpKind
from llpm.definitions.schemas import GraphSchema, OpKindField, PortSchema, graph_to_json, port_to_json
from llpm.errors import LlpmError
from llpm.passes import dead_node_elim, infer_types, topo_order

_logger = logging.getLogger("llpm")

NETLIST_SCHEMA_VERSION = 1

DEFAULT_LATENCIES = {
    OpKind.INPUT: 0,
    OpKind.OUTPUT: 0,
    OpKind.CONST: 0,
    OpKind.STRUCT_PACK: 0,
    OpKind.FIELD_EXTRACT: 0,
    OpKind.ARRAY_PACK: 0,
    OpKind.UNION_PACK: 0,
    OpKind.TAG_OF: 0,
    OpKind.UNWRAP_VARIANT: 0,
    OpKind.ADD: 1,
    OpKind.SUB: 1,
    OpKind.EQ: 1,
    OpKind.LT: 1,
    OpKind.AND: 1,
    OpKind.OR: 1,
    OpKind.XOR: 1,
    OpKind.NOT: 1,
    OpKind.MUX: 1,
    OpKind.ARRAY_INDEX: 1,
    OpKind.MUL: 2,
    OpKind.DELAY: 1,
}


class LatencyTable:
    """
    Latency in cycles of every op kind. Delay is fixed at one token.
    """

    def __init__(self, overrides: Optional[Mapping[OpKind, int]] = None):
        self.latencies: Dict[OpKind, int] = dict(DEFAULT_LATENCIES)
        for kind, cycles in (overrides or {}).items():
            kind = OpKind(kind)
            if not isinstance(cycles, int) or isinstance(cycles, bool) or cycles < 0:
                raise LlpmError(f"latency of {kind.nickname} must be a nonnegative integer, got {cycles!r}")
            if kind == OpKind.DELAY and cycles != 1:
                raise LlpmError("the latency of delay is fixed at 1")
            self.latencies[kind] = cycles

    def __getitem__(self, kind: OpKind) -> int:
        return self.latencies[kind]

    def __eq__(self, other):
        return isinstance(other, LatencyTable) and self.latencies == other.latencies

    def to_json(self) -> dict:
        return {kind.nickname: self.latencies[kind] for kind in OpKind}

    @classmethod
    def from_mapping(cls, data) -> "LatencyTable":
        """
        Build a table from a {op name: cycles} mapping, as read from YAML or JSON.

        Raises:
            marshmallow.ValidationError: unknown op names or bad values
        """
        return LatencyTableSchema().load({"latencies": data or {}})


class LatencyTableSchema(Schema):
    latencies = fields.Dict(keys=OpKindField(), values=fields.Integer(strict=True, validate=validate.Range(min=0)))

    @validates_schema
    def validate_delay(self, data, **kwargs):
        if data.get("latencies", {}).get(OpKind.DELAY, 1) != 1:
            raise ValidationError("The latency of delay is fixed at 1.", "latencies")

    @post_load
    def make_table(self, data, **kwargs):
        return LatencyTable(data.get("latencies"))


@dataclass
class Schedule:
    """
    Start stage of every node. `latency` is the stage at which every
    OutputPort emits; `chained_edges` lists edges inside recurrences that
    are evaluated within one stage.
    """

    stages: Dict[int, int]
    latency: int
    chained_edges: List[Edge] = field(default_factory=list)

    def __getitem__(self, node_id: int) -> int:
        return self.stages[node_id]


def is_exempt(graph: DataflowGraph, e: Edge) -> bool:
    """Edges touching a Delay cross a token boundary instead of a stage boundary."""
    return graph.node(e.src).is_delay or graph.node(e.dst).is_delay


def schedule(graph: DataflowGraph, table: Optional[LatencyTable] = None) -> Schedule:
    """
    ASAP schedule: a node starts at the latest stage at which all of its
    non-Delay producers have finished; inputs start at stage 0.

    A Delay sits at its driver's stage; its consumers sit at or after it.
    Recurrences through Delays are chained into one stage. OutputPorts are
    aligned to the latest output stage.
    """
    table = table or LatencyTable()
    full = graph.full_graph()
    condensed = nx.condensation(full)
    members = condensed.graph["mapping"]
    recurrent = {
        c
        for c in condensed.nodes
        if len(condensed.nodes[c]["members"]) > 1 or any(full.has_edge(n, n) for n in condensed.nodes[c]["members"])
    }

    chained = []
    weights = {}
    for e in graph.edges():
        if is_exempt(graph, e):
            weights[e] = 0
        elif members[e.src] == members[e.dst] and members[e.src] in recurrent:
            weights[e] = 0
            chained.append(e)
        else:
            weights[e] = table[graph.node(e.src).kind]

    incoming: Dict[int, List[Edge]] = {}
    for e in graph.edges():
        incoming.setdefault(e.dst, []).append(e)

    stages: Dict[int, int] = {}
    for component in nx.lexicographical_topological_sort(condensed, key=lambda c: min(condensed.nodes[c]["members"])):
        nodes = condensed.nodes[component]["members"]
        start = 0
        for node_id in nodes:
            for e in incoming.get(node_id, []):
                if e.src not in nodes:
                    start = max(start, stages[e.src] + weights[e])
        for node_id in nodes:
            stages[node_id] = start

    outputs = graph.nodes_of_kind(OpKind.OUTPUT)
    latency = max((stages[n.id] for n in outputs), default=0)
    for n in outputs:
        stages[n.id] = latency
    if chained:
        _logger.info("chained %d edges inside recurrences", len(chained))
    return Schedule(stages, latency, chained)


def check_schedule(graph: DataflowGraph, sched: Schedule, table: Optional[LatencyTable] = None) -> List[str]:
    """
    Legality check: every non-Delay edge that is not chained satisfies
    stage(dst) >= stage(src) + latency(src). Returns a list of violations.
    """
    table = table or LatencyTable()
    chained = set(sched.chained_edges)
    problems = []
    for e in graph.edges():
        if e.src not in sched.stages or e.dst not in sched.stages:
            problems.append(f"edge {e} references an unscheduled node")
            continue
        if sched[e.dst] < sched[e.src]:
            problems.append(f"edge {e.src}->{e.dst} goes backwards ({sched[e.src]} -> {sched[e.dst]})")
        elif not is_exempt(graph, e) and e not in chained:
            needed = sched[e.src] + table[graph.node(e.src).kind]
            if sched[e.dst] < needed:
                problems.append(f"edge {e.src}->{e.dst}: stage {sched[e.dst]} < {needed}")
    return problems


@dataclass
class PipelinedNetlist:
    """
    Stage-scheduled synchronous realization of a dataflow module.

    registers maps every live edge to the number of data registers it
    crosses; a consumer reads the last register of its edge's chain, or the
    producer's combinational value when the chain is empty. Every data
    register shifts when the pipeline is not stalled; the valid chain has
    `latency` bits.
    """

    module: Module
    graph: DataflowGraph
    stages: Dict[int, int]
    latency: int
    order: List[int]
    registers: Dict[Edge, int]
    latency_table: LatencyTable = field(default_factory=LatencyTable)
    chained_edges: List[Edge] = field(default_factory=list)
    types: Dict[int, HWType] = field(default=None)

    def __post_init__(self):
        if self.types is None:
            self.types = infer_types(self.graph)

    @property
    def name(self) -> str:
        return self.module.name

    @property
    def register_count(self) -> int:
        return sum(self.registers.values())

    def delays(self):
        return self.graph.nodes_of_kind(OpKind.DELAY)

    def without_register(self, e: Edge) -> "PipelinedNetlist":
        """Copy with one data register removed from an edge (mutation testing)."""
        registers = dict(self.registers)
        if registers.get(e, 0) < 1:
            raise LlpmError(f"edge {e} carries no register")
        registers[e] -= 1
        return PipelinedNetlist(
            self.module,
            self.graph,
            self.stages,
            self.latency,
            self.order,
            registers,
            self.latency_table,
            self.chained_edges,
            self.types,
        )


def pipeline(module: Module, sched: Optional[Schedule] = None, table: Optional[LatencyTable] = None) -> PipelinedNetlist:
    """
    Realize a module as a pipelined netlist.

    Dead nodes are removed first; one register is inserted per stage
    boundary crossed by each remaining edge.
    """
    table = table or LatencyTable()
    graph = dead_node_elim(module.behavior)
    if sched is None:
        sched = schedule(graph, table)
    stages = {n.id: sched[n.id] for n in graph.nodes}
    latency = max((stages[n.id] for n in graph.nodes_of_kind(OpKind.OUTPUT)), default=0)
    registers = {e: stages[e.dst] - stages[e.src] for e in graph.edges()}
    chained = [e for e in sched.chained_edges if e.src in graph and e.dst in graph]
    netlist = PipelinedNetlist(module.with_graph(graph), graph, stages, latency, topo_order(graph), registers, table, chained)
    _logger.debug("pipelined %s: latency %d, %d registers", module.name, latency, netlist.register_count)
    return netlist


def netlist_to_json(netlist: PipelinedNetlist) -> dict:
    """Versioned JSON form of a netlist; field names are stable."""
    return {
        "llpm_schema": NETLIST_SCHEMA_VERSION,
        "kind": "netlist",
        "name": netlist.name,
        "ports": [port_to_json(p) for p in netlist.module.ports],
        "graph": graph_to_json(netlist.graph),
        "latency_table": netlist.latency_table.to_json(),
        "latency": netlist.latency,
        "stages": [[node_id, netlist.stages[node_id]] for node_id in sorted(netlist.stages)],
        "order": list(netlist.order),
        "registers": [
            {"src": e.src, "dst": e.dst, "index": e.index, "count": count} for e, count in netlist.registers.items()
        ],
        "chained_edges": [[e.src, e.dst, e.index] for e in netlist.chained_edges],
        "register_count": netlist.register_count,
    }


class RegisterSchema(Schema):
    src = fields.Integer(required=True, strict=True)
    dst = fields.Integer(required=True, strict=True)
    index = fields.Integer(required=True, strict=True, validate=validate.Range(min=0))
    count = fields.Integer(required=True, strict=True, validate=validate.Range(min=0))


class NetlistSchema(Schema):
    llpm_schema = fields.Integer(required=True, validate=validate.Equal(NETLIST_SCHEMA_VERSION))
    kind = fields.String(required=True, validate=validate.Equal("netlist"))
    name = fields.String(required=True)
    ports = fields.List(fields.Nested(PortSchema), required=True)
    graph = fields.Nested(GraphSchema, required=True)
    latency_table = fields.Dict(keys=fields.String(), values=fields.Integer(), load_default=dict)
    latency = fields.Integer(required=True, validate=validate.Range(min=0))
    stages = fields.List(fields.Tuple((fields.Integer(), fields.Integer())), required=True)
    order = fields.List(fields.Integer(), required=True)
    registers = fields.List(fields.Nested(RegisterSchema), required=True)
    chained_edges = fields.List(fields.Tuple((fields.Integer(), fields.Integer(), fields.Integer())), load_default=list)
    register_count = fields.Integer()

    @post_load
    def make_netlist(self, data, **kwargs) -> PipelinedNetlist:
        graph = data["graph"]
        edges = set(graph.edges())
        registers = {}
        for r in data["registers"]:
            e = Edge(r["src"], r["dst"], r["index"])
            if e not in edges:
                raise ValidationError(f"Register entry for unknown edge {tuple(e)}.", "registers")
            registers[e] = r["count"]
        missing = edges - set(registers)
        if missing:
            raise ValidationError(f"No register entry for edges {sorted(tuple(e) for e in missing)}.", "registers")
        stages = dict(data["stages"])
        if set(stages) != set(graph.node_ids) or sorted(data["order"]) != sorted(graph.node_ids):
            raise ValidationError("Stages and order must cover every node exactly once.", "stages")
        module = Module(data["name"], tuple(data["ports"]), DataflowBody(graph))
        return PipelinedNetlist(
            module,
            graph,
            stages,
            data["latency"],
            list(data["order"]),
            registers,
            LatencyTable.from_mapping(data["latency_table"]),
            [Edge(*e) for e in data["chained_edges"]],
        )


def netlist_from_json(data: dict) -> PipelinedNetlist:
    """
    Raises:
        marshmallow.ValidationError: schema violations, path-addressed
    """
    return NetlistSchema().load(data)


def stage_boundaries(netlist: PipelinedNetlist) -> List[Tuple[Edge, int]]:
    """(edge, k) for every data register, k counting from the producer side."""
    return [(e, k) for e, count in netlist.registers.items() for k in range(count)]
