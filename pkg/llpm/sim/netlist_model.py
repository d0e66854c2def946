"""
Cycle model of a PipelinedNetlist behind its latency-insensitive wrapper.

Inputs join: a firing consumes one token from every input channel, and an
input is ready when every other input is valid and the pipeline is not
stalled. Outputs fork eagerly: each output keeps a sent flag so the head
token is offered until every output channel has taken it.
"""

from typing import Dict

from llpm.definitions.graph import Edge
from llpm.definitions.ops import OpKind, evaluate
from llpm.errors import SimulationError
from llpm.pipeline import PipelinedNetlist
from llpm.sim.kernel import Channel, Component
from llpm.values import zero_value


class NetlistComponent(Component):
    def __init__(self, name: str, netlist: PipelinedNetlist, inputs: Dict[str, Channel], outputs: Dict[str, Channel]):
        self.name = name
        self.netlist = netlist
        self.graph = netlist.graph
        self.types = netlist.types
        self.inputs = inputs
        self.outputs = outputs
        missing = [p.name for p in netlist.module.ports if p.name not in inputs and p.name not in outputs]
        if missing:
            raise SimulationError(f"{name}: ports {missing} are not bound to channels")
        self.in_nodes = {n.name: n.id for n in self.graph.nodes_of_kind(OpKind.INPUT)}
        self.out_nodes = {n.name: n.id for n in self.graph.nodes_of_kind(OpKind.OUTPUT)}
        self.delay_drivers = {n.id: Edge(n.inputs[0], n.id, 0) for n in self.graph.nodes_of_kind(OpKind.DELAY)}
        self.edges_of = {node_id: [] for node_id in self.graph.node_ids}
        for e in self.graph.edges():
            self.edges_of[e.dst].append(e)
        self.reset()

    def reset(self):
        """State after the synchronous reset: empty valid chain, Delays at init."""
        self.registers = {
            e: [zero_value(self.types[e.src]) for _ in range(count)] for e, count in self.netlist.registers.items()
        }
        self.valid = [False] * self.netlist.latency
        self.delay_state = {node_id: self.graph.node(node_id).value for node_id in self.delay_drivers}
        self.sent = {name: False for name in self.outputs}
        self._values = None
        self._values_key = None

    @property
    def latency(self) -> int:
        return self.netlist.latency

    def _inputs_valid(self) -> bool:
        return all(channel.valid for channel in self.inputs.values())

    def token_valid(self, stage: int) -> bool:
        """Whether the token currently at `stage` is a real token and not a bubble."""
        if stage == 0:
            return self._inputs_valid()
        return self.valid[stage - 1]

    @property
    def head_valid(self) -> bool:
        return self.token_valid(self.latency)

    def _read(self, e: Edge, values):
        chain = self.registers[e]
        return chain[-1] if chain else values[e.src]

    def values(self):
        """Combinational value of every node for the tokens currently in flight."""
        key = tuple(
            (name, channel.valid, repr(channel.data)) for name, channel in sorted(self.inputs.items())
        )
        if self._values is not None and key == self._values_key:
            return self._values
        values = dict(self.delay_state)
        for node_id in self.netlist.order:
            node = self.graph.node(node_id)
            if node.kind == OpKind.INPUT:
                channel = self.inputs[node.name]
                values[node_id] = channel.data if channel.valid else zero_value(node.type)
            elif node.is_delay:
                values[node_id] = self.delay_state[node_id]
            else:
                args = [self._read(e, values) for e in self.edges_of[node_id]]
                values[node_id] = evaluate(
                    node.kind,
                    args,
                    self.types[node_id],
                    [self.types[src] for src in node.inputs],
                    field=node.field,
                    variant=node.variant,
                    value=node.value,
                )
        self._values, self._values_key = values, key
        return values

    def done(self) -> bool:
        return all(self.sent[name] or channel.ready for name, channel in self.outputs.items())

    def stall(self) -> bool:
        return self.head_valid and not self.done()

    def forward(self):
        values = self.values()
        head = self.head_valid
        for name, channel in self.outputs.items():
            offering = head and not self.sent[name]
            channel.drive(offering, values[self.out_nodes[name]] if offering else None)

    def backward(self):
        if self.latency == 0:
            go = self.done()
        else:
            go = not self.stall()
        for name, channel in self.inputs.items():
            others = all(other.valid for other_name, other in self.inputs.items() if other_name != name)
            channel.ready = others and go

    def commit(self):
        values = self.values()
        stalled = self.stall()
        if stalled:
            for name, channel in self.outputs.items():
                if channel.fire:
                    self.sent[name] = True
            return
        for node_id, e in self.delay_drivers.items():
            if self.token_valid(self.netlist.stages[node_id]):
                self.delay_state[node_id] = self._read(e, values)
        for e, chain in self.registers.items():
            if chain:
                chain.insert(0, values[e.src])
                chain.pop()
        if self.valid:
            self.valid = [self._inputs_valid()] + self.valid[:-1]
        for name in self.sent:
            self.sent[name] = False
        self._values = None
