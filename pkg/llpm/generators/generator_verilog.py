"""
Verilog-2001 backend.

Port contract: `clk`, `rst` (synchronous, active high) and per channel
`<name>_data` ([W-1:0], omitted when W=0), `<name>_valid`, `<name>_ready`.
A token transfers on the rising clock edge where valid and ready are both
high. Internal signals carry the `llpm_` prefix.
"""

import logging
import os
from collections import Counter
from typing import List

from jinja2 import Environment, PackageLoader, select_autoescape

from llpm.codec import encode_int
from llpm.datatypes import Array, Union
from llpm.definitions.graph import Edge
from llpm.definitions.module import Direction
from llpm.definitions.ops import OpKind
from llpm.errors import EmitError
from llpm.generators.filters import bit, conjunction, literal, signed_operand, vrange
from llpm.pipeline import PipelinedNetlist

_logger = logging.getLogger("llpm")

env = Environment(loader=PackageLoader("llpm"), autoescape=select_autoescape(), trim_blocks=True, lstrip_blocks=True)

_BINARY = {
    OpKind.ADD: "+",
    OpKind.SUB: "-",
    OpKind.MUL: "*",
    OpKind.AND: "&",
    OpKind.OR: "|",
    OpKind.XOR: "^",
}


def channel_ports(name: str, width: int, direction: Direction) -> List[str]:
    """Port declarations of one LI channel, seen from the module that owns it."""
    forward, backward = ("input", "output") if direction == Direction.IN else ("output", "input")
    ports = []
    if width > 0:
        ports.append(f"{forward} wire {vrange(width)}{name}_data")
    ports.append(f"{forward} wire {name}_valid")
    ports.append(f"{backward} wire {name}_ready")
    return ports


def check_unique(names, context: str) -> None:
    """
    Raises:
        EmitError: naming every identifier declared more than once
    """
    duplicates = sorted(name for name, count in Counter(names).items() if count > 1)
    if duplicates:
        raise EmitError(f"identifier collision in {context}: {', '.join(duplicates)}")


class ModuleWriter:
    """
    Lays out the declarations, assignments and register processes of one
    pipelined netlist.
    """

    def __init__(self, netlist: PipelinedNetlist, name: str):
        self.netlist = netlist
        self.name = name
        self.graph = netlist.graph
        self.types = netlist.types
        self.latency = netlist.latency
        self.inputs = netlist.module.inputs
        self.outputs = netlist.module.outputs

    def width(self, node_id: int) -> int:
        return self.types[node_id].bit_width

    def value_name(self, node_id: int) -> str:
        node = self.graph.node(node_id)
        if node.kind == OpKind.INPUT:
            return f"{node.name}_data"
        if node.is_delay:
            return f"llpm_d{node_id}"
        return f"llpm_n{node_id}"

    @staticmethod
    def register_name(e: Edge, k: int) -> str:
        return f"llpm_r{e.src}_{e.dst}_{e.index}_{k}"

    def read(self, e: Edge) -> str:
        count = self.netlist.registers[e]
        return self.register_name(e, count) if count else self.value_name(e.src)

    def token_valid(self, stage: int) -> str:
        return "llpm_in_valid" if stage == 0 else f"llpm_valid_{stage}"

    def expression(self, node) -> str:
        edges = [Edge(src, node.id, i) for i, src in enumerate(node.inputs)]
        args = [self.read(e) for e in edges]
        arg_types = [self.types[src] for src in node.inputs]
        out_width = self.width(node.id)
        kind = node.kind
        if kind == OpKind.CONST:
            return literal(out_width, encode_int(node.value, node.type))
        if kind in _BINARY:
            return f"{args[0]} {_BINARY[kind]} {args[1]}"
        if kind == OpKind.NOT:
            return f"~{args[0]}"
        if kind == OpKind.EQ:
            if arg_types[0].bit_width == 0:
                return bit(True)
            return f"{args[0]} == {args[1]}"
        if kind == OpKind.LT:
            return f"{signed_operand(args[0], arg_types[0])} < {signed_operand(args[1], arg_types[1])}"
        if kind == OpKind.MUX:
            return f"{args[0]} ? {args[1]} : {args[2]}"
        if kind in (OpKind.STRUCT_PACK, OpKind.ARRAY_PACK):
            parts = [a for a, t in zip(args, arg_types) if t.bit_width > 0]
            return "{" + ", ".join(reversed(parts)) + "}"
        if kind == OpKind.FIELD_EXTRACT:
            low = arg_types[0].field_offset(node.field)
            return f"{args[0]}[{low + out_width - 1}:{low}]"
        if kind == OpKind.ARRAY_INDEX:
            array_type: Array = arg_types[0]
            w = array_type.elem.bit_width
            return f"({args[1]} < {array_type.count}) ? {args[0]}[{args[1]} * {w} +: {w}] : {args[0]}[{w - 1}:0]"
        if kind == OpKind.UNION_PACK:
            union: Union = node.type
            payload_width = union.variant_type(node.variant).bit_width
            parts = []
            pad = union.payload_width - payload_width
            if pad > 0:
                parts.append(literal(pad, 0))
            if payload_width > 0:
                parts.append(args[0])
            if union.tag_width > 0:
                parts.append(literal(union.tag_width, union.variant_index(node.variant)))
            return "{" + ", ".join(parts) + "}"
        if kind == OpKind.TAG_OF:
            tag_width = arg_types[0].tag_width
            return f"{args[0]}[{tag_width - 1}:0]" if tag_width else literal(1, 0)
        if kind == OpKind.UNWRAP_VARIANT:
            tag_width = arg_types[0].tag_width
            return f"{args[0]}[{tag_width + out_width - 1}:{tag_width}]"
        raise EmitError(f"no Verilog form for {node.label}")

    def ports(self) -> List[str]:
        ports = ["input wire clk", "input wire rst"]
        for port in self.netlist.module.ports:
            ports.extend(channel_ports(port.name, port.width, port.direction))
        return ports

    def body(self) -> List[str]:
        graph, L = self.graph, self.latency
        datapath = [
            n
            for n in (graph.node(i) for i in self.netlist.order)
            if n.kind not in (OpKind.INPUT, OpKind.OUTPUT) and not n.is_delay and self.width(n.id) > 0
        ]
        delays = [n for n in graph.nodes_of_kind(OpKind.DELAY) if self.width(n.id) > 0]
        registers = [(e, k) for e, count in sorted(self.netlist.registers.items()) for k in range(1, count + 1)]
        registers = [(e, k) for e, k in registers if self.width(e.src) > 0]

        declarations = ["  wire llpm_in_valid;", "  wire llpm_head_valid;", "  wire llpm_done;", "  wire llpm_stall;"]
        declarations += [f"  reg llpm_valid_{s};" for s in range(1, L + 1)]
        declarations += [f"  reg llpm_sent_{p.name};" for p in self.outputs]
        declarations += [f"  wire {vrange(self.width(n.id))}{self.value_name(n.id)};" for n in datapath]
        declarations += [f"  reg {vrange(self.width(n.id))}{self.value_name(n.id)};" for n in delays]
        declarations += [f"  reg {vrange(self.width(e.src))}{self.register_name(e, k)};" for e, k in registers]
        check_unique(
            [d.rstrip(";").split()[-1] for d in declarations]
            + [p.split()[-1] for p in self.ports()],
            f"module {self.name}",
        )

        head = self.token_valid(L)
        go = "llpm_done" if L == 0 else "~llpm_stall"
        handshake = [
            f"  assign llpm_in_valid = {conjunction(f'{p.name}_valid' for p in self.inputs)};",
            f"  assign llpm_head_valid = {head};",
            f"  assign llpm_done = {conjunction(f'(llpm_sent_{p.name} | {p.name}_ready)' for p in self.outputs)};",
            "  assign llpm_stall = llpm_head_valid & ~llpm_done;",
        ]
        for port in self.inputs:
            others = [f"{p.name}_valid" for p in self.inputs if p.name != port.name]
            handshake.append(f"  assign {port.name}_ready = {' & '.join(others + [go])};")
        for port in self.outputs:
            handshake.append(f"  assign {port.name}_valid = llpm_head_valid & ~llpm_sent_{port.name};")

        assigns = [f"  assign {self.value_name(n.id)} = {self.expression(n)};" for n in datapath]
        for port in self.outputs:
            if port.width > 0:
                out = graph.output_node(port.name)
                assigns.append(f"  assign {port.name}_data = {self.read(Edge(out.inputs[0], out.id, 0))};")

        control = ["  always @(posedge clk) begin", "    if (rst) begin"]
        control += [f"      llpm_valid_{s} <= 1'b0;" for s in range(1, L + 1)]
        control += [f"      llpm_sent_{p.name} <= 1'b0;" for p in self.outputs]
        control += [
            f"      {self.value_name(n.id)} <= {literal(self.width(n.id), encode_int(n.value, n.type))};" for n in delays
        ]
        control.append("    end else begin")
        if L > 0:
            control.append("      if (!llpm_stall) begin")
            control.append("        llpm_valid_1 <= llpm_in_valid;")
            control += [f"        llpm_valid_{s} <= llpm_valid_{s - 1};" for s in range(2, L + 1)]
            control.append("      end")
        for n in delays:
            driver = self.read(Edge(n.inputs[0], n.id, 0))
            control.append(f"      if (!llpm_stall && {self.token_valid(self.netlist.stages[n.id])}) begin")
            control.append(f"        {self.value_name(n.id)} <= {driver};")
            control.append("      end")
        for port in self.outputs:
            control.append("      if (llpm_stall) begin")
            control.append(f"        llpm_sent_{port.name} <= llpm_sent_{port.name} | {port.name}_ready;")
            control.append("      end else begin")
            control.append(f"        llpm_sent_{port.name} <= 1'b0;")
            control.append("      end")
        control += ["    end", "  end"]

        body = declarations + [""] + handshake
        if assigns:
            body += [""] + assigns
        body += [""] + control
        if registers:
            shift = ["  always @(posedge clk) begin", "    if (!llpm_stall) begin"]
            for e, k in registers:
                source = self.value_name(e.src) if k == 1 else self.register_name(e, k - 1)
                shift.append(f"      {self.register_name(e, k)} <= {source};")
            shift += ["    end", "  end"]
            body += [""] + shift
        return body

    def banner(self) -> List[str]:
        return [
            f"Generated by llpm from module '{self.netlist.name}'. Do not edit.",
            f"latency {self.latency}, data registers {self.netlist.register_count}",
        ]


def emit_module(netlist: PipelinedNetlist, name: str = None) -> str:
    """
    Emit one self-contained Verilog module for a pipelined netlist.

    Raises:
        EmitError: extern netlists, unnamed ops or identifier collisions
    """
    if netlist.module.is_extern:
        raise EmitError(f"module '{netlist.name}' is extern RTL; it is instantiated, not emitted")
    writer = ModuleWriter(netlist, name or netlist.name)
    template = env.get_template("module.v.jinja")
    text = template.render(banner=writer.banner(), name=writer.name, ports=writer.ports(), body=writer.body())
    _logger.debug("emitted module %s", writer.name)
    return text + "\n"


def write_verilog(text: str, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="\n") as output_file:
        output_file.write(text)


def process(instance, config):
    """
    Write the Verilog for a netlist or an assembled system to
    config["paths"]["output_file"].
    """
    from llpm.generators.generator_system import emit_system

    if isinstance(instance, PipelinedNetlist):
        text = emit_module(instance)
    else:
        text = emit_system(instance)
    write_verilog(text, config["paths"]["output_file"])
    return text
