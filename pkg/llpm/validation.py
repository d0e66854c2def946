"""
Module validation for LLPM: identifier checks against the Verilog
namespace and structural/type checks of dataflow graphs.
"""

import logging
from collections import namedtuple
from typing import List, Optional

import networkx as nx

from llpm.datatypes import IDENTIFIER_PATTERN
from llpm.definitions.graph import DataflowGraph
from llpm.definitions.module import DataflowBody, Direction, Module
from llpm.definitions.ops import REQUIRED_ATTRIBUTES, OpKind, arity
from llpm.errors import TypeCheckError, ValueTypeError
from llpm.passes import node_type, topo_order
from llpm.values import check_value

_logger = logging.getLogger("llpm")

# Verilog-2001 keywords
VERILOG_RESERVED_WORDS = {
    "always",
    "and",
    "assign",
    "automatic",
    "begin",
    "buf",
    "case",
    "casex",
    "casez",
    "cell",
    "config",
    "default",
    "defparam",
    "design",
    "disable",
    "edge",
    "else",
    "end",
    "endcase",
    "endconfig",
    "endfunction",
    "endgenerate",
    "endmodule",
    "endspecify",
    "endtask",
    "event",
    "for",
    "force",
    "forever",
    "fork",
    "function",
    "generate",
    "genvar",
    "if",
    "initial",
    "inout",
    "input",
    "integer",
    "join",
    "localparam",
    "macromodule",
    "module",
    "nand",
    "negedge",
    "nor",
    "not",
    "or",
    "output",
    "parameter",
    "posedge",
    "real",
    "realtime",
    "reg",
    "release",
    "repeat",
    "signed",
    "specify",
    "supply0",
    "supply1",
    "task",
    "time",
    "tri",
    "unsigned",
    "wait",
    "while",
    "wire",
    "wor",
    "xnor",
    "xor",
}


class ValidationError(Exception):
    """Raised when validation fails."""

    pass


Diagnostic = namedtuple("Diagnostic", ["node", "message"])
Diagnostic.__str__ = lambda d: f"node {d.node}: {d.message}" if d.node is not None else d.message


def validate_identifier(name: str, context: str = "") -> None:
    """
    Validate that a name is usable as a Verilog identifier.

    Args:
        name: Identifier to validate
        context: Context string for error messages (e.g., "port of add8")

    Raises:
        ValidationError: If identifier is invalid
    """
    ctx = f" ({context})" if context else ""
    if not isinstance(name, str) or not IDENTIFIER_PATTERN.match(name):
        raise ValidationError(
            f"Invalid identifier '{name}'{ctx}. "
            f"Must start with letter or underscore, contain only alphanumeric and underscore."
        )

    if name in VERILOG_RESERVED_WORDS:
        raise ValidationError(f"Invalid identifier '{name}'{ctx}. '{name}' is a Verilog reserved word.")

    if len(name) > 64:
        _logger.warning(
            "Identifier '%s'%s is very long (%d chars). Some tools truncate after 64 characters.",
            name,
            ctx,
            len(name),
        )


def _identifier_diagnostics(name, context) -> List[Diagnostic]:
    try:
        validate_identifier(name, context)
    except ValidationError as e:
        return [Diagnostic(None, str(e))]
    return []


def validate_graph(graph: DataflowGraph, ports) -> List[Diagnostic]:
    """
    Check graph invariants against the module's ports.

    Returns:
        Diagnostics carrying node ids and a reason (empty if valid)
    """
    diagnostics: List[Diagnostic] = []
    structurally_sound = True

    for node in graph.nodes:
        for attribute in REQUIRED_ATTRIBUTES.get(node.kind, ()):
            if getattr(node, attribute) is None and not (attribute == "value" and node.type is not None):
                diagnostics.append(Diagnostic(node.id, f"{node.label} is missing attribute '{attribute}'"))
                structurally_sound = False
        expected = arity(node.kind, node.type)
        if expected < 0:
            diagnostics.append(Diagnostic(node.id, f"{node.label} needs a {node.kind.nickname.split('_')[0]} type"))
            structurally_sound = False
        elif len(node.inputs) != expected:
            diagnostics.append(
                Diagnostic(node.id, f"{node.label} expects {expected} inputs, has {len(node.inputs)} (undriven input)")
            )
            structurally_sound = False
        for slot, src in enumerate(node.inputs):
            if src not in graph:
                diagnostics.append(Diagnostic(node.id, f"{node.label} input {slot} is driven by missing node {src}"))
                structurally_sound = False
            elif graph.node(src).kind == OpKind.OUTPUT:
                diagnostics.append(Diagnostic(node.id, f"{node.label} input {slot} is driven by output node {src}"))
                structurally_sound = False
        if node.kind in (OpKind.CONST, OpKind.DELAY) and node.type is not None:
            try:
                check_value(node.value, node.type)
            except ValueTypeError as e:
                diagnostics.append(Diagnostic(node.id, f"{node.label} value is ill-typed: {e}"))

    if structurally_sound:
        g = graph.combinational_graph()
        for component in sorted(nx.strongly_connected_components(g), key=min):
            if len(component) > 1 or any(g.has_edge(n, n) for n in component):
                nodes = sorted(component)
                diagnostics.append(
                    Diagnostic(nodes[0], "combinational cycle through nodes " + ", ".join(str(n) for n in nodes))
                )
                structurally_sound = False

    types = {}
    if structurally_sound:
        for node in graph.nodes_of_kind(OpKind.DELAY):
            types[node.id] = node.type
        delays = [n.id for n in graph.nodes_of_kind(OpKind.DELAY)]
        for node_id in [i for i in topo_order(graph) if i not in delays] + delays:
            node = graph.node(node_id)
            if any(src not in types for src in node.inputs):
                continue
            try:
                inferred = node_type(graph, node, types)
            except TypeCheckError as e:
                diagnostics.append(Diagnostic(node_id, f"{node.label}: {e}"))
                continue
            if not node.is_delay:
                types[node_id] = inferred

    diagnostics.extend(_boundary_diagnostics(graph, ports, types))
    return diagnostics


def _boundary_diagnostics(graph, ports, types) -> List[Diagnostic]:
    diagnostics = []
    port_map = {p.name: p for p in ports}
    for kind, direction in ((OpKind.INPUT, Direction.IN), (OpKind.OUTPUT, Direction.OUT)):
        seen = {}
        for node in graph.nodes_of_kind(kind):
            port = port_map.get(node.name)
            if node.name in seen:
                diagnostics.append(Diagnostic(node.id, f"port '{node.name}' has two boundary nodes ({seen[node.name]})"))
                continue
            seen[node.name] = node.id
            if port is None or port.direction != direction:
                diagnostics.append(Diagnostic(node.id, f"{node.label} has no matching {direction.nickname} port"))
                continue
            actual = node.type if kind == OpKind.INPUT else types.get(node.id)
            if actual is not None and actual != port.type:
                diagnostics.append(
                    Diagnostic(node.id, f"type mismatch on port '{port.name}': declared {port.type}, node carries {actual}")
                )
        for port in ports:
            if port.direction == direction and port.name not in seen:
                diagnostics.append(Diagnostic(None, f"port '{port.name}' has no {kind.nickname} node"))
    return diagnostics


def validate(module: Module) -> List[Diagnostic]:
    """
    Validate a module. Never raises; problems are returned as diagnostics.

    Returns:
        List of diagnostics (empty if the module is valid)
    """
    diagnostics: List[Diagnostic] = []
    diagnostics.extend(_identifier_diagnostics(module.name, "module name"))
    if not module.ports:
        diagnostics.append(Diagnostic(None, f"module '{module.name}' has no ports"))
    names = [p.name for p in module.ports]
    for name in sorted({n for n in names if names.count(n) > 1}):
        diagnostics.append(Diagnostic(None, f"duplicate port name '{name}'"))
    for port in module.ports:
        diagnostics.extend(_identifier_diagnostics(port.name, f"port of {module.name}"))

    if isinstance(module.body, DataflowBody):
        diagnostics.extend(validate_graph(module.body.graph, module.ports))
    else:
        body = module.body
        if not body.sources:
            diagnostics.append(Diagnostic(None, "extern module lists no RTL source files"))
        diagnostics.extend(_identifier_diagnostics(body.top, "extern top-level name"))
        if body.signals:
            for port in module.ports:
                if port.name not in body.signals:
                    diagnostics.append(Diagnostic(None, f"extern signal mapping does not cover port '{port.name}'"))
        if body.model is not None:
            diagnostics.extend(validate_graph(body.model, module.ports))
    return diagnostics


def is_valid(module: Module, diagnostics: Optional[List[Diagnostic]] = None) -> bool:
    return not (diagnostics if diagnostics is not None else validate(module))
