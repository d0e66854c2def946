"""
Untimed reference interpreter: maps input token streams to output token
streams under rate-1 synchronous dataflow semantics.

Every step fires every node once. A Delay first emits its stored token
(initially its init value) and then stores its input.
"""

import logging
from typing import Dict, List, Optional

from llpm.definitions.graph import DataflowGraph
from llpm.definitions.module import Module
from llpm.definitions.ops import OpKind, evaluate
from llpm.errors import InterpretError, NotInterpretableError, ValueTypeError
from llpm.passes import infer_types, topo_order
from llpm.validation import validate
from llpm.values import check_value

_logger = logging.getLogger("llpm")

TokenStreams = Dict[str, List[object]]


class GraphExecutor:
    """
    Fires a dataflow graph one step at a time. Shared by the interpreter and
    by behavioral models inside the system simulator.
    """

    def __init__(self, graph: DataflowGraph, order: Optional[List[int]] = None):
        self.graph = graph
        self.order = order if order is not None else topo_order(graph)
        self.types = infer_types(graph)
        self.state = {n.id: n.value for n in graph.nodes_of_kind(OpKind.DELAY)}

    def step(self, inputs: Dict[str, object]) -> Dict[str, object]:
        """Fire every node once and return the produced output tokens."""
        # Delay outputs are known before the step; consumers may precede them in the order
        values = dict(self.state)
        outputs = {}
        for node_id in self.order:
            node = self.graph.node(node_id)
            if node.kind == OpKind.INPUT:
                values[node_id] = inputs[node.name]
            elif node.is_delay:
                values[node_id] = self.state[node_id]
            else:
                args = [values[src] for src in node.inputs]
                values[node_id] = evaluate(
                    node.kind,
                    args,
                    self.types[node_id],
                    [self.types[src] for src in node.inputs],
                    field=node.field,
                    variant=node.variant,
                    value=node.value,
                )
                if node.kind == OpKind.OUTPUT:
                    outputs[node.name] = values[node_id]
        for node_id in self.state:
            (src,) = self.graph.node(node_id).inputs
            self.state[node_id] = values[src]
        return outputs


def run(module: Module, inputs: TokenStreams, steps: int, order: Optional[List[int]] = None) -> TokenStreams:
    """
    Perform `steps` firings of a module.

    Args:
        module: a validated module with a dataflow body or a behavioral model
        inputs: port name -> list of at least `steps` values
        steps: number of firings
        order: optional evaluation order (any topological order gives the same result)

    Returns:
        Output port name -> exactly `steps` values

    Raises:
        NotInterpretableError: extern module without a behavioral model
        InterpretError: invalid module, missing or short input stream, ill-typed token
    """
    graph = module.behavior
    if graph is None:
        raise NotInterpretableError(f"module '{module.name}' is extern RTL without a behavioral model: not interpretable")
    diagnostics = validate(module)
    if diagnostics:
        raise InterpretError(f"module '{module.name}' does not validate: " + "; ".join(str(d) for d in diagnostics))
    if steps < 0:
        raise InterpretError("steps must be nonnegative")

    for port in module.inputs:
        if port.name not in inputs:
            raise InterpretError(f"missing input stream '{port.name}'")
        stream = inputs[port.name]
        if len(stream) < steps:
            raise InterpretError(f"input stream '{port.name}' has {len(stream)} tokens, {steps} needed")
        for index, token in enumerate(stream[:steps]):
            try:
                check_value(token, port.type, f"{port.name}[{index}]")
            except ValueTypeError as error:
                raise InterpretError(str(error)) from error
    unknown = sorted(set(inputs) - {p.name for p in module.inputs})
    if unknown:
        raise InterpretError(f"unknown input streams {unknown}")

    executor = GraphExecutor(graph, order)
    outputs: TokenStreams = {p.name: [] for p in module.outputs}
    for k in range(steps):
        produced = executor.step({p.name: inputs[p.name][k] for p in module.inputs})
        for name, token in produced.items():
            outputs[name].append(token)
    _logger.debug("interpreted %s for %d steps", module.name, steps)
    return outputs
