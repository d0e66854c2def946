"""
Graph passes shared by the interpreter, the scheduler and the backends.
"""

import logging
from typing import Dict, List

import networkx as nx

from llpm.datatypes import HWType
from llpm.definitions.graph import DataflowGraph
from llpm.definitions.ops import OpKind, infer_type
from llpm.errors import CombinationalCycleError, TypeCheckError

_logger = logging.getLogger("llpm")


def topo_order(graph: DataflowGraph) -> List[int]:
    """
    Order node ids so that every edge not leaving a Delay points forward.

    Delay outputs are treated as sources and Delay inputs as sinks. Ties are
    broken by node id, so the order is deterministic.

    Raises:
        CombinationalCycleError: if a cycle does not pass through a Delay
    """
    g = graph.combinational_graph()
    try:
        return list(nx.lexicographical_topological_sort(g, key=lambda n: n))
    except nx.NetworkXUnfeasible:
        cycle = nx.find_cycle(g)
        raise CombinationalCycleError(sorted({u for u, _ in cycle}))


def random_topo_order(graph: DataflowGraph, rng) -> List[int]:
    """
    A topological order drawn at random, used to show that results do not
    depend on the evaluation schedule.
    """
    g = graph.combinational_graph()
    in_degree = {n: g.in_degree(n) for n in g.nodes}
    ready = sorted(n for n, d in in_degree.items() if d == 0)
    order = []
    while ready:
        node = ready.pop(rng.randrange(len(ready)))
        order.append(node)
        for succ in sorted(g.successors(node)):
            in_degree[succ] -= 1
            if in_degree[succ] == 0:
                ready.append(succ)
    if len(order) != len(graph):
        raise CombinationalCycleError(sorted(set(graph.node_ids) - set(order)))
    return order


def node_type(graph: DataflowGraph, node, types: Dict[int, HWType]) -> HWType:
    input_types = [types[src] for src in node.inputs]
    return infer_type(node.kind, input_types, type=node.type, field=node.field, variant=node.variant)


def infer_types(graph: DataflowGraph, order: List[int] = None) -> Dict[int, HWType]:
    """
    Output type of every node.

    Raises:
        TypeCheckError: naming the first node that does not type-check
        CombinationalCycleError: if the graph has no valid evaluation order
    """
    types: Dict[int, HWType] = {}
    for node in graph.nodes_of_kind(OpKind.DELAY):
        types[node.id] = node.type
    for node_id in order if order is not None else topo_order(graph):
        node = graph.node(node_id)
        if node.is_delay:
            continue
        try:
            types[node_id] = node_type(graph, node, types)
        except TypeCheckError as error:
            raise TypeCheckError(f"{node.label}: {error}") from error
    for node in graph.nodes_of_kind(OpKind.DELAY):
        try:
            node_type(graph, node, types)
        except TypeCheckError as error:
            raise TypeCheckError(f"{node.label}: {error}") from error
    return types


def live_nodes(graph: DataflowGraph):
    """Ids backward-reachable from an OutputPort, plus all boundary nodes."""
    g = graph.full_graph()
    live = set()
    for node in graph.nodes:
        if node.kind.is_boundary:
            live.add(node.id)
            live.update(nx.ancestors(g, node.id) if node.kind == OpKind.OUTPUT else ())
    return live


def dead_node_elim(graph: DataflowGraph) -> DataflowGraph:
    """
    Remove nodes that cannot influence any OutputPort, Delay nodes included.
    InputPort nodes are kept since they are part of the module interface.
    """
    live = live_nodes(graph)
    removed = [n.id for n in graph.nodes if n.id not in live]
    if removed:
        _logger.debug("dead_node_elim removed nodes %s", removed)
    return graph.replace_nodes(n for n in graph.nodes if n.id in live)
