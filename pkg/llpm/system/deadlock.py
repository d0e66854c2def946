"""
Zero-storage cycle detection over an assembled system.
"""

import logging
from typing import List

import networkx as nx

_logger = logging.getLogger("llpm")


def is_combinational(instance) -> bool:
    """
    Whether tokens can pass through an instance without a register: IR
    instances with latency 0, and extern instances unless declared
    `registered`.
    """
    if instance.module.is_extern:
        return not instance.module.body.registered
    return instance.netlist.latency == 0


def storage_graph(system) -> nx.MultiDiGraph:
    """Instance graph of the connections that hold no storage."""
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(sorted(system.instances))
    for conn in system.connections:
        if conn.depth == 0 and not conn.cdc:
            graph.add_edge(conn.source.instance, conn.sink.instance)
    return graph


def _rotate(cycle: List[str]) -> List[str]:
    start = cycle.index(min(cycle))
    return cycle[start:] + cycle[:start]


def check_deadlock(system) -> List[List[str]]:
    """
    Find every directed cycle through unbuffered connections and
    combinational instances only.

    Returns:
        List of cycles, each a list of instance names starting at the
        smallest name; empty if the system is free of zero-storage cycles
    """
    graph = storage_graph(system)
    combinational = [name for name in graph if is_combinational(system.instances[name])]
    cycles = sorted(_rotate(list(c)) for c in nx.simple_cycles(nx.DiGraph(graph.subgraph(combinational))))
    for cycle in cycles:
        _logger.debug("zero-storage cycle %s", " -> ".join(cycle + cycle[:1]))
    return cycles
