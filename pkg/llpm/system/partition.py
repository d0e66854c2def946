"""
Multi-device partitioning: assign instances to K capacity-bounded
partitions minimizing the total bit width of cut connections.

Small designs are solved exactly by branch and bound. Larger ones are
seeded greedily and refined with Kernighan-Lin style passes (single moves
and pair swaps, locked per pass, rolled back to the best prefix), from
several seeded restarts.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from llpm.errors import PartitionError

_logger = logging.getLogger("llpm")

EPSILON = 1e-9
DEFAULT_EXACT_LIMIT = 12
DEFAULT_RESTARTS = 8
MAX_PASSES = 32
SWAP_CANDIDATES = 4
# a pass ends after this many moves without a new best prefix
STALL_LIMIT = 16
PARTITION_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PartitionSpec:
    k: int
    capacities: Tuple[float, ...]
    exact_limit: int = DEFAULT_EXACT_LIMIT
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))
        if self.k < 1:
            raise PartitionError("at least one partition is required")
        if len(self.capacities) == 1 and self.k > 1:
            object.__setattr__(self, "capacities", self.capacities * self.k)
        if len(self.capacities) != self.k:
            raise PartitionError(f"{self.k} partitions need {self.k} capacities, got {len(self.capacities)}")
        if any(c < 0 for c in self.capacities):
            raise PartitionError("capacities must be nonnegative")
        if self.restarts < 1:
            raise PartitionError("at least one restart is required")


@dataclass
class PartitionResult:
    assignment: Dict[str, int]
    cost: int
    method: str
    areas: List[float] = field(default_factory=list)

    def members(self, index: int) -> List[str]:
        return sorted(name for name, p in self.assignment.items() if p == index)

    def to_json(self) -> dict:
        return {
            "llpm_schema": PARTITION_SCHEMA_VERSION,
            "kind": "partition",
            "method": self.method,
            "cost": self.cost,
            "assignment": dict(sorted(self.assignment.items())),
            "areas": list(self.areas),
        }


def connection_graph(areas: Dict[str, float], edges: Sequence[Tuple[str, str, int]]) -> nx.Graph:
    """Undirected weighted graph; parallel connections add up, self-loops never cut."""
    graph = nx.Graph()
    for name in sorted(areas):
        graph.add_node(name, area=float(areas[name]))
    for a, b, width in edges:
        if a == b:
            continue
        if graph.has_edge(a, b):
            graph[a][b]["weight"] += width
        else:
            graph.add_edge(a, b, weight=width)
    return graph


def cut_cost(graph: nx.Graph, assignment: Dict[str, int]) -> int:
    return sum(d["weight"] for a, b, d in graph.edges(data=True) if assignment[a] != assignment[b])


def partition_areas(graph: nx.Graph, assignment: Dict[str, int], k: int) -> List[float]:
    areas = [0.0] * k
    for name, p in assignment.items():
        areas[p] += graph.nodes[name]["area"]
    return areas


def is_feasible(graph: nx.Graph, assignment: Dict[str, int], spec: PartitionSpec) -> bool:
    if set(assignment) != set(graph.nodes) or any(not 0 <= p < spec.k for p in assignment.values()):
        return False
    areas = partition_areas(graph, assignment, spec.k)
    return all(a <= c + EPSILON for a, c in zip(areas, spec.capacities))


def _search_order(graph: nx.Graph) -> List[str]:
    """Most-connected-first order, so cut edges are counted early in the search."""
    order, remaining = [], set(graph.nodes)
    strength = dict(graph.degree(weight="weight"))
    while remaining:
        placed = set(order)

        def key(v):
            attached = sum(d["weight"] for u, d in graph[v].items() if u in placed)
            return (-attached, -strength[v], v)

        order.append(min(remaining, key=key))
        remaining.discard(order[-1])
    return order


def _exact(graph: nx.Graph, spec: PartitionSpec, incumbent: Optional[Tuple[int, Dict[str, int]]]):
    order = _search_order(graph)
    n, k, caps = len(order), spec.k, spec.capacities
    index = {v: i for i, v in enumerate(order)}
    earlier = [[(index[u], d["weight"]) for u, d in graph[v].items() if index[u] < i] for i, v in enumerate(order)]
    area = [graph.nodes[v]["area"] for v in order]
    suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + area[i]

    best_cost = incumbent[0] + 1 if incumbent else float("inf")
    best = [best_cost, dict(incumbent[1]) if incumbent else None]
    assign = [-1] * n
    loads = [0.0] * k
    counts = [0] * k

    def search(i, cost):
        if cost >= best[0]:
            return
        if i == n:
            best[0], best[1] = cost, {order[j]: assign[j] for j in range(n)}
            return
        if suffix[i] > sum(max(0.0, c - l) for c, l in zip(caps, loads)) + EPSILON:
            return
        candidates, empty_caps = [], set()
        for p in range(k):
            if counts[p] == 0:
                if caps[p] in empty_caps:
                    continue
                empty_caps.add(caps[p])
            if loads[p] + area[i] > caps[p] + EPSILON:
                continue
            delta = sum(w for j, w in earlier[i] if assign[j] != p)
            candidates.append((delta, p))
        for delta, p in sorted(candidates):
            assign[i] = p
            loads[p] += area[i]
            counts[p] += 1
            search(i + 1, cost + delta)
            assign[i] = -1
            loads[p] -= area[i]
            counts[p] -= 1

    search(0, 0)
    if best[1] is None:
        return None
    return cut_cost(graph, best[1]), best[1]


def _greedy_seed(graph: nx.Graph, spec: PartitionSpec, rng: random.Random) -> Optional[Dict[str, int]]:
    nodes = sorted(graph.nodes)
    rng.shuffle(nodes)
    order, seen = [], set()
    for start in nodes:
        if start in seen:
            continue
        component = [start] + [v for _, v in nx.bfs_edges(graph, start)]
        seen.update(component)
        order.extend(component)

    loads = [0.0] * spec.k
    assignment = {}
    for v in order:
        area = graph.nodes[v]["area"]
        best = None
        for p in range(spec.k):
            if loads[p] + area > spec.capacities[p] + EPSILON:
                continue
            attached = sum(d["weight"] for u, d in graph[v].items() if assignment.get(u) == p)
            room = spec.capacities[p] - loads[p]
            key = (attached, room, rng.random())
            if best is None or key > best[0]:
                best = (key, p)
        if best is None:
            return _first_fit(graph, spec)
        assignment[v] = best[1]
        loads[best[1]] += area
    return assignment


def _first_fit(graph: nx.Graph, spec: PartitionSpec) -> Optional[Dict[str, int]]:
    """Largest area first into the partition with the most room."""
    loads = [0.0] * spec.k
    assignment = {}
    for v in sorted(graph.nodes, key=lambda v: (-graph.nodes[v]["area"], v)):
        area = graph.nodes[v]["area"]
        p = max(range(spec.k), key=lambda p: (spec.capacities[p] - loads[p], -p))
        if loads[p] + area > spec.capacities[p] + EPSILON:
            return None
        assignment[v] = p
        loads[p] += area
    return assignment


class _Refiner:
    """Kernighan-Lin refinement state: loads and per-partition attachment."""

    def __init__(self, graph: nx.Graph, spec: PartitionSpec, assignment: Dict[str, int], rng: random.Random):
        self.graph = graph
        self.spec = spec
        self.assignment = dict(assignment)
        self.order = sorted(graph.nodes)
        rng.shuffle(self.order)
        self.area = {v: graph.nodes[v]["area"] for v in graph.nodes}
        self.loads = partition_areas(graph, assignment, spec.k)
        self.attached = {v: [0] * spec.k for v in graph.nodes}
        for a, b, d in graph.edges(data=True):
            self.attached[a][assignment[b]] += d["weight"]
            self.attached[b][assignment[a]] += d["weight"]

    def gain(self, v, q) -> int:
        return self.attached[v][q] - self.attached[v][self.assignment[v]]

    def fits(self, p, delta) -> bool:
        return self.loads[p] + delta <= self.spec.capacities[p] + EPSILON

    def move(self, v, q) -> None:
        p = self.assignment[v]
        self.assignment[v] = q
        self.loads[p] -= self.area[v]
        self.loads[q] += self.area[v]
        for u, d in self.graph[v].items():
            self.attached[u][p] -= d["weight"]
            self.attached[u][q] += d["weight"]

    def best_action(self, locked):
        best = None
        candidates = {}
        for v in self.order:
            if v in locked:
                continue
            p = self.assignment[v]
            for q in range(self.spec.k):
                if q == p:
                    continue
                gain = self.gain(v, q)
                candidates.setdefault((p, q), []).append((gain, v))
                if self.fits(q, self.area[v]) and (best is None or gain > best[0]):
                    best = (gain, ((v, q),))
        for (p, q), side in candidates.items():
            if p > q or (q, p) not in candidates:
                continue
            left = sorted(side, key=lambda e: -e[0])[:SWAP_CANDIDATES]
            right = sorted(candidates[(q, p)], key=lambda e: -e[0])[:SWAP_CANDIDATES]
            for gain_a, a in left:
                for gain_b, b in right:
                    shift = self.area[b] - self.area[a]
                    if not (self.fits(p, shift) and self.fits(q, -shift)):
                        continue
                    weight = self.graph[a][b]["weight"] if self.graph.has_edge(a, b) else 0
                    gain = gain_a + gain_b - 2 * weight
                    if best is None or gain > best[0]:
                        best = (gain, ((a, q), (b, p)))
        return best

    def run_pass(self) -> int:
        locked, history = set(), []
        total, best_total, best_length = 0, 0, 0
        while True:
            action = self.best_action(locked)
            if action is None:
                break
            gain, steps = action
            undo = []
            for v, q in steps:
                undo.append((v, self.assignment[v]))
                self.move(v, q)
                locked.add(v)
            history.append(undo)
            total += gain
            if total > best_total:
                best_total, best_length = total, len(history)
            elif len(history) - best_length >= STALL_LIMIT:
                break
        for undo in reversed(history[best_length:]):
            for v, p in reversed(undo):
                self.move(v, p)
        return best_total

    def refine(self) -> Dict[str, int]:
        for _ in range(MAX_PASSES):
            if self.run_pass() <= 0:
                break
        return self.assignment


def _heuristic(graph: nx.Graph, spec: PartitionSpec) -> Optional[Tuple[int, Dict[str, int]]]:
    best = None
    for restart in range(spec.restarts):
        rng = random.Random(spec.seed * 1000003 + restart)
        seed = _greedy_seed(graph, spec, rng)
        if seed is None:
            continue
        assignment = _Refiner(graph, spec, seed, rng).refine()
        cost = cut_cost(graph, assignment)
        _logger.debug("partition restart %d: cost %d", restart, cost)
        if best is None or cost < best[0]:
            best = (cost, assignment)
    return best


def partition_graph(
    areas: Dict[str, float], edges: Sequence[Tuple[str, str, int]], spec: PartitionSpec
) -> PartitionResult:
    """
    Partition a weighted instance graph.

    Args:
        areas: instance name -> area estimate
        edges: (instance, instance, bit width) per connection

    Raises:
        PartitionError: capacities cannot hold the instances
    """
    graph = connection_graph(areas, edges)
    total = sum(areas.values())
    if total > sum(spec.capacities) + EPSILON:
        raise PartitionError(f"total area {total:g} exceeds total capacity {sum(spec.capacities):g}")
    too_big = sorted(v for v in graph.nodes if graph.nodes[v]["area"] > max(spec.capacities) + EPSILON)
    if too_big:
        raise PartitionError(f"instances larger than any partition: {too_big}")

    if spec.k == 1 or not areas:
        assignment = {v: 0 for v in graph.nodes}
        return PartitionResult(assignment, 0, "exact", partition_areas(graph, assignment, spec.k))

    heuristic = _heuristic(graph, spec)
    if graph.number_of_nodes() <= spec.exact_limit:
        found, method = _exact(graph, spec, heuristic), "exact"
    else:
        found, method = heuristic, "kernighan_lin"
    if found is None:
        raise PartitionError("no assignment satisfies the partition capacities")
    cost, assignment = found
    _logger.debug("partitioned %d instances into %d (%s): cost %d", len(assignment), spec.k, method, cost)
    return PartitionResult(dict(sorted(assignment.items())), cost, method, partition_areas(graph, assignment, spec.k))


def partition(system, spec: PartitionSpec) -> PartitionResult:
    """
    Partition the instances of an assembled system; areas come from the
    package manifests and edge weights from connection bit widths.
    """
    areas = {name: instance.package.area_estimate for name, instance in system.instances.items()}
    edges = [(c.source.instance, c.sink.instance, c.type.bit_width) for c in system.connections]
    return partition_graph(areas, edges, spec)
