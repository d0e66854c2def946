"""
System assembly: resolve instances against their packages, type-check
connections, materialize FIFOs and clock-crossing FIFOs, surface exports
and attach the check report.

Channel naming: every instance port `p` of instance `i` owns the channel
`i_p`. A direct (depth 0, same clock domain) connection is a single
channel named after its source; a buffered or clock-crossing connection
has a channel on each side of its FIFO.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from llpm.datatypes import HWType
from llpm.definitions.module import Direction
from llpm.deserializer import checksum, load_document
from llpm.errors import AssemblyError
from llpm.pipeline import LatencyTable, PipelinedNetlist, pipeline
from llpm.system.bridge import HostBridgeMap, synth_host_bridge
from llpm.system.deadlock import check_deadlock
from llpm.system.design import DEFAULT_CDC_DEPTH, Endpoint, SystemDesign, design_from_json, design_to_json, instance_domain
from llpm.system.manifest import DEFAULT_CLOCK_DOMAIN, Package, package_from_json, package_to_json
from llpm.system.perf import insert_perf_taps

_logger = logging.getLogger("llpm")

ASSEMBLED_SCHEMA_VERSION = 1
RESERVED_NAMES = {"clk", "rst"}


@dataclass
class Instance:
    name: str
    package: Package
    clock_domain: str
    netlist: Optional[PipelinedNetlist] = None

    @property
    def module(self):
        return self.package.module

    @property
    def latency(self) -> Optional[int]:
        return None if self.netlist is None else self.netlist.latency


@dataclass(frozen=True)
class Connection:
    source: Endpoint
    sink: Endpoint
    type: HWType
    depth: int = 0
    cdc: bool = False

    @property
    def buffered(self) -> bool:
        return self.cdc or self.depth > 0

    @property
    def source_channel(self) -> str:
        return self.source.channel

    @property
    def sink_channel(self) -> str:
        return self.sink.channel if self.buffered else self.source.channel

    @property
    def buffer_name(self) -> Optional[str]:
        if self.cdc:
            return f"{self.source.channel}_cdc"
        if self.depth > 0:
            return f"{self.source.channel}_fifo"
        return None

    def to_json(self) -> dict:
        return {
            "from": str(self.source),
            "to": str(self.sink),
            "type": str(self.type),
            "depth": self.depth,
            "cdc": self.cdc,
            "source_channel": self.source_channel,
            "sink_channel": self.sink_channel,
            "buffer": self.buffer_name,
        }


@dataclass(frozen=True)
class Export:
    """An instance port surfaced at the top level (or dropped, for outputs)."""

    instance: str
    port: str
    type: HWType
    is_input: bool

    @property
    def endpoint(self) -> Endpoint:
        return Endpoint(self.instance, self.port)

    @property
    def channel(self) -> str:
        return self.endpoint.channel

    def to_json(self) -> dict:
        return {
            "channel": self.channel,
            "port": str(self.endpoint),
            "type": str(self.type),
            "direction": "in" if self.is_input else "out",
        }


@dataclass
class CheckReport:
    deadlocks: List[List[str]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.deadlocks

    def to_json(self) -> dict:
        return {"ok": self.ok, "deadlocks": [list(c) for c in self.deadlocks], "warnings": list(self.warnings)}


@dataclass
class AssembledSystem:
    name: str
    design: SystemDesign
    packages: Dict[str, Package]
    instances: Dict[str, Instance]
    connections: List[Connection]
    exports: List[Export]
    dropped: List[Export]
    latency_table: LatencyTable = field(default_factory=LatencyTable)
    cdc_depth: int = DEFAULT_CDC_DEPTH
    taps: List[str] = field(default_factory=list)
    expose: List[str] = field(default_factory=list)
    bridge: Optional[HostBridgeMap] = None
    report: CheckReport = field(default_factory=CheckReport)
    checksum: int = 0

    @property
    def clocks(self):
        return self.design.clocks

    def clock_domains(self) -> List[str]:
        return sorted({i.clock_domain for i in self.instances.values()})

    def frequency(self, domain: str) -> Optional[float]:
        """Frequency of a clock domain in hertz, if the design declares one."""
        quantity = self.design.clocks.get(domain)
        return None if quantity is None else float(quantity.to("hertz").magnitude)

    def connected_channels(self) -> Set[str]:
        names = set()
        for conn in self.connections:
            names.update((conn.source_channel, conn.sink_channel))
        return names

    def channel_names(self) -> Set[str]:
        return self.connected_channels() | {e.channel for e in self.exports} | {d.channel for d in self.dropped}

    def channel_type(self, name: str) -> HWType:
        for conn in self.connections:
            if name in (conn.source_channel, conn.sink_channel):
                return conn.type
        for export in self.exports + self.dropped:
            if export.channel == name:
                return export.type
        raise KeyError(name)

    def channel_domain(self, name: str) -> str:
        for conn in self.connections:
            if name == conn.source_channel:
                return self.instances[conn.source.instance].clock_domain
            if name == conn.sink_channel:
                return self.instances[conn.sink.instance].clock_domain
        for export in self.exports + self.dropped:
            if export.channel == name:
                return self.instances[export.instance].clock_domain
        raise KeyError(name)

    def design_json(self) -> dict:
        """The design as assembled, including taps and bridge exposure added since."""
        document = design_to_json(self.design)
        document.pop("taps", None)
        document.pop("bridge", None)
        if self.taps:
            document["taps"] = list(self.taps)
        if self.bridge is not None:
            document["bridge"] = {"expose": list(self.expose)}
        return document

    def to_json(self, relative_to: str = ".") -> dict:
        """
        Assembled document. Manifests are embedded with their directory
        relative to `relative_to`, so the system reloads without the design
        file.
        """
        return {
            "llpm_schema": ASSEMBLED_SCHEMA_VERSION,
            "kind": "assembled",
            "name": self.name,
            "checksum": f"0x{self.checksum:08x}",
            "design": self.design_json(),
            "packages": {
                name: {
                    "dir": os.path.relpath(package.base_dir, relative_to).replace(os.sep, "/"),
                    "manifest": package_to_json(package),
                }
                for name, package in sorted(self.packages.items())
            },
            "latency_table": self.latency_table.to_json(),
            "cdc_depth": self.cdc_depth,
            "clock_domains": self.clock_domains(),
            "instances": {
                name: {
                    "package": instance.package.name,
                    "version": instance.package.version,
                    "clock_domain": instance.clock_domain,
                    "latency": instance.latency,
                }
                for name, instance in sorted(self.instances.items())
            },
            "connections": [c.to_json() for c in self.connections],
            "exports": [e.to_json() for e in self.exports],
            "dropped": [d.to_json() for d in self.dropped],
            "taps": list(self.taps),
            "bridge": None if self.bridge is None else self.bridge.to_json(),
            "report": self.report.to_json(),
        }


def _port(packages, design, endpoint: Endpoint, role: str):
    spec = design.instances.get(endpoint.instance)
    if spec is None:
        raise AssemblyError(f"{role} '{endpoint}': unknown instance '{endpoint.instance}'")
    module = packages[spec.package].module
    port = module.port(endpoint.port)
    if port is None:
        raise AssemblyError(
            f"{role} '{endpoint}': instance '{endpoint.instance}' ({module.name}) has no port '{endpoint.port}'"
        )
    return port


def _connections(design: SystemDesign, packages, domains, cdc_depth) -> List[Connection]:
    connections, sources, sinks = [], {}, {}
    for spec in design.connections:
        source = _port(packages, design, spec.source, "source")
        sink = _port(packages, design, spec.sink, "sink")
        if source.direction != Direction.OUT:
            raise AssemblyError(f"source '{spec.source}' is an input port")
        if sink.direction != Direction.IN:
            raise AssemblyError(f"sink '{spec.sink}' is an output port")
        if source.type != sink.type:
            raise AssemblyError(
                f"type mismatch: '{spec.source}' is {source.type} but '{spec.sink}' is {sink.type}"
            )
        if spec.sink in sinks:
            raise AssemblyError(f"sink '{spec.sink}' is driven by both '{sinks[spec.sink]}' and '{spec.source}'")
        if spec.source in sources:
            raise AssemblyError(f"source '{spec.source}' drives both '{sources[spec.source]}' and '{spec.sink}'")
        sinks[spec.sink] = spec.source
        sources[spec.source] = spec.sink
        cdc = domains[spec.source.instance] != domains[spec.sink.instance]
        if cdc:
            depth = spec.cdc_depth or cdc_depth
        else:
            depth = spec.fifo_depth
            if spec.cdc_depth is not None:
                _logger.warning("connection %s -> %s is in one clock domain; cdc_depth ignored", spec.source, spec.sink)
        connections.append(Connection(spec.source, spec.sink, source.type, depth, cdc))
    return connections


def _exports(design: SystemDesign, packages, connections, warnings):
    connected = {c.source for c in connections} | {c.sink for c in connections}
    unconnected = [
        Endpoint(name, port.name)
        for name, spec in sorted(design.instances.items())
        for port in packages[spec.package].module.ports
        if Endpoint(name, port.name) not in connected
    ]
    if design.exports is None:
        chosen = list(unconnected)
    else:
        chosen = []
        for endpoint in design.exports:
            _port(packages, design, endpoint, "export")
            if endpoint in connected:
                raise AssemblyError(f"export '{endpoint}' is connected inside the system")
            if endpoint in chosen:
                raise AssemblyError(f"port '{endpoint}' is exported twice")
            chosen.append(endpoint)

    def export(endpoint):
        port = packages[design.instances[endpoint.instance].package].module.port(endpoint.port)
        return Export(endpoint.instance, endpoint.port, port.type, port.direction == Direction.IN)

    exports = [export(e) for e in chosen]
    dropped = []
    for endpoint in unconnected:
        if endpoint in chosen:
            continue
        item = export(endpoint)
        if item.is_input:
            raise AssemblyError(f"input '{endpoint}' is neither connected nor exported")
        message = f"output '{endpoint}' is neither connected nor exported; its tokens are dropped"
        _logger.warning(message)
        warnings.append(message)
        dropped.append(item)
    return exports, dropped


def _check_names(instances, connections, exports, dropped) -> None:
    names = list(instances)
    for conn in connections:
        names.append(conn.source_channel)
        if conn.buffered:
            names += [conn.sink_channel, conn.buffer_name]
    names += [e.channel for e in exports + dropped]
    duplicates = sorted({n for n in names if names.count(n) > 1} | (set(names) & RESERVED_NAMES))
    if duplicates:
        raise AssemblyError(f"name collision in the assembled system: {', '.join(duplicates)}")


def assemble(
    design: SystemDesign,
    packages: Optional[Dict[str, Package]] = None,
    table: Optional[LatencyTable] = None,
    cdc_depth: int = DEFAULT_CDC_DEPTH,
) -> AssembledSystem:
    """
    Assemble a design.

    Args:
        design: instances, connections and exports
        packages: package name -> loaded package (loaded from the design's
            package paths when omitted)
        table: latency table used to pipeline IR instances
        cdc_depth: default depth of inserted clock-crossing FIFOs

    Raises:
        AssemblyError: unknown instance or port, direction or type mismatch,
            double-driven sink, unexported unconnected input, name collision
    """
    if packages is None:
        packages = design.load_packages()
    table = table or LatencyTable()
    missing = sorted({s.package for s in design.instances.values()} - set(packages))
    if missing:
        raise AssemblyError(f"packages not loaded: {missing}")
    warnings = []

    domains, defaulted = {}, []
    for name in sorted(design.instances):
        domains[name], is_default = instance_domain(design, packages, name)
        if is_default:
            defaulted.append(name)
    if len(set(domains.values())) > 1:
        for name in defaulted:
            message = f"instance '{name}' runs in the default clock domain '{DEFAULT_CLOCK_DOMAIN}'"
            _logger.warning(message)
            warnings.append(message)
    for domain in sorted(set(design.clocks) - set(domains.values())):
        message = f"clock '{domain}' is declared but no instance uses it"
        _logger.warning(message)
        warnings.append(message)

    connections = _connections(design, packages, domains, cdc_depth)
    exports, dropped = _exports(design, packages, connections, warnings)

    instances = {}
    for name, spec in sorted(design.instances.items()):
        package = packages[spec.package]
        netlist = None if package.module.behavior is None else pipeline(package.module, table=table)
        instances[name] = Instance(name, package, domains[name], netlist)
    _check_names(instances, connections, exports, dropped)

    used = {s.package for s in design.instances.values()}
    digest = checksum(
        {
            "design": design_to_json(design),
            "packages": {n: p.checksum for n, p in sorted(packages.items()) if n in used},
        }
    )
    system = AssembledSystem(
        design.name,
        design,
        {n: p for n, p in packages.items() if n in used},
        instances,
        connections,
        exports,
        dropped,
        table,
        cdc_depth,
        checksum=digest,
    )
    system.report = CheckReport(check_deadlock(system), warnings)
    if design.taps:
        insert_perf_taps(system, design.taps)
    if design.expose:
        synth_host_bridge(system, design.expose)
    _logger.debug(
        "assembled %s: %d instances, %d connections, %d CDC FIFOs",
        system.name,
        len(instances),
        len(connections),
        sum(1 for c in connections if c.cdc),
    )
    return system


def assembled_from_json(document: dict, base_dir: str = ".") -> AssembledSystem:
    """
    Re-assemble a system from its assembled document.

    Raises:
        marshmallow.ValidationError: malformed document or embedded manifests
        AssemblyError: the embedded design no longer assembles
    """
    packages = {
        name: package_from_json(entry["manifest"], os.path.normpath(os.path.join(base_dir, entry.get("dir", "."))))
        for name, entry in document["packages"].items()
    }
    design = design_from_json(document["design"], base_dir)
    table = LatencyTable.from_mapping(document.get("latency_table", {}))
    return assemble(design, packages, table, document.get("cdc_depth", DEFAULT_CDC_DEPTH))


def load_assembled(path: str) -> AssembledSystem:
    document = load_document(path, "assembled")
    return assembled_from_json(document, os.path.dirname(os.path.abspath(path)))
