"""
Verilog for assembled systems: the generated modules of IR instances, the
FIFO and clock-crossing FIFO library modules, the host bridge and a top
module wiring instances, buffers, tap counters and exported channels.

Extern instances are instantiated by their RTL top name and are expected
to take `clk` and `rst` next to their mapped channel signals.
"""

import logging
import os
from typing import Dict, List, Tuple

from llpm.datatypes import clog2
from llpm.definitions.module import Direction
from llpm.errors import EmitError
from llpm.generators.filters import bit, file_from_path, literal, vrange
from llpm.generators.generator_verilog import channel_ports, check_unique, emit_module, env
from llpm.system.bridge import (
    COUNTER_WORDS,
    STATUS_AVAILABLE,
    STATUS_SPACE,
    WORD_BITS,
    Direction as BridgeDirection,
    HostBridgeMap,
)
from llpm.system.manifest import signal_names

_logger = logging.getLogger("llpm")

COUNTER_SIGNALS = {"transfers": "transfers", "stall_cycles": "stalls", "idle_cycles": "idle"}


def clock_ports(system) -> Dict[str, str]:
    """Clock port per domain: `clk` for a single domain, `clk_<domain>` otherwise."""
    domains = system.clock_domains()
    if len(domains) <= 1:
        return {d: "clk" for d in domains}
    return {d: f"clk_{d}" for d in domains}


def tap_register(channel: str, counter: str) -> str:
    return f"llpm_tap_{channel}_{COUNTER_SIGNALS[counter]}"


def bridge_module_name(system) -> str:
    return f"{system.name}_host_bridge"


def _wire_declarations(name: str, width: int) -> List[str]:
    lines = [f"  wire {vrange(width)}{name}_data;"] if width > 0 else []
    return lines + [f"  wire {name}_valid;", f"  wire {name}_ready;"]


def _read_slice(signal: str, width: int, word: int) -> str:
    low = word * WORD_BITS
    high = min(low + WORD_BITS, width) - 1
    pad = WORD_BITS - (high - low + 1)
    value = f"{signal}[{high}:{low}]"
    return f"{{{literal(pad, 0)}, {value}}}" if pad else value


class BridgeWriter:
    """Register file of a host bridge map."""

    def __init__(self, system, bridge: HostBridgeMap):
        self.system = system
        self.bridge = bridge
        self.name = bridge_module_name(system)

    def ports(self) -> List[str]:
        ports = [
            "input wire clk",
            "input wire rst",
            "input wire [31:0] host_addr",
            "input wire [31:0] host_wdata",
            "input wire host_write",
            "output wire [31:0] host_rdata",
        ]
        for region in self.bridge.channels:
            # the bridge is the producer of host-write channels and the consumer of host-read ones
            direction = Direction.OUT if region.direction == BridgeDirection.HOST_WRITE else Direction.IN
            ports.extend(channel_ports(region.channel, region.width, direction))
        for entry in self.bridge.counters:
            for counter in COUNTER_WORDS:
                ports.append(f"input wire [31:0] tap_{entry.channel}_{COUNTER_SIGNALS[counter]}")
        return ports

    @staticmethod
    def address(value: int) -> str:
        return literal(32, value)

    def commit(self, region) -> str:
        return f"host_write && host_addr == {self.address(region.control)} && host_wdata[0]"

    def body(self) -> List[str]:
        declarations, assigns, reads, resets, updates = [], [], [], [], []
        for region in self.bridge.channels:
            ch, width, words = region.channel, region.width, region.data_words
            if region.direction == BridgeDirection.HOST_WRITE:
                pending = f"llpm_pending_{ch}"
                declarations.append(f"  reg {pending};")
                declarations += [f"  reg [31:0] llpm_w_{ch}_{i};" for i in range(words)]
                if width > 0:
                    declarations.append(f"  wire {vrange(WORD_BITS * words)}llpm_wv_{ch};")
                    parts = ", ".join(f"llpm_w_{ch}_{i}" for i in reversed(range(words)))
                    assigns.append(f"  assign llpm_wv_{ch} = {{{parts}}};")
                    assigns.append(f"  assign {ch}_data = llpm_wv_{ch}[{width - 1}:0];")
                assigns.append(f"  assign {ch}_valid = {pending};")
                status = f"{{{literal(30, 0)}, ~{pending}, {bit(False)}}}"
                for i, address in enumerate(region.data_addresses):
                    reads.append((address, f"llpm_w_{ch}_{i}"))
                    updates += [
                        f"      if (host_write && host_addr == {self.address(address)}) begin",
                        f"        llpm_w_{ch}_{i} <= host_wdata;",
                        "      end",
                    ]
                resets.append(f"      {pending} <= 1'b0;")
                updates += [
                    f"      if ({pending} & {ch}_ready) begin",
                    f"        {pending} <= 1'b0;",
                    f"      end else if ({self.commit(region)}) begin",
                    f"        {pending} <= 1'b1;",
                    "      end",
                ]
            else:
                full = f"llpm_full_{ch}"
                declarations.append(f"  reg {full};")
                if width > 0:
                    declarations.append(f"  reg {vrange(width)}llpm_h_{ch};")
                assigns.append(f"  assign {ch}_ready = ~{full};")
                status = f"{{{literal(30, 0)}, {bit(False)}, {full}}}"
                for i, address in enumerate(region.data_addresses):
                    reads.append((address, _read_slice(f"llpm_h_{ch}", width, i)))
                resets.append(f"      {full} <= 1'b0;")
                capture = [f"        llpm_h_{ch} <= {ch}_data;"] if width > 0 else []
                updates += (
                    [f"      if (~{full} & {ch}_valid) begin", f"        {full} <= 1'b1;"]
                    + capture
                    + [f"      end else if ({self.commit(region)}) begin", f"        {full} <= 1'b0;", "      end"]
                )
            reads.append((region.status, status))
        for entry in self.bridge.counters:
            for counter in COUNTER_WORDS:
                reads.append((entry.address(counter), f"tap_{entry.channel}_{COUNTER_SIGNALS[counter]}"))

        mux = literal(32, 0)
        for address, value in reversed(sorted(reads)):
            mux = f"(host_addr == {self.address(address)}) ? {value} :\n      {mux}"
        assigns.append(f"  assign host_rdata = {mux};")

        body = declarations + [""] + assigns if declarations else list(assigns)
        if resets or updates:
            body += ["", "  always @(posedge clk) begin", "    if (rst) begin"] + resets
            body += ["    end else begin"] + updates + ["    end", "  end"]
        return body

    def banner(self) -> List[str]:
        return [
            f"Host bridge of system '{self.system.name}' ({self.bridge.size} bytes). Do not edit.",
            f"status bit 0 = available ({STATUS_AVAILABLE:#x}), bit 1 = space ({STATUS_SPACE:#x}); control bit 0 = commit",
        ]

    def render(self) -> str:
        return env.get_template("module.v.jinja").render(
            banner=self.banner(), name=self.name, ports=self.ports(), body=self.body()
        )


class TopWriter:
    """The top module of an assembled system."""

    def __init__(self, system):
        self.system = system
        self.clocks = clock_ports(system)
        self.bridged = set() if system.bridge is None else {r.channel for r in system.bridge.channels}

    def clock_of(self, instance: str) -> str:
        return self.clocks[self.system.instances[instance].clock_domain]

    def ports(self) -> List[str]:
        ports = [f"input wire {self.clocks[d]}" for d in sorted(self.clocks)] + ["input wire rst"]
        for export in self.system.exports:
            if export.channel in self.bridged:
                continue
            direction = Direction.IN if export.is_input else Direction.OUT
            ports.extend(channel_ports(export.channel, export.type.bit_width, direction))
        if self.system.bridge is not None:
            ports += [
                "input wire [31:0] host_addr",
                "input wire [31:0] host_wdata",
                "input wire host_write",
                "output wire [31:0] host_rdata",
            ]
        return ports

    def instance_lines(self, name: str, instance, binding: Dict[str, str]) -> List[str]:
        module = instance.module
        top = module.body.top if module.is_extern else module.name
        connections = [f".clk({self.clock_of(name)})", ".rst(rst)"]
        for port in module.ports:
            signals = signal_names(module, port.name)
            channel = binding[port.name]
            if signals.data is not None and port.width > 0:
                connections.append(f".{signals.data}({channel}_data)")
            connections.append(f".{signals.valid}({channel}_valid)")
            connections.append(f".{signals.ready}({channel}_ready)")
        return self._instantiate(top, name, connections)

    @staticmethod
    def _instantiate(module: str, name: str, connections: List[str], parameters: str = "") -> List[str]:
        lines = [f"  {module} {parameters}{name} ("]
        lines += [f"    {c}{',' if i < len(connections) - 1 else ''}" for i, c in enumerate(connections)]
        return lines + ["  );"]

    def buffer_lines(self, conn) -> List[str]:
        width = conn.type.bit_width
        src, dst = conn.source_channel, conn.sink_channel
        parameters = f"#(.WIDTH({max(width, 1)}), .DEPTH({conn.depth}), .ADDR_WIDTH({max(clog2(conn.depth), 1)})) "
        if conn.cdc:
            module = "llpm_cdc_fifo"
            clocks = [f".wr_clk({self.clock_of(conn.source.instance)})", f".rd_clk({self.clock_of(conn.sink.instance)})"]
        else:
            module = "llpm_fifo"
            clocks = [f".clk({self.clock_of(conn.source.instance)})"]
        connections = clocks + [
            ".rst(rst)",
            f".in_data({src}_data)" if width > 0 else f".in_data({bit(False)})",
            f".in_valid({src}_valid)",
            f".in_ready({src}_ready)",
            f".out_data({dst}_data)" if width > 0 else ".out_data()",
            f".out_valid({dst}_valid)",
            f".out_ready({dst}_ready)",
        ]
        return self._instantiate(module, conn.buffer_name, connections, parameters)

    def tap_lines(self) -> Tuple[List[str], List[str]]:
        declarations, blocks = [], []
        # increments are concatenated so they stay one bit wide
        pad = literal(31, 0)
        for channel in self.system.taps:
            clock = self.clocks[self.system.channel_domain(channel)]
            registers = {c: tap_register(channel, c) for c in COUNTER_WORDS}
            declarations += [f"  reg [31:0] {r};" for r in registers.values()]
            blocks += [f"  always @(posedge {clock}) begin", "    if (rst) begin"]
            blocks += [f"      {r} <= {literal(32, 0)};" for r in registers.values()]
            blocks += [
                "    end else begin",
                f"      {registers['transfers']} <= {registers['transfers']} + {{{pad}, {channel}_valid & {channel}_ready}};",
                f"      {registers['stall_cycles']} <= {registers['stall_cycles']}"
                f" + {{{pad}, {channel}_valid & ~{channel}_ready}};",
                f"      {registers['idle_cycles']} <= {registers['idle_cycles']} + {{{pad}, ~{channel}_valid}};",
                "    end",
                "  end",
            ]
        return declarations, blocks

    def body(self) -> List[str]:
        system = self.system
        binding = {name: {} for name in system.instances}
        declarations, assigns, blocks = [], [], []
        for conn in system.connections:
            binding[conn.source.instance][conn.source.port] = conn.source_channel
            binding[conn.sink.instance][conn.sink.port] = conn.sink_channel
            declarations += _wire_declarations(conn.source_channel, conn.type.bit_width)
            if conn.buffered:
                declarations += _wire_declarations(conn.sink_channel, conn.type.bit_width)
        for export in system.exports:
            binding[export.instance][export.port] = export.channel
            if export.channel in self.bridged:
                declarations += _wire_declarations(export.channel, export.type.bit_width)
        for dropped in system.dropped:
            binding[dropped.instance][dropped.port] = dropped.channel
            declarations += _wire_declarations(dropped.channel, dropped.type.bit_width)
            assigns.append(f"  assign {dropped.channel}_ready = {bit(True)};")

        for name, instance in sorted(system.instances.items()):
            blocks += self.instance_lines(name, instance, binding[name])
        for conn in system.connections:
            if conn.buffered:
                blocks += self.buffer_lines(conn)

        tap_declarations, tap_blocks = self.tap_lines()
        declarations += tap_declarations
        if system.bridge is not None:
            bridge = system.bridge
            clock = self.clocks[bridge.clock_domain] if bridge.clock_domain else self.clocks[system.clock_domains()[0]]
            connections = [
                f".clk({clock})",
                ".rst(rst)",
                ".host_addr(host_addr)",
                ".host_wdata(host_wdata)",
                ".host_write(host_write)",
                ".host_rdata(host_rdata)",
            ]
            for region in bridge.channels:
                if region.width > 0:
                    connections.append(f".{region.channel}_data({region.channel}_data)")
                connections += [
                    f".{region.channel}_valid({region.channel}_valid)",
                    f".{region.channel}_ready({region.channel}_ready)",
                ]
            for entry in bridge.counters:
                for counter in COUNTER_WORDS:
                    signal = f"tap_{entry.channel}_{COUNTER_SIGNALS[counter]}"
                    connections.append(f".{signal}({tap_register(entry.channel, counter)})")
            blocks += self._instantiate(bridge_module_name(system), "llpm_bridge", connections)

        check_unique(
            [d.rstrip(";").split()[-1] for d in declarations]
            + [p.split()[-1] for p in self.ports()]
            + list(system.instances)
            + [c.buffer_name for c in system.connections if c.buffered],
            f"system {system.name}",
        )
        body = list(declarations)
        if assigns:
            body += [""] + assigns
        if blocks:
            body += [""] + blocks
        if tap_blocks:
            body += [""] + tap_blocks
        return body

    def banner(self) -> List[str]:
        system = self.system
        lines = [f"Generated by llpm from system '{system.name}' (checksum 0x{system.checksum:08x}). Do not edit."]
        for domain, port in sorted(self.clocks.items()):
            hz = system.frequency(domain)
            lines.append(f"clock {port}: domain {domain}" + (f", {hz / 1e6:g} MHz" if hz else ""))
        for name, package in sorted(system.packages.items()):
            if package.module.is_extern:
                files = ", ".join(file_from_path(p) for p in package.module.body.sources)
                lines.append(f"extern {package.module.body.top} from {files}")
        return lines

    def render(self) -> str:
        return env.get_template("module.v.jinja").render(
            banner=self.banner(), name=self.system.name, ports=self.ports(), body=self.body()
        )


def check_sources(system) -> None:
    """
    Raises:
        EmitError: an extern package names a source file that does not exist
    """
    for name, package in sorted(system.packages.items()):
        for path in package.source_paths():
            if not os.path.isfile(path):
                raise EmitError(f"package '{name}': extern source file '{path}' not found")


def emit_system(system) -> str:
    """
    Emit one Verilog file for an assembled system.

    Raises:
        EmitError: missing extern source file, module or identifier collision
    """
    check_sources(system)
    sections, emitted = [], {}
    for name, instance in sorted(system.instances.items()):
        module = instance.module
        if module.is_extern:
            continue
        previous = emitted.get(module.name)
        if previous is not None:
            if previous.package != instance.package:
                raise EmitError(f"two different packages define module '{module.name}'")
            continue
        emitted[module.name] = instance
        sections.append(emit_module(instance.netlist).rstrip("\n"))
    externs = {i.module.body.top for i in system.instances.values() if i.module.is_extern}
    library = {"llpm_fifo", "llpm_cdc_fifo", bridge_module_name(system)}
    clashes = sorted((set(emitted) | externs) & (library | {system.name}))
    if clashes:
        raise EmitError(f"module names collide with generated modules: {', '.join(clashes)}")

    if any(c.buffered and not c.cdc for c in system.connections):
        sections.append(env.get_template("fifo.v.jinja").render().rstrip("\n"))
    if any(c.cdc for c in system.connections):
        sections.append(env.get_template("cdc_fifo.v.jinja").render().rstrip("\n"))
    if system.bridge is not None:
        sections.append(BridgeWriter(system, system.bridge).render().rstrip("\n"))
    sections.append(TopWriter(system).render().rstrip("\n"))
    _logger.debug("emitted system %s: %d sections", system.name, len(sections))
    return "\n\n".join(sections) + "\n"


def lint_externs(system) -> Dict[str, Dict[str, str]]:
    """Port directions of extern tops, for linting emitted system text."""
    directions = {}
    for instance in system.instances.values():
        module = instance.module
        if not module.is_extern:
            continue
        ports = {"clk": "input", "rst": "input"}
        for port in module.ports:
            signals = signal_names(module, port.name)
            forward, backward = ("input", "output") if port.direction == Direction.IN else ("output", "input")
            if signals.data is not None and port.width > 0:
                ports[signals.data] = forward
            ports[signals.valid] = forward
            ports[signals.ready] = backward
        directions[module.body.top] = ports
    return directions
