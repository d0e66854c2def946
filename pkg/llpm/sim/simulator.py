import logging
from typing import Dict, Optional

from llpm.definitions.module import Module
from llpm.errors import SimulationError, ValueTypeError
from llpm.pipeline import LatencyTable, PipelinedNetlist, pipeline
from llpm.sim.endpoints import CdcFifo, Drain, Fifo, Sink, Source
from llpm.sim.kernel import Channel, Kernel
from llpm.sim.netlist_model import NetlistComponent
from llpm.sim.stimulus import Stimulus
from llpm.sim.trace import ChannelTrace, Trace
from llpm.values import value_from_json

_logger = logging.getLogger("llpm")

DEFAULT_CYCLES = 100


class Bench:
    """
    A kernel together with the stimulus endpoints bound to it.
    """

    def __init__(self, kernel: Kernel, sources: Dict[str, Source], sinks: Dict[str, Sink], taps=(), frequencies=None):
        self.kernel = kernel
        self.sources = sources
        self.sinks = sinks
        self.taps = sorted(taps)
        self.frequencies = frequencies or {}

    def received(self, channel: str) -> list:
        return self.kernel.channels[channel].tokens

    def trace(self) -> Trace:
        return Trace(
            self.kernel.cycle,
            self.kernel.seed,
            {name: ChannelTrace.of(ch) for name, ch in self.kernel.channels.items()},
            self.taps,
            self.frequencies,
        )


def _tokens(stimulus: Stimulus, channel: Channel) -> list:
    raw = stimulus.inputs.get(channel.name)
    if raw is None:
        _logger.warning("no input stream for channel '%s'; it stays idle", channel.name)
        return []
    try:
        return [value_from_json(v, channel.type, f"{channel.name}[{i}]") for i, v in enumerate(raw)]
    except ValueTypeError as error:
        raise SimulationError(f"ill-typed stimulus token: {error}") from error


def _check_names(stimulus: Stimulus, inputs, outputs) -> None:
    for section, known in (("inputs", inputs), ("sources", inputs), ("sinks", outputs)):
        unknown = sorted(set(getattr(stimulus, section)) - set(known))
        if unknown:
            raise SimulationError(f"stimulus {section} name unknown channels {unknown}")


def _endpoints(stimulus, in_channels, out_channels):
    _check_names(stimulus, [c.name for c in in_channels], [c.name for c in out_channels])
    sources = {c.name: Source(c, _tokens(stimulus, c), stimulus.source_probability(c.name)) for c in in_channels}
    sinks = {c.name: Sink(c, stimulus.sink_probability(c.name)) for c in out_channels}
    return sources, sinks


def netlist_bench(netlist: PipelinedNetlist, stimulus: Stimulus, max_settle: int = 64) -> Bench:
    """Bench for one netlist; channels are named after its ports."""
    ins = {p.name: Channel(p.name, p.type) for p in netlist.module.inputs}
    outs = {p.name: Channel(p.name, p.type) for p in netlist.module.outputs}
    sources, sinks = _endpoints(stimulus, list(ins.values()), list(outs.values()))
    components = list(sources.values()) + [NetlistComponent(netlist.name, netlist, ins, outs)] + list(sinks.values())
    kernel = Kernel(components, list(ins.values()) + list(outs.values()), stimulus.seed, max_settle)
    return Bench(kernel, sources, sinks)


def system_bench(system, stimulus: Stimulus, table: Optional[LatencyTable] = None, max_settle: int = 64) -> Bench:
    """
    Bench for an assembled system: one component per instance, FIFO and
    CDC FIFO components on buffered connections, stimulus endpoints on
    exported channels and drains on dropped outputs.
    """
    channels: Dict[str, Channel] = {}
    bound = {name: ({}, {}) for name in system.instances}

    def channel(name, type, domain):
        if name not in channels:
            channels[name] = Channel(name, type, domain)
        return channels[name]

    components = []
    for conn in system.connections:
        src_domain = system.instances[conn.source.instance].clock_domain
        dst_domain = system.instances[conn.sink.instance].clock_domain
        upstream = channel(conn.source_channel, conn.type, src_domain)
        downstream = channel(conn.sink_channel, conn.type, dst_domain)
        bound[conn.source.instance][1][conn.source.port] = upstream
        bound[conn.sink.instance][0][conn.sink.port] = downstream
        if conn.cdc:
            components.append(CdcFifo(conn.buffer_name, upstream, downstream, conn.depth))
        elif conn.depth > 0:
            components.append(Fifo(conn.buffer_name, upstream, downstream, conn.depth))

    in_channels, out_channels = [], []
    for export in system.exports:
        ch = channel(export.channel, export.type, system.instances[export.instance].clock_domain)
        if export.is_input:
            bound[export.instance][0][export.port] = ch
            in_channels.append(ch)
        else:
            bound[export.instance][1][export.port] = ch
            out_channels.append(ch)
    drains = []
    for dropped in system.dropped:
        ch = channel(dropped.channel, dropped.type, system.instances[dropped.instance].clock_domain)
        bound[dropped.instance][1][dropped.port] = ch
        drains.append(Drain(ch))

    for name, instance in sorted(system.instances.items()):
        if instance.module.behavior is None:
            raise SimulationError(f"instance '{name}' is extern RTL without a behavioral model")
        netlist = instance.netlist if table is None else pipeline(instance.module, table=table)
        ins, outs = bound[name]
        components.append(NetlistComponent(name, netlist, ins, outs))

    sources, sinks = _endpoints(stimulus, in_channels, out_channels)
    missing = sorted(set(system.taps) - set(channels))
    if missing:
        raise SimulationError(f"taps on unknown channels {missing}")
    frequencies = {}
    for ch in channels.values():
        hz = system.frequency(ch.clock_domain)
        if hz is not None:
            frequencies[ch.name] = hz
    kernel = Kernel(
        list(sources.values()) + components + drains + list(sinks.values()),
        list(channels.values()),
        stimulus.seed,
        max_settle,
    )
    return Bench(kernel, sources, sinks, system.taps, frequencies)


def simulate(
    target,
    stimulus: Stimulus,
    cycles: Optional[int] = None,
    table: Optional[LatencyTable] = None,
    max_settle: int = 64,
) -> Trace:
    """
    Simulate a PipelinedNetlist, a Module (pipelined first) or an
    AssembledSystem for a number of cycles.

    Raises:
        SimulationError: extern instance without a model, unknown stimulus
            channel, ill-typed token or handshake violation
    """
    from llpm.system.assembly import AssembledSystem

    if isinstance(target, Module):
        if target.behavior is None:
            raise SimulationError(f"module '{target.name}' is extern RTL without a behavioral model")
        target = pipeline(target, table=table)
    if isinstance(target, PipelinedNetlist):
        bench = netlist_bench(target, stimulus, max_settle)
    elif isinstance(target, AssembledSystem):
        bench = system_bench(target, stimulus, table, max_settle)
    else:
        raise SimulationError(f"cannot simulate {type(target).__name__}")
    if cycles is None:
        cycles = stimulus.cycles if stimulus.cycles is not None else DEFAULT_CYCLES
    bench.kernel.run(cycles)
    return bench.trace()
