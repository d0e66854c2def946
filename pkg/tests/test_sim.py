import json
import random
import unittest

from llpm.datatypes import UInt
from llpm.errors import HandshakeViolation, SimulationError
from llpm.pipeline import pipeline
from llpm.sim.endpoints import CdcFifo, Fifo, Sink, Source
from llpm.sim.kernel import Channel, Component, Kernel
from llpm.sim.simulator import netlist_bench, simulate
from llpm.sim.stimulus import Stimulus, load_stimulus
from llpm.sim.trace import format_trace, trace_from_json
from llpm.values import random_value, value_to_json
from tests.fixtures import IR_FIXTURES, definition_path, load_module

U8 = UInt(8)


def adder_stimulus():
    with open(definition_path("add8_stimulus.json")) as stream:
        return load_stimulus(json.load(stream))


class Flaky(Component):
    """Offers one token and withdraws it on the next cycle."""

    name = "flaky"

    def __init__(self, channel):
        self.out = channel
        self.cycle = 0

    def forward(self):
        if self.cycle == 0:
            self.out.drive(True, 7)

    def commit(self):
        self.cycle += 1


def buffered(fifo_class, depth, tokens, sink_probability=1.0):
    inlet, outlet = Channel("in", U8), Channel("out", U8)
    components = [
        Source(inlet, tokens),
        fifo_class("buf", inlet, outlet, depth),
        Sink(outlet, sink_probability),
    ]
    return Kernel(components, [inlet, outlet], seed=1)


class TestKernel(unittest.TestCase):
    def test_fifo_visibility(self):
        kernel = buffered(Fifo, 2, [1, 2, 3])
        kernel.run(6)
        out = kernel.channels["out"]
        self.assertEqual(out.tokens, [1, 2, 3])
        self.assertEqual(out.cycles, [1, 2, 3])

    def test_fifo_full(self):
        kernel = buffered(Fifo, 2, [1, 2, 3, 4], sink_probability=0.0)
        kernel.run(8)
        self.assertEqual(kernel.channels["in"].transfers, 2)
        self.assertEqual(kernel.channels["out"].transfers, 0)

    def test_cdc_fifo_latency(self):
        kernel = buffered(CdcFifo, 4, [1, 2, 3])
        kernel.run(8)
        out = kernel.channels["out"]
        self.assertEqual(out.tokens, [1, 2, 3])
        self.assertEqual(out.cycles, [3, 4, 5])

    def test_handshake_violation(self):
        channel = Channel("c", U8)
        kernel = Kernel([Flaky(channel), Sink(channel, 0.0)], [channel])
        kernel.step()
        with self.assertRaises(HandshakeViolation):
            kernel.step()

    def test_duplicate_channel(self):
        with self.assertRaises(SimulationError):
            Kernel([], [Channel("c", U8), Channel("c", U8)])


class TestNetlistSimulation(unittest.TestCase):
    def test_adder_full_throughput(self):
        trace = simulate(load_module("add8"), adder_stimulus(), cycles=10)
        y = trace["y"]
        self.assertEqual(y.transfers, 9)
        self.assertEqual(list(y.cycles), list(range(1, 10)))
        self.assertEqual(trace.tokens("y"), [11, 22, 33, 44, 55, 66, 77, 88, 3])

    def test_blocked_sink(self):
        stimulus = adder_stimulus()
        stimulus.sinks["y"] = 0.0
        trace = simulate(load_module("add8"), stimulus, cycles=10)
        self.assertEqual(trace["y"].transfers, 0)
        self.assertEqual(trace["y"].stall_cycles, 9)
        # one token is held in the stalled pipeline
        self.assertEqual(trace["a"].transfers, 1)

    def test_sustained_throughput(self):
        tokens = [i % 256 for i in range(200)]
        stimulus = Stimulus({"a": tokens, "b": tokens})
        trace = simulate(load_module("add8"), stimulus, cycles=201)
        self.assertEqual(trace["y"].transfers, 200)
        self.assertEqual(trace.tokens("y"), [(2 * t) % 256 for t in tokens])

    def test_one_token_per_cycle_after_latency(self):
        rng = random.Random(31)
        for name in IR_FIXTURES:
            module = load_module(name)
            latency = pipeline(module).latency
            inputs = {p.name: [value_to_json(random_value(p.type, rng), p.type) for _ in range(200)] for p in module.inputs}
            trace = simulate(module, Stimulus(inputs), cycles=200 + latency)
            for port in module.outputs:
                channel = trace[port.name]
                self.assertEqual(channel.transfers, 200, f"{name}.{port.name}")
                self.assertEqual(list(channel.cycles), list(range(latency, latency + 200)), f"{name}.{port.name}")

    def test_counters_cover_every_cycle(self):
        stimulus = Stimulus({"a": list(range(20)), "b": list(range(20))}, {"a": 0.5, "b": 0.7}, {"y": 0.4}, seed=9)
        trace = simulate(load_module("add8"), stimulus, cycles=50)
        for channel in trace.channels.values():
            self.assertEqual(channel.transfers + channel.stall_cycles + channel.idle_cycles, 50)

    def test_seed_determinism(self):
        stimulus = Stimulus({"x": list(range(30))}, {"x": 0.5}, {"sum": 0.5}, seed=42)
        module = load_module("accum")
        first = simulate(module, stimulus, cycles=60).to_json()
        second = simulate(module, stimulus, cycles=60).to_json()
        self.assertEqual(first, second)
        other = Stimulus(stimulus.inputs, stimulus.sources, stimulus.sinks, seed=43)
        reseeded = simulate(module, other, cycles=60).to_json()
        self.assertNotEqual(reseeded["channels"]["sum"]["cycles"], first["channels"]["sum"]["cycles"])

    def test_accumulator_under_backpressure(self):
        stimulus = Stimulus({"x": [1, 2, 3, 4, 5]}, {"x": 0.5}, {"sum": 0.3}, seed=5)
        trace = simulate(load_module("accum"), stimulus, cycles=100)
        self.assertEqual(trace.tokens("sum"), [1, 3, 6, 10, 15])

    def test_stimulus_errors(self):
        module = load_module("add8")
        with self.assertRaises(SimulationError):
            simulate(module, Stimulus({"a": [1], "b": [1], "c": [1]}), cycles=2)
        with self.assertRaises(SimulationError):
            simulate(module, Stimulus({"a": [300], "b": [1]}), cycles=2)
        with self.assertRaises(SimulationError):
            simulate(load_module("ext_scale").with_graph(None), Stimulus(), cycles=2)

    def test_trace_json_and_listing(self):
        stimulus = Stimulus({"msg": [{"num": 5}, {"pair": {"hi": 1, "lo": 3}}]})
        trace = simulate(load_module("union_dispatch"), stimulus, cycles=6)
        loaded = trace_from_json(trace.to_json())
        self.assertEqual(loaded.tokens("y"), trace.tokens("y"))
        self.assertEqual(loaded["kind"].cycles, trace["kind"].cycles)
        listing = format_trace(trace, "y")
        self.assertIn("y : uint<8>", listing)
        self.assertIn("transfers=2", listing)

    def test_bench_binds_ports(self):
        bench = netlist_bench(pipeline(load_module("mux_select")), Stimulus())
        self.assertEqual(sorted(bench.kernel.channels), ["a", "b", "less", "sel", "y"])


if __name__ == "__main__":
    unittest.main()
