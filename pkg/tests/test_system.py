import itertools
import json
import os
import random
import time
import unittest

from marshmallow import ValidationError

from llpm.channel import SnapshotChannel
from llpm.errors import AssemblyError, BridgeError, PackageError, PartitionError
from llpm.generators.generator_system import bridge_module_name, emit_system, lint_externs
from llpm.generators.lint import check_port_contract, lint, module_ports, split_modules
from llpm.sim.simulator import simulate
from llpm.sim.stimulus import Stimulus, load_stimulus
from llpm.system.assembly import assemble, assembled_from_json
from llpm.system.bridge import WORD_BITS, data_words
from llpm.system.deadlock import check_deadlock
from llpm.system.design import Endpoint, design_from_json, design_to_json, load_design
from llpm.system.manifest import load_package, package_from_json, package_to_json, parse_version
from llpm.system.partition import PartitionSpec, partition, partition_graph
from llpm.system.perf import insert_perf_taps
from tests.fixtures import definition_path


def system(name, **kwargs):
    return assemble(load_design(definition_path(f"{name}.json")), **kwargs)


def design(**document):
    base = {"llpm_schema": 1, "kind": "design", "name": "adhoc"}
    base.update(document)
    return design_from_json(base, definition_path(""))


def brute_force(areas, edges, spec):
    names = sorted(areas)
    best = None
    for parts in itertools.product(range(spec.k), repeat=len(names)):
        assignment = dict(zip(names, parts))
        loads = [0] * spec.k
        for name, p in assignment.items():
            loads[p] += areas[name]
        if any(load > cap for load, cap in zip(loads, spec.capacities)):
            continue
        cost = sum(w for a, b, w in edges if assignment[a] != assignment[b])
        if best is None or cost < best:
            best = cost
    return best


def is_feasible_areas(areas, assignment, spec):
    loads = [0] * spec.k
    for name, p in assignment.items():
        loads[p] += areas[name]
    return set(assignment) == set(areas) and all(load <= cap + 1e-9 for load, cap in zip(loads, spec.capacities))


def random_instance_graph(rng, n, max_area=10, max_width=32):
    areas = {f"i{j}": rng.randint(1, max_area) for j in range(n)}
    names = sorted(areas)
    edges = []
    for _ in range(rng.randint(n - 1, 2 * n)):
        a, b = rng.sample(names, 2)
        edges.append((a, b, rng.randint(1, max_width)))
    return areas, edges


class TestManifest(unittest.TestCase):
    def test_load(self):
        package = load_package(definition_path("add8.json"))
        self.assertEqual(package.name, "add8")
        self.assertEqual(package.version, "1.0.0")
        self.assertEqual(package.area_estimate, 12.0)
        self.assertEqual(package.clock_domain, "clk0")
        self.assertEqual([p.name for p in package.module.ports], ["a", "b", "y"])

    def test_dump_and_reload(self):
        for name in ("add8", "fir3", "union_dispatch", "ext_scale"):
            package = load_package(definition_path(f"{name}.json"))
            document = package_to_json(package)
            reloaded = package_from_json(document, package.base_dir)
            self.assertEqual(package_to_json(reloaded), document)
            self.assertEqual(reloaded.checksum, package.checksum)
            self.assertEqual(reloaded.module, package.module)

    def test_extern(self):
        package = load_package(definition_path("ext_scale.json"))
        self.assertTrue(package.registered)
        self.assertEqual(package.module.body.top, "ext_scale_core")
        self.assertTrue(package.source_paths()[0].endswith(os.path.join("rtl", "ext_scale.v")))

    def test_rejected(self):
        with self.assertRaises(ValidationError):
            load_package(definition_path("future_schema.json"))
        with self.assertRaises(PackageError) as context:
            load_package(definition_path("bad_type.json"))
        self.assertTrue(context.exception.diagnostics)
        document = package_to_json(load_package(definition_path("add8.json")))
        document["version"] = "1.0"
        with self.assertRaises(ValidationError) as context:
            package_from_json(document)
        self.assertIn("version", context.exception.messages)
        document["version"] = "1.0.0"
        document["body"] = {}
        with self.assertRaises(ValidationError):
            package_from_json(document)

    def test_versions(self):
        self.assertEqual(parse_version("1.2.3-rc.1+build.5"), (1, 2, 3))
        for text in ("1.2", "01.2.3", "v1.2.3", ""):
            with self.assertRaises(ValueError):
                parse_version(text)


class TestDesign(unittest.TestCase):
    def test_endpoint(self):
        self.assertEqual(Endpoint.parse("adder.y"), Endpoint("adder", "y"))
        self.assertEqual(Endpoint("adder", "y").channel, "adder_y")
        for text in ("adder", "a.b.c", ".y"):
            with self.assertRaises(ValueError):
                Endpoint.parse(text)

    def test_round_trip(self):
        for name in ("chain", "cdc", "bridged"):
            loaded = load_design(definition_path(f"{name}.json"))
            document = design_to_json(loaded)
            self.assertEqual(design_to_json(design_from_json(document, loaded.base_dir)), document)

    def test_clocks(self):
        loaded = load_design(definition_path("cdc.json"))
        self.assertEqual(loaded.clocks["core"].to("hertz").magnitude, 250e6)
        with self.assertRaises(ValidationError):
            design(packages={}, instances={}, clocks={"core": "3 meters"})

    def test_unknown_package(self):
        with self.assertRaises(ValidationError):
            design(packages={}, instances={"a": {"package": "add8"}})

    def test_cdc_depth_power_of_two(self):
        with self.assertRaises(ValidationError):
            design(
                packages={"add8": "add8.json"},
                instances={"a": {"package": "add8"}},
                connections=[{"from": "a.y", "to": "a.a", "cdc_depth": 6}],
            )


class TestAssembly(unittest.TestCase):
    def test_chain(self):
        chain = system("chain")
        (conn,) = chain.connections
        self.assertEqual(conn.depth, 2)
        self.assertFalse(conn.cdc)
        self.assertEqual((conn.source_channel, conn.sink_channel, conn.buffer_name), ("d0_y", "d1_x", "d0_y_fifo"))
        self.assertEqual([e.channel for e in chain.exports], ["d0_x", "d1_y"])
        self.assertEqual(sorted(chain.packages), ["double8"])
        self.assertTrue(chain.report.ok)

    def test_clock_crossing(self):
        cdc = system("cdc")
        (conn,) = cdc.connections
        self.assertTrue(conn.cdc)
        self.assertEqual(conn.depth, 8)
        self.assertEqual(conn.buffer_name, "fast_y_cdc")
        self.assertEqual(cdc.clock_domains(), ["core", "io"])
        self.assertEqual(cdc.frequency("io"), 100e6)
        self.assertTrue(cdc.instances["slow"].module.is_extern)
        self.assertEqual(cdc.instances["slow"].latency, 2)

    def test_default_cdc_depth(self):
        adhoc = design(
            packages={"double8": "double8.json"},
            instances={"p": {"package": "double8", "clock_domain": "a"}, "q": {"package": "double8", "clock_domain": "b"}},
            connections=[{"from": "p.y", "to": "q.x", "fifo_depth": 2}],
        )
        self.assertEqual(assemble(adhoc).connections[0].depth, 4)
        self.assertEqual(assemble(adhoc, cdc_depth=16).connections[0].depth, 16)

    def test_one_cdc_fifo_per_crossing(self):
        rng = random.Random(13)
        for trial in range(40):
            n = rng.randint(2, 7)
            domains = {f"u{j}": rng.choice(["a", "b", "c"]) for j in range(n)}
            connections = []
            for j in range(n - 1):
                connection = {"from": f"u{j}.y", "to": f"u{j + 1}.x"}
                if rng.random() < 0.4:
                    connection["fifo_depth"] = rng.randint(1, 4)
                if rng.random() < 0.3:
                    connection["cdc_depth"] = rng.choice([2, 4, 8])
                connections.append(connection)
            adhoc = design(
                packages={"double8": "double8.json"},
                instances={name: {"package": "double8", "clock_domain": d} for name, d in domains.items()},
                connections=connections,
            )
            assembled = assemble(adhoc)
            crossings = 0
            for conn in assembled.connections:
                crossing = domains[conn.source.instance] != domains[conn.sink.instance]
                crossings += crossing
                self.assertEqual(conn.cdc, crossing, f"trial {trial}")
                if crossing:
                    self.assertEqual(conn.buffer_name, f"{conn.source.channel}_cdc")
                else:
                    self.assertNotEqual(conn.buffer_name, f"{conn.source.channel}_cdc")
            buffers = [conn.buffer_name for conn in assembled.connections if conn.buffered]
            self.assertEqual(sum(name.endswith("_cdc") for name in buffers), crossings)
            text = emit_system(assembled)
            instantiated = [line for line in text.splitlines() if line.startswith("  llpm_cdc_fifo ")]
            self.assertEqual(len(instantiated), crossings, f"trial {trial}")

    def test_errors(self):
        packages = {"add8": "add8.json", "accum": "accum.json"}
        instances = {"a": {"package": "add8"}, "s": {"package": "accum"}}
        cases = [
            [{"from": "a.y", "to": "s.x"}],
            [{"from": "a.a", "to": "a.b"}],
            [{"from": "a.y", "to": "a.z"}],
            [{"from": "q.y", "to": "a.a"}],
        ]
        for connections in cases:
            with self.assertRaises(AssemblyError):
                assemble(design(packages=packages, instances=instances, connections=connections))
        two_sources = {"a": {"package": "add8"}, "b": {"package": "add8"}}
        with self.assertRaises(AssemblyError):
            assemble(
                design(
                    packages=packages,
                    instances=two_sources,
                    connections=[{"from": "a.y", "to": "b.a"}, {"from": "b.y", "to": "b.a"}],
                )
            )
        with self.assertRaises(AssemblyError):
            assemble(design(packages=packages, instances={"a": {"package": "add8"}}, exports=["a.y"]))

    def test_dropped_output(self):
        bridged = system("bridged")
        self.assertEqual([d.channel for d in bridged.dropped], ["disp_kind"])
        self.assertTrue(any("disp.kind" in w for w in bridged.report.warnings))

    def test_reserved_names(self):
        with self.assertRaises(AssemblyError):
            assemble(design(packages={"wire8": "wire8.json"}, instances={"clk": {"package": "wire8"}}))

    def test_assembled_round_trip(self):
        chain = system("chain")
        directory = os.path.dirname(definition_path("chain.json"))
        document = json.loads(json.dumps(chain.to_json(directory)))
        reloaded = assembled_from_json(document, directory)
        self.assertEqual(reloaded.checksum, chain.checksum)
        self.assertEqual(reloaded.connections, chain.connections)
        self.assertEqual(reloaded.to_json(directory), document)


class TestDeadlock(unittest.TestCase):
    def test_zero_storage_cycle(self):
        looped = system("cycle_no_fifo")
        self.assertFalse(looped.report.ok)
        self.assertEqual(looped.report.deadlocks, [["a", "b"]])

    def test_fifo_breaks_cycle(self):
        self.assertTrue(system("cycle_with_fifo").report.ok)

    def test_registered_instances_break_cycle(self):
        adhoc = design(
            packages={"double8": "double8.json"},
            instances={"a": {"package": "double8"}, "b": {"package": "double8"}},
            connections=[{"from": "a.y", "to": "b.x"}, {"from": "b.y", "to": "a.x"}],
        )
        self.assertEqual(check_deadlock(assemble(adhoc)), [])


class TestBridge(unittest.TestCase):
    def test_layout(self):
        bridge = system("bridged").bridge
        names = [r.channel for r in bridge.channels]
        self.assertEqual(names, sorted(names))
        self.assertEqual(len(names), 7)
        for region in bridge.channels:
            self.assertEqual(region.base % 16, 0)
            self.assertEqual(region.words, data_words(region.width) + 2)
            self.assertEqual(region.words, -(-region.width // WORD_BITS) + 2)
        regions = sorted(bridge.regions())
        for (_, end, _), (start, _, _) in zip(regions, regions[1:]):
            self.assertLessEqual(end, start)
        self.assertEqual(bridge.counter_base, 7 * 16)
        self.assertEqual([e.channel for e in bridge.counters], ["acc_sum", "adder_y"])
        self.assertEqual(bridge.size, 7 * 16 + 32)

    def test_directions_and_decode(self):
        bridge = system("bridged").bridge
        self.assertEqual(bridge.region("adder_a").direction, "host_write")
        self.assertEqual(bridge.region("adder_y").direction, "host_read")
        sum_region = bridge.region("acc_sum")
        self.assertEqual(bridge.decode_address(sum_region.status), ("acc_sum", "status", 0))
        self.assertEqual(bridge.decode_address(sum_region.control), ("acc_sum", "control", 0))
        idle = bridge.counter("adder_y").address("idle_cycles")
        self.assertEqual(bridge.decode_address(idle), ("adder_y", "idle_cycles", 0))
        with self.assertRaises(BridgeError):
            bridge.decode_address(2)
        with self.assertRaises(BridgeError):
            bridge.decode_address(bridge.size)

    def test_api_json(self):
        document = system("bridged").bridge.to_json()
        self.assertEqual(document["kind"], "api_map")
        msg = next(c for c in document["channels"] if c["name"] == "disp_msg")
        self.assertEqual(msg["type"], "union{num: uint<8>, pair: struct{hi: uint<8>, lo: uint<8>}}")
        self.assertEqual(msg["width"], 17)

    def test_rejected_exposure(self):
        with self.assertRaises(BridgeError):
            assemble(
                design(
                    packages={"double8": "double8.json"},
                    instances={"d0": {"package": "double8"}, "d1": {"package": "double8"}},
                    connections=[{"from": "d0.y", "to": "d1.x"}],
                    bridge={"expose": ["d0_y"]},
                )
            )
        with self.assertRaises(BridgeError):
            assemble(
                design(
                    packages={"double8": "double8.json", "ext_scale": "ext_scale.json"},
                    instances={"fast": {"package": "double8", "clock_domain": "core"}, "slow": {"package": "ext_scale"}},
                    connections=[{"from": "fast.y", "to": "slow.x"}],
                    bridge={"expose": ["fast_x", "slow_y"]},
                )
            )

    def test_taps_read_through_bridge(self):
        bridged = system("bridged")
        stimulus = Stimulus(
            {"adder_a": list(range(30)), "adder_b": list(range(30)), "acc_x": list(range(30)), "disp_msg": []},
            {"adder_a": 0.6, "acc_x": 0.8},
            {"adder_y": 0.5, "acc_sum": 0.7},
            seed=4,
        )
        trace = simulate(bridged, stimulus, cycles=80)
        channel = SnapshotChannel.from_trace(bridged.bridge, trace)
        for tap in ("adder_y", "acc_sum"):
            self.assertEqual(channel.read_counters(tap), trace[tap].counters(wrap=True))
            self.assertEqual(sum(channel.read_counters(tap).values()), 80)
        with self.assertRaises(BridgeError):
            channel.write_word(0, 1)

    def test_late_taps_relayout_bridge(self):
        bridged = system("bridged")
        insert_perf_taps(bridged, ["disp_y"])
        self.assertEqual(bridged.taps, ["acc_sum", "adder_y", "disp_y"])
        self.assertEqual([e.channel for e in bridged.bridge.counters], ["acc_sum", "adder_y", "disp_y"])
        with self.assertRaises(AssemblyError):
            insert_perf_taps(bridged, ["nowhere"])


class TestSystemSimulation(unittest.TestCase):
    def test_chain(self):
        with open(definition_path("chain_stimulus.json")) as stream:
            stimulus = load_stimulus(json.load(stream))
        trace = simulate(system("chain"), stimulus, cycles=200)
        self.assertEqual(trace.tokens("d1_y"), [4 * x for x in range(1, 9)])
        self.assertEqual(trace.tokens("d0_y"), trace.tokens("d1_x"))

    def test_clock_crossing(self):
        trace = simulate(system("cdc"), Stimulus({"fast_x": list(range(1, 11))}), cycles=100)
        self.assertEqual(trace.tokens("slow_y"), [(6 * x) % 256 for x in range(1, 11)])
        self.assertEqual(trace["fast_y"].cycles[0] + 3, trace["slow_x"].cycles[0])


class TestPartition(unittest.TestCase):
    def test_matches_brute_force(self):
        rng = random.Random(2024)
        for trial in range(50):
            k = rng.randint(2, 3)
            n = rng.randint(2, 12 if k == 2 else 8)
            areas, edges = random_instance_graph(rng, n)
            total = sum(areas.values())
            spec = PartitionSpec(k, [rng.randint(total // k, total) for _ in range(k)], seed=trial)
            expected = brute_force(areas, edges, spec)
            if expected is None:
                with self.assertRaises(PartitionError):
                    partition_graph(areas, edges, spec)
                continue
            result = partition_graph(areas, edges, spec)
            self.assertEqual(result.method, "exact")
            self.assertEqual(result.cost, expected, f"trial {trial}")
            self.assertTrue(is_feasible_areas(areas, result.assignment, spec))

    def test_large_design(self):
        rng = random.Random(7)
        areas, edges = random_instance_graph(rng, 100)
        total = sum(areas.values())
        spec = PartitionSpec(4, [total * 0.3] * 4, seed=1)
        start = time.perf_counter()
        result = partition_graph(areas, edges, spec)
        self.assertLess(time.perf_counter() - start, 10.0)
        self.assertEqual(result.method, "kernighan_lin")
        self.assertTrue(is_feasible_areas(areas, result.assignment, spec))
        self.assertEqual(result.cost, sum(w for a, b, w in edges if result.assignment[a] != result.assignment[b]))

    def test_trivial_and_infeasible(self):
        areas = {"a": 5, "b": 5}
        edges = [("a", "b", 8)]
        self.assertEqual(partition_graph(areas, edges, PartitionSpec(1, [10])).cost, 0)
        self.assertEqual(partition_graph(areas, edges, PartitionSpec(2, [10])).cost, 0)
        self.assertEqual(partition_graph(areas, edges, PartitionSpec(2, [5, 5])).cost, 8)
        with self.assertRaises(PartitionError):
            partition_graph(areas, edges, PartitionSpec(2, [4, 6]))
        with self.assertRaises(PartitionError):
            partition_graph(areas, edges, PartitionSpec(2, [3, 3]))
        with self.assertRaises(PartitionError):
            PartitionSpec(2, [1, 2, 3])

    def test_system(self):
        result = partition(system("chain"), PartitionSpec(2, [8, 8]))
        self.assertEqual(result.cost, 8)
        self.assertEqual(sorted(result.members(0) + result.members(1)), ["d0", "d1"])
        self.assertEqual(result.to_json()["kind"], "partition")


class TestSystemEmission(unittest.TestCase):
    def test_lint_clean(self):
        for name in ("chain", "cdc", "bridged", "cycle_with_fifo"):
            assembled = system(name)
            text = emit_system(assembled)
            self.assertEqual(lint(text, lint_externs(assembled)), [], name)
            exposed = set(assembled.expose)
            top = [(e.channel, e.type.bit_width) for e in assembled.exports if e.channel not in exposed]
            self.assertEqual(check_port_contract(text, assembled.name, top), [], name)

    def test_exposed_channels_terminate_in_the_bridge(self):
        assembled = system("bridged")
        text = emit_system(assembled)
        exposed = [(e.channel, e.type.bit_width) for e in assembled.exports if e.channel in assembled.expose]
        self.assertEqual(len(exposed), 7)
        self.assertEqual(check_port_contract(text, bridge_module_name(assembled), exposed), [])
        # the top module keeps only clocks, reset and the host port
        top_errors = check_port_contract(text, assembled.name, exposed)
        self.assertEqual(len(top_errors), sum(3 if width else 2 for _, width in exposed))
        self.assertIn("host_addr", module_ports(dict(split_modules(text)[0])[assembled.name]))

    def test_buffers_emitted(self):
        self.assertIn("module llpm_fifo", emit_system(system("chain")))
        cdc_text = emit_system(system("cdc"))
        self.assertIn("module llpm_cdc_fifo", cdc_text)
        self.assertIn("ext_scale_core", cdc_text)
        self.assertNotIn("module ext_scale_core", cdc_text)

    def test_deterministic(self):
        self.assertEqual(emit_system(system("bridged")), emit_system(system("bridged")))


if __name__ == "__main__":
    unittest.main()
