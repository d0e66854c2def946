import unittest

from marshmallow import ValidationError

from llpm.config import load_latency_table
from llpm.datatypes import UInt
from llpm.definitions.graph import Edge, GraphBuilder
from llpm.definitions.module import DataflowBody, Direction, Module, Port
from llpm.definitions.ops import OpKind
from llpm.errors import LlpmError
from llpm.pipeline import (
    LatencyTable,
    Schedule,
    check_schedule,
    netlist_from_json,
    netlist_to_json,
    pipeline,
    schedule,
    stage_boundaries,
)
from tests.fixtures import IR_FIXTURES, definition_path, load_module

U8 = UInt(8)


def add_then_mul():
    b = GraphBuilder()
    a = b.input("a", U8)
    c = b.input("b", U8)
    d = b.input("c", U8)
    b.output("y", b.mul(b.add_op(a, c), d))
    ports = (
        Port("a", Direction.IN, U8),
        Port("b", Direction.IN, U8),
        Port("c", Direction.IN, U8),
        Port("y", Direction.OUT, U8),
    )
    return Module("add_mul", ports, DataflowBody(b.build()))


class TestLatencyTable(unittest.TestCase):
    def test_defaults(self):
        table = LatencyTable()
        self.assertEqual(table[OpKind.ADD], 1)
        self.assertEqual(table[OpKind.MUL], 2)
        self.assertEqual(table[OpKind.DELAY], 1)
        self.assertEqual(table[OpKind.FIELD_EXTRACT], 0)
        self.assertEqual(table.to_json()["array_index"], 1)

    def test_from_yaml(self):
        table = load_latency_table(definition_path("latency.yaml"))
        self.assertEqual(table[OpKind.MUL], 3)
        self.assertEqual(table[OpKind.ADD], 1)
        self.assertEqual(table, LatencyTable({OpKind.MUL: 3}))

    def test_bad_tables(self):
        with self.assertRaises(LlpmError):
            LatencyTable({OpKind.DELAY: 2})
        with self.assertRaises(LlpmError):
            LatencyTable({OpKind.ADD: -1})
        with self.assertRaises(ValidationError):
            LatencyTable.from_mapping({"divide": 4})
        with self.assertRaises(ValidationError):
            LatencyTable.from_mapping({"delay": 0})


class TestSchedule(unittest.TestCase):
    def test_adder(self):
        module = load_module("add8")
        sched = schedule(module.behavior)
        self.assertEqual(sched.stages, {0: 0, 1: 0, 2: 0, 3: 1})
        self.assertEqual(sched.latency, 1)

    def test_add_then_mul(self):
        module = add_then_mul()
        sched = schedule(module.behavior)
        self.assertEqual(sched.latency, 3)
        netlist = pipeline(module)
        self.assertEqual(netlist.latency, 3)
        # add->mul and c->mul cross one stage, mul->y crosses two
        self.assertEqual(netlist.register_count, 4)

        slow = pipeline(module, table=LatencyTable({OpKind.MUL: 3}))
        self.assertEqual(slow.latency, 4)
        self.assertEqual(slow.register_count, 5)

    def test_passthrough(self):
        netlist = pipeline(load_module("wire8"))
        self.assertEqual(netlist.latency, 0)
        self.assertEqual(netlist.register_count, 0)

    def test_recurrence(self):
        module = load_module("accum")
        sched = schedule(module.behavior)
        self.assertEqual(sched.latency, 1)
        self.assertEqual(sched[1], sched[2])
        self.assertEqual(pipeline(module).register_count, 1)

    def test_fir_delays_are_exempt(self):
        sched = schedule(load_module("fir3").behavior)
        self.assertEqual(sched[2], 0)
        self.assertEqual(sched[3], 0)
        self.assertEqual(sched[5], 2)
        self.assertEqual(sched.latency, 4)

    def test_legal_for_fixtures(self):
        for table in (LatencyTable(), LatencyTable({OpKind.MUL: 3, OpKind.ADD: 0})):
            for name in IR_FIXTURES:
                graph = load_module(name).behavior
                sched = schedule(graph, table)
                self.assertEqual(check_schedule(graph, sched, table), [], name)

    def test_outputs_aligned(self):
        for name in IR_FIXTURES:
            graph = load_module(name).behavior
            sched = schedule(graph)
            for node in graph.nodes_of_kind(OpKind.OUTPUT):
                self.assertEqual(sched[node.id], sched.latency, name)

    def test_illegal_schedule_reported(self):
        graph = load_module("add8").behavior
        sched = Schedule({0: 0, 1: 0, 2: 0, 3: 0}, 0)
        self.assertEqual(len(check_schedule(graph, sched)), 1)


class TestNetlist(unittest.TestCase):
    def test_register_counts_follow_stages(self):
        for name in IR_FIXTURES:
            netlist = pipeline(load_module(name))
            for e, count in netlist.registers.items():
                self.assertEqual(count, netlist.stages[e.dst] - netlist.stages[e.src], name)
            self.assertEqual(len(stage_boundaries(netlist)), netlist.register_count)

    def test_without_register(self):
        netlist = pipeline(load_module("add8"))
        e = Edge(2, 3, 0)
        mutant = netlist.without_register(e)
        self.assertEqual(mutant.registers[e], 0)
        self.assertEqual(netlist.registers[e], 1)
        with self.assertRaises(LlpmError):
            mutant.without_register(e)

    def test_json(self):
        for name in IR_FIXTURES:
            netlist = pipeline(load_module(name), table=LatencyTable({OpKind.MUL: 3}))
            document = netlist_to_json(netlist)
            self.assertEqual(document["kind"], "netlist")
            self.assertEqual(document["register_count"], netlist.register_count)
            loaded = netlist_from_json(document)
            self.assertEqual(loaded.stages, netlist.stages)
            self.assertEqual(loaded.registers, netlist.registers)
            self.assertEqual(loaded.order, netlist.order)
            self.assertEqual(loaded.latency, netlist.latency)
            self.assertEqual(loaded.latency_table, netlist.latency_table)

    def test_json_rejects_missing_registers(self):
        document = netlist_to_json(pipeline(load_module("add8")))
        document["registers"] = document["registers"][1:]
        with self.assertRaises(ValidationError):
            netlist_from_json(document)


if __name__ == "__main__":
    unittest.main()
