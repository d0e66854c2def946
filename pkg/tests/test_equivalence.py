import unittest

from llpm.definitions.graph import Edge
from llpm.definitions.ops import OpKind
from llpm.pipeline import LatencyTable, pipeline
from llpm.sim.equivalence import cycle_budget, equivalence_check
from tests.fixtures import IR_FIXTURES, lagged_sum, load_module


class TestEquivalence(unittest.TestCase):
    def test_fixtures_pass(self):
        for name in IR_FIXTURES + ("ext_scale", "wire8"):
            module = load_module(name)
            result = equivalence_check(module, pipeline(module), trials=40, seed=1)
            self.assertTrue(result.passed, f"{name}: {result.counterexample}")
            self.assertEqual(result.trials, 40)

    def test_recurrence_read_before_its_delay(self):
        module = lagged_sum()
        netlist = pipeline(module)
        self.assertEqual(netlist.latency, 1)
        result = equivalence_check(module, netlist, trials=60, seed=4)
        self.assertTrue(result.passed, result.counterexample)

    def test_other_latency_tables(self):
        table = LatencyTable({OpKind.MUL: 4, OpKind.ADD: 0, OpKind.MUX: 2})
        for name in ("fir3", "union_dispatch", "accum"):
            module = load_module(name)
            result = equivalence_check(module, pipeline(module, table=table), trials=30, seed=2)
            self.assertTrue(result, f"{name}: {result.counterexample}")

    def test_missing_register_is_caught(self):
        module = load_module("fir3")
        netlist = pipeline(module)
        mul_to_add = Edge(4, 5, 0)
        self.assertEqual(netlist.registers[mul_to_add], 2)
        result = equivalence_check(module, netlist.without_register(mul_to_add), trials=50, seed=3)
        self.assertFalse(result.passed)
        counterexample = result.counterexample
        self.assertEqual(counterexample.channel, "y")
        self.assertIn("expected", str(counterexample))

    def test_every_register_removal_is_caught(self):
        module = load_module("fir3")
        netlist = pipeline(module)
        carrying = [e for e, count in sorted(netlist.registers.items()) if count > 0]
        self.assertEqual(len(carrying), 5)
        for e in carrying:
            result = equivalence_check(module, netlist.without_register(e), trials=1000, seed=9)
            self.assertFalse(result.passed, f"register on {e} removed without effect")

    def test_zero_trials(self):
        module = load_module("add8")
        result = equivalence_check(module, pipeline(module), trials=0)
        self.assertTrue(result.passed)
        self.assertEqual(result.trials, 0)

    def test_reproducible(self):
        module = load_module("fir3")
        mutant = pipeline(module).without_register(Edge(4, 5, 0))
        first = equivalence_check(module, mutant, trials=50, seed=8)
        second = equivalence_check(module, mutant, trials=50, seed=8)
        self.assertEqual(first, second)

    def test_cycle_budget(self):
        self.assertEqual(cycle_budget(10, 2, {"y": 1.0}), 20 * 14 + 50)
        self.assertEqual(cycle_budget(10, 2, {"y": 0.0, "z": 1.0}), 4 * 12 + 20)


if __name__ == "__main__":
    unittest.main()
