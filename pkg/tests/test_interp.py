import random
import unittest

from llpm.errors import InterpretError, NotInterpretableError
from llpm.interp import run
from llpm.passes import random_topo_order
from llpm.values import UnionValue, is_well_typed, random_value
from tests.fixtures import IR_FIXTURES, lagged_sum, load_module


class TestInterp(unittest.TestCase):
    def test_adder(self):
        module = load_module("add8")
        self.assertEqual(run(module, {"a": [1, 2, 3], "b": [4, 5, 6]}, 3), {"y": [5, 7, 9]})
        self.assertEqual(run(module, {"a": [255], "b": [1]}, 1), {"y": [0]})

    def test_accumulator(self):
        module = load_module("accum")
        self.assertEqual(run(module, {"x": [1, 2, 3]}, 3), {"sum": [1, 3, 6]})
        self.assertEqual(run(module, {"x": [65535, 2]}, 2), {"sum": [65535, 1]})

    def test_delays_numbered_before_their_readers(self):
        module = lagged_sum()
        self.assertEqual(run(module, {"x": [1, 1, 1, 1, 1]}, 5), {"y": [1, 2, 4, 7, 12]})
        rng = random.Random(5)
        for _ in range(5):
            order = random_topo_order(module.behavior, rng)
            self.assertEqual(run(module, {"x": [1, 1, 1, 1, 1]}, 5, order)["y"], [1, 2, 4, 7, 12])

    def test_fir3_taps(self):
        module = load_module("fir3")
        out = run(module, {"x": [1, 2, 3, 4], "h": [1, 1, 2, -1]}, 4)
        # y[k] = x[k]*h[k] + x[k-1] - x[k-2]
        self.assertEqual(out, {"y": [1, 3, 7, -3]})

    def test_union_dispatch(self):
        module = load_module("union_dispatch")
        tokens = [UnionValue("num", 9), UnionValue("pair", {"hi": 0xF0, "lo": 0x0F})]
        self.assertEqual(run(module, {"msg": tokens}, 2), {"kind": [0, 1], "y": [9, 0xFF]})

    def test_struct_swap(self):
        module = load_module("struct_swap")
        out = run(module, {"p": [{"x": 1, "y": 2}, {"x": 3, "y": 4}], "i": [0, 1]}, 2)
        self.assertEqual(out["q"], [{"x": 2, "y": 1}, {"x": 4, "y": 3}])
        self.assertEqual(out["e"], [1, 4])

    def test_errors(self):
        module = load_module("add8")
        with self.assertRaises(InterpretError):
            run(module, {"a": [1]}, 1)
        with self.assertRaises(InterpretError):
            run(module, {"a": [1], "b": []}, 1)
        with self.assertRaises(InterpretError):
            run(module, {"a": [256], "b": [1]}, 1)
        with self.assertRaises(InterpretError):
            run(module, {"a": [1], "b": [1], "c": [1]}, 1)

    def test_extern_model(self):
        module = load_module("ext_scale")
        self.assertEqual(run(module, {"x": [1, 100]}, 2), {"y": [3, 44]})
        model_less = module.with_graph(None)
        with self.assertRaises(NotInterpretableError):
            run(model_less, {"x": [1]}, 1)

    def test_determinism_under_random_orders(self):
        rng = random.Random(17)
        for name in IR_FIXTURES:
            module = load_module(name)
            streams = {p.name: [random_value(p.type, rng) for _ in range(12)] for p in module.inputs}
            expected = run(module, streams, 12)
            for _ in range(5):
                order = random_topo_order(module.behavior, rng)
                self.assertEqual(run(module, streams, 12, order), expected, name)

    def test_prefix_monotonicity_and_typing(self):
        rng = random.Random(23)
        for name in IR_FIXTURES:
            module = load_module(name)
            streams = {p.name: [random_value(p.type, rng) for _ in range(10)] for p in module.inputs}
            shorter = run(module, streams, 9)
            longer = run(module, streams, 10)
            for port in module.outputs:
                self.assertEqual(longer[port.name][:9], shorter[port.name])
                self.assertEqual(len(longer[port.name]), 10)
                self.assertTrue(all(is_well_typed(v, port.type) for v in longer[port.name]))


if __name__ == "__main__":
    unittest.main()
