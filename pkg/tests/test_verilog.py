import importlib.resources
import os
import tempfile
import unittest

from llpm.datatypes import UInt, Void
from llpm.definitions.graph import GraphBuilder
from llpm.definitions.module import DataflowBody, Direction, Module, Port
from llpm.errors import EmitError
from llpm.formatting import check_verilog_syntax, is_iverilog_available
from llpm.generators.generator_verilog import emit_module, process
from llpm.generators.lint import check_port_contract, lint
from llpm.pipeline import pipeline
from tests.fixtures import IR_FIXTURES, load_module


def emitted(name):
    return emit_module(pipeline(load_module(name)))


def contract(module):
    return [(p.name, p.width) for p in module.ports]


class TestModuleEmission(unittest.TestCase):
    def test_golden_modules(self):
        for name in IR_FIXTURES:
            golden = importlib.resources.files("tests").joinpath(f"golden/{name}.v").read_text()
            self.assertEqual(emitted(name), golden, name)

    def test_deterministic(self):
        for name in IR_FIXTURES:
            self.assertEqual(emitted(name), emitted(name))

    def test_lint_clean(self):
        for name in IR_FIXTURES + ("wire8", "double8"):
            text = emitted(name)
            self.assertEqual(lint(text), [], name)
            self.assertEqual(check_port_contract(text, name, contract(load_module(name))), [], name)

    def test_delay_registers(self):
        text = emitted("accum")
        self.assertIn("reg [15:0] llpm_d1;", text)
        self.assertIn("llpm_d1 <= 16'h0000;", text)

    def test_zero_width_channel(self):
        b = GraphBuilder()
        go = b.input("go", Void())
        x = b.input("x", UInt(4))
        b.output("y", b.not_op(x))
        b.output("ack", go)
        ports = (
            Port("go", Direction.IN, Void()),
            Port("x", Direction.IN, UInt(4)),
            Port("y", Direction.OUT, UInt(4)),
            Port("ack", Direction.OUT, Void()),
        )
        module = Module("pulse", ports, DataflowBody(b.build()))
        text = emit_module(pipeline(module))
        self.assertNotIn("go_data", text)
        self.assertNotIn("ack_data", text)
        self.assertEqual(check_port_contract(text, "pulse", contract(module)), [])
        self.assertEqual(lint(text), [])

    def test_rename(self):
        text = emit_module(pipeline(load_module("add8")), "adder_top")
        self.assertIn("module adder_top (", text)

    def test_extern_not_emitted(self):
        with self.assertRaises(EmitError):
            emit_module(pipeline(load_module("ext_scale")))

    def test_identifier_collision(self):
        b = GraphBuilder()
        x = b.input("llpm_in", UInt(2))
        b.output("y", x)
        ports = (Port("llpm_in", Direction.IN, UInt(2)), Port("y", Direction.OUT, UInt(2)))
        module = Module("clash", ports, DataflowBody(b.build()))
        with self.assertRaises(EmitError):
            emit_module(pipeline(module))

    def test_process_writes_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "out", "add8.v")
            text = process(pipeline(load_module("add8")), {"paths": {"output_file": path}})
            with open(path) as stream:
                self.assertEqual(stream.read(), text)

    @unittest.skipUnless(is_iverilog_available(), "iverilog not installed")
    def test_iverilog_accepts(self):
        with tempfile.TemporaryDirectory() as directory:
            paths = []
            for name in IR_FIXTURES:
                path = os.path.join(directory, f"{name}.v")
                with open(path, "w") as stream:
                    stream.write(emitted(name))
                paths.append(path)
            ok, log = check_verilog_syntax(paths)
            self.assertTrue(ok, log)


class TestLint(unittest.TestCase):
    def test_unbalanced(self):
        self.assertEqual(lint("module a (\n);\n"), ["module 'a' has no endmodule"])
        self.assertEqual(lint("endmodule\n"), ["endmodule without module"])

    def test_duplicate_module(self):
        text = "module a (\n);\nendmodule\nmodule a (\n);\nendmodule\n"
        self.assertEqual(lint(text), ["module 'a' is defined more than once"])

    def test_drivers(self):
        text = "\n".join(
            [
                "module m (",
                "  output wire o",
                ");",
                "  wire w;",
                "  wire u;",
                "  assign w = 1'b0;",
                "  assign w = 1'b1;",
                "  assign o = w;",
                "endmodule",
            ]
        )
        self.assertEqual(lint(text), ["m: wire 'u' is never driven", "m: wire 'w' has 2 drivers"])

    def test_port_contract(self):
        text = emitted("add8")
        expected = ["add8: port 'z_data' missing", "add8: port 'z_valid' missing", "add8: port 'z_ready' missing"]
        self.assertEqual(check_port_contract(text, "add8", [("z", 3)]), expected)
        self.assertEqual(check_port_contract(text, "other", []), ["module 'other' not found"])


if __name__ == "__main__":
    unittest.main()
