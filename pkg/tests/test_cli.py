import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from llpm.cli import EXIT_ERROR, EXIT_FAILURE, EXIT_OK, run_cli
from tests.fixtures import definition_path


def call(*argv):
    """Run the CLI, returning (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run_cli([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


class TestCliExitCodes(unittest.TestCase):
    def test_check(self):
        code, out, _ = call("check", definition_path("add8.json"))
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("add8 1.0.0: ok (0x"))

    def test_check_invalid_module(self):
        code, _, err = call("check", definition_path("bad_type.json"))
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("error: bad_type", err)

    def test_schema_errors(self):
        code, _, err = call("check", definition_path("future_schema.json"))
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("llpm_schema", err)
        self.assertEqual(call("check", definition_path("no_such_file.json"))[0], EXIT_ERROR)

    def test_usage_errors(self):
        self.assertEqual(call("check", definition_path("add8.json"), "--colour")[0], EXIT_ERROR)
        self.assertEqual(call("frobnicate")[0], EXIT_ERROR)

    def test_missing_config(self):
        code, _, err = call("check", definition_path("add8.json"), "--config", definition_path("none.yaml"))
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("not found", err)

    def test_deadlock(self):
        code, out, err = call("assemble", definition_path("cycle_no_fifo.json"))
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("deadlock: zero-storage cycle a -> b -> a", err)
        self.assertEqual(json.loads(out)["kind"], "assembled")


class TestCliCommands(unittest.TestCase):
    def setUp(self):
        self.scratch = tempfile.TemporaryDirectory()
        self.addCleanup(self.scratch.cleanup)

    def path(self, name):
        return os.path.join(self.scratch.name, name)

    def test_interp(self):
        code, out, _ = call(
            "interp", definition_path("add8.json"), "--stimulus", definition_path("add8_stimulus.json"), "--steps", 9
        )
        self.assertEqual(code, EXIT_OK)
        document = json.loads(out)
        self.assertEqual(document["kind"], "streams")
        self.assertEqual(document["outputs"]["y"], [11, 22, 33, 44, 55, 66, 77, 88, 3])

    def test_pipeline_latency_sources(self):
        code, out, _ = call("pipeline", definition_path("fir3.json"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["latency"], 4)
        _, out, _ = call("pipeline", definition_path("fir3.json"), "--latency", definition_path("latency.yaml"))
        self.assertEqual(json.loads(out)["latency"], 5)
        _, out, _ = call("pipeline", definition_path("fir3.json"), "--config", definition_path("llpm_config.yaml"))
        self.assertEqual(json.loads(out)["latency"], 5)

    def test_verify(self):
        code, out, _ = call("verify", definition_path("accum.json"), "--trials", 20)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("accum: 20 trials passed", out)

    def test_system_flow(self):
        assembled = self.path("chain_assembled.json")
        self.assertEqual(call("assemble", definition_path("chain.json"), "-o", assembled)[0], EXIT_OK)

        verilog = self.path("chain.v")
        self.assertEqual(call("emit", assembled, "-o", verilog)[0], EXIT_OK)
        with open(verilog) as stream:
            text = stream.read()
        self.assertIn("module chain", text)
        self.assertIn("module llpm_fifo", text)

        trace = self.path("chain_trace.json")
        code, _, _ = call("sim", assembled, "--stimulus", definition_path("chain_stimulus.json"), "--cycles", 200, "-o", trace)
        self.assertEqual(code, EXIT_OK)
        with open(trace) as stream:
            recorded = json.load(stream)
        self.assertEqual(recorded["channels"]["d1_y"]["tokens"], [4 * x for x in range(1, 9)])

        code, out, _ = call("trace", trace, "--channel", "d1_y")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("d1_y : uint<8>", out)
        self.assertEqual(call("trace", trace, "--channel", "nope")[0], EXIT_FAILURE)

    def test_partition(self):
        code, out, _ = call("partition", definition_path("chain.json"), "-k", 2, "--capacity", 8)
        self.assertEqual(code, EXIT_OK)
        result = json.loads(out)
        self.assertEqual(result["cost"], 8)
        self.assertEqual(sorted(result["assignment"]), ["d0", "d1"])
        self.assertEqual(call("partition", definition_path("chain.json"), "-k", 2, "--capacity", "x")[0], EXIT_ERROR)

    def test_bridge(self):
        header, docs = self.path("bridged.h"), self.path("bridged.rst")
        code, out, _ = call(
            "bridge",
            definition_path("bridged.json"),
            "--expose",
            "acc_sum,adder_y",
            "--header",
            header,
            "--docs",
            docs,
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["kind"], "api_map")
        self.assertTrue(os.path.exists(header))
        self.assertTrue(os.path.exists(docs))


if __name__ == "__main__":
    unittest.main()
