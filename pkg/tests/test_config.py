import json
import os
import tempfile
import unittest

from marshmallow import ValidationError

from llpm.config import (
    CONFIG_FILE_NAME,
    DEFAULT_MAX_SETTLE,
    LlpmConfig,
    config_from_object,
    find_config,
    load_config,
    load_latency_table,
)
from llpm.definitions.ops import OpKind
from llpm.errors import ConfigError
from llpm.pipeline import LatencyTable
from llpm.system.partition import DEFAULT_EXACT_LIMIT
from tests.fixtures import definition_path


class TestConfig(unittest.TestCase):
    def test_load(self):
        path = definition_path("llpm_config.yaml")
        config = load_config(path)
        self.assertEqual(config.latency[OpKind.MUL], 3)
        self.assertEqual(config.latency[OpKind.ADD], 1)
        self.assertEqual(config.cdc_depth, 8)
        self.assertEqual(config.restarts, 4)
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.max_stream, 16)
        self.assertEqual(config.exact_limit, DEFAULT_EXACT_LIMIT)
        self.assertEqual(config.max_settle, DEFAULT_MAX_SETTLE)
        self.assertEqual(config.path, os.path.realpath(path))

    def test_defaults(self):
        config = config_from_object(None)
        self.assertEqual(config, LlpmConfig())
        self.assertEqual(config.latency, LatencyTable())

    def test_invalid(self):
        with self.assertRaises(ValidationError):
            config_from_object({"assembly": {"cdc_depth": 6}})
        with self.assertRaises(ValidationError):
            config_from_object({"partition": {"restarts": 0}})
        with self.assertRaises(ValidationError):
            config_from_object({"colour": "blue"})
        with self.assertRaises(ValidationError) as context:
            config_from_object({"latency": {"divide": 2}})
        self.assertIn("latency", context.exception.messages)

    def test_missing_explicit_file(self):
        with self.assertRaises(ConfigError):
            load_config(definition_path("no_such_config.yaml"))

    def test_lookup_walks_up(self):
        with tempfile.TemporaryDirectory() as top:
            nested = os.path.join(top, "a", "b")
            os.makedirs(nested)
            with open(os.path.join(top, CONFIG_FILE_NAME), "w") as stream:
                stream.write("verify:\n  max_stream: 3\n")
            found = find_config(os.path.join(nested, CONFIG_FILE_NAME), traverse_path=True)
            self.assertEqual(found, os.path.realpath(os.path.join(top, CONFIG_FILE_NAME)))
            self.assertIsNone(find_config(os.path.join(nested, CONFIG_FILE_NAME)))
            self.assertEqual(load_config(os.path.join(nested, CONFIG_FILE_NAME), traverse_path=True).max_stream, 3)

    def test_bad_yaml(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, CONFIG_FILE_NAME)
            with open(path, "w") as stream:
                stream.write("latency: [mul: 3\n")
            with self.assertRaises(ConfigError):
                load_config(path)

    def test_latency_table_files(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "latency.json")
            with open(path, "w") as stream:
                json.dump({"latencies": {"mul": 5, "mux": 0}}, stream)
            table = load_latency_table(path)
        self.assertEqual(table[OpKind.MUL], 5)
        self.assertEqual(table[OpKind.MUX], 0)
        self.assertEqual(load_latency_table(definition_path("latency.yaml"))[OpKind.MUL], 3)


if __name__ == "__main__":
    unittest.main()
