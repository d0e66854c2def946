"""
Project configuration from `llpm_config.yaml`.
"""

import logging
from dataclasses import dataclass, field
from os.path import basename, dirname, join, realpath
from typing import Optional

import yaml
from marshmallow import Schema, ValidationError, fields, post_load, validate

from llpm.errors import ConfigError
from llpm.pipeline import LatencyTable
from llpm.system.design import DEFAULT_CDC_DEPTH
from llpm.system.partition import DEFAULT_EXACT_LIMIT, DEFAULT_RESTARTS

_logger = logging.getLogger("llpm")

CONFIG_FILE_NAME = "llpm_config.yaml"
DEFAULT_MAX_STREAM = 24
DEFAULT_MAX_SETTLE = 64


@dataclass
class LlpmConfig:
    latency: LatencyTable = field(default_factory=LatencyTable)
    cdc_depth: int = DEFAULT_CDC_DEPTH
    exact_limit: int = DEFAULT_EXACT_LIMIT
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    max_stream: int = DEFAULT_MAX_STREAM
    max_settle: int = DEFAULT_MAX_SETTLE
    path: Optional[str] = None


def _power_of_two(value):
    if value < 4 or value & (value - 1):
        raise ValidationError("CDC depth must be a power of two, at least 4.")


class AssemblyConfigSchema(Schema):
    cdc_depth = fields.Integer(strict=True, load_default=DEFAULT_CDC_DEPTH, validate=_power_of_two)


class PartitionConfigSchema(Schema):
    exact_limit = fields.Integer(strict=True, load_default=DEFAULT_EXACT_LIMIT, validate=validate.Range(min=0))
    restarts = fields.Integer(strict=True, load_default=DEFAULT_RESTARTS, validate=validate.Range(min=1))
    seed = fields.Integer(strict=True, load_default=0)


class VerifyConfigSchema(Schema):
    max_stream = fields.Integer(strict=True, load_default=DEFAULT_MAX_STREAM, validate=validate.Range(min=0))


class SimConfigSchema(Schema):
    max_settle = fields.Integer(strict=True, load_default=DEFAULT_MAX_SETTLE, validate=validate.Range(min=1))


class ConfigSchema(Schema):
    latency = fields.Dict(keys=fields.String(), values=fields.Raw(), load_default=dict)
    assembly = fields.Nested(AssemblyConfigSchema, load_default=lambda: AssemblyConfigSchema().load({}))
    partition = fields.Nested(PartitionConfigSchema, load_default=lambda: PartitionConfigSchema().load({}))
    verify = fields.Nested(VerifyConfigSchema, load_default=lambda: VerifyConfigSchema().load({}))
    sim = fields.Nested(SimConfigSchema, load_default=lambda: SimConfigSchema().load({}))

    @post_load
    def make_config(self, data, **kwargs):
        try:
            table = LatencyTable.from_mapping(data["latency"])
        except ValidationError as error:
            raise ValidationError(error.messages, "latency") from error
        assembly, partition = data["assembly"], data["partition"]
        return LlpmConfig(
            table,
            assembly["cdc_depth"],
            partition["exact_limit"],
            partition["restarts"],
            partition["seed"],
            data["verify"]["max_stream"],
            data["sim"]["max_settle"],
        )


def config_from_object(document) -> LlpmConfig:
    """
    Raises:
        marshmallow.ValidationError: unknown keys or bad values
    """
    return ConfigSchema().load(document or {})


def find_config(config_path: str, traverse_path: bool = False) -> Optional[str]:
    """
    Resolve a config path, optionally looking for the same file name in
    each parent directory. Returns None when no file is found.
    """
    real_path = realpath(config_path)
    while True:
        try:
            with open(real_path):
                return real_path
        except FileNotFoundError:
            if not traverse_path:
                return None
            new_config_path = realpath(join(dirname(real_path), "..", basename(real_path)))
            if new_config_path == real_path:
                # we're at the root, and have not found the file
                return None
            real_path = new_config_path


def load_config(config_path: Optional[str] = None, traverse_path: bool = False) -> LlpmConfig:
    """
    Load a project config. With no path, `llpm_config.yaml` is looked up from
    the working directory upwards, and a missing file yields the defaults.

    Raises:
        ConfigError: an explicit path that does not exist, or YAML that does not parse
        marshmallow.ValidationError: schema violations
    """
    if config_path is None:
        found = find_config(CONFIG_FILE_NAME, traverse_path=True)
        if found is None:
            return LlpmConfig()
    else:
        found = find_config(config_path, traverse_path)
        if found is None:
            raise ConfigError(f"config file '{config_path}' not found")
    with open(found) as config_stream:
        try:
            document = yaml.safe_load(config_stream)
        except yaml.YAMLError as error:
            raise ConfigError(f"{found}: {error}") from error
    config = config_from_object(document)
    config.path = found
    _logger.debug("config loaded from %s", found)
    return config


def load_latency_table(path: str) -> LatencyTable:
    """
    Read a latency table file, YAML or JSON (JSON is read by the YAML loader).

    Raises:
        OSError: the file cannot be read
        ConfigError: the file does not parse
        marshmallow.ValidationError: unknown op names or bad values
    """
    with open(path) as stream:
        try:
            document = yaml.safe_load(stream)
        except yaml.YAMLError as error:
            raise ConfigError(f"{path}: {error}") from error
    if isinstance(document, dict) and "latencies" in document:
        document = document["latencies"]
    return LatencyTable.from_mapping(document)
