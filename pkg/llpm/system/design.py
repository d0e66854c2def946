"""
System designs: instances of packages, the connections between their
ports, exported ports, clock frequencies, taps and bridge requests.
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from llpm.deserializer import load_document
from llpm.definitions.schemas import identifier
from llpm.unit_field import FrequencyField
from llpm.system.manifest import DEFAULT_CLOCK_DOMAIN, Package, load_package

DESIGN_SCHEMA_VERSION = 1
DEFAULT_CDC_DEPTH = 4


@dataclass(frozen=True, order=True)
class Endpoint:
    instance: str
    port: str

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        """
        Raises:
            ValueError: if the text is not of the form `instance.port`
        """
        parts = text.split(".") if isinstance(text, str) else []
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"'{text}' is not of the form instance.port")
        return cls(parts[0], parts[1])

    @property
    def channel(self) -> str:
        return f"{self.instance}_{self.port}"

    def __str__(self):
        return f"{self.instance}.{self.port}"


@dataclass(frozen=True)
class InstanceSpec:
    package: str
    clock_domain: Optional[str] = None


@dataclass(frozen=True)
class ConnectionSpec:
    source: Endpoint
    sink: Endpoint
    fifo_depth: int = 0
    cdc_depth: Optional[int] = None


@dataclass
class SystemDesign:
    name: str
    packages: Dict[str, str]
    instances: Dict[str, InstanceSpec]
    connections: List[ConnectionSpec] = field(default_factory=list)
    exports: Optional[List[Endpoint]] = None
    clocks: Dict[str, object] = field(default_factory=dict)
    taps: List[str] = field(default_factory=list)
    expose: List[str] = field(default_factory=list)
    base_dir: str = "."

    def package_path(self, name: str) -> str:
        return os.path.normpath(os.path.join(self.base_dir, self.packages[name]))

    def load_packages(self) -> Dict[str, Package]:
        """
        Raises:
            OSError, marshmallow.ValidationError, PackageError: from load_package
        """
        return {name: load_package(self.package_path(name)) for name in sorted(self.packages)}


class EndpointField(fields.Field):
    """
    Marshmallow Field that serializes to `instance.port`
    and deserializes to an Endpoint.
    """

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else str(value)

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return Endpoint.parse(value)
        except ValueError as error:
            raise ValidationError(str(error)) from error


def _power_of_two(value):
    if value < 4 or value & (value - 1):
        raise ValidationError("CDC depth must be a power of two, at least 4.")


class InstanceSpecSchema(Schema):
    package = fields.String(required=True, validate=identifier)
    clock_domain = fields.String(load_default=None, allow_none=True, validate=identifier)

    @post_load
    def make_instance(self, data, **kwargs):
        return InstanceSpec(data["package"], data["clock_domain"])


class ConnectionSpecSchema(Schema):
    source = EndpointField(required=True, data_key="from")
    sink = EndpointField(required=True, data_key="to")
    fifo_depth = fields.Integer(load_default=0, strict=True, validate=validate.Range(min=0))
    cdc_depth = fields.Integer(load_default=None, allow_none=True, strict=True, validate=_power_of_two)

    @post_load
    def make_connection(self, data, **kwargs):
        return ConnectionSpec(data["source"], data["sink"], data["fifo_depth"], data["cdc_depth"])


class BridgeRequestSchema(Schema):
    expose = fields.List(fields.String(), load_default=list)


class SystemDesignSchema(Schema):
    llpm_schema = fields.Integer(required=True, validate=validate.Equal(DESIGN_SCHEMA_VERSION))
    kind = fields.String(load_default="design", validate=validate.Equal("design"))
    name = fields.String(required=True, validate=identifier)
    packages = fields.Dict(keys=fields.String(validate=identifier), values=fields.String(), required=True)
    instances = fields.Dict(
        keys=fields.String(validate=identifier), values=fields.Nested(InstanceSpecSchema), required=True
    )
    connections = fields.List(fields.Nested(ConnectionSpecSchema), load_default=list)
    exports = fields.List(EndpointField(), load_default=None, allow_none=True)
    clocks = fields.Dict(keys=fields.String(validate=identifier), values=FrequencyField(), load_default=dict)
    taps = fields.List(fields.String(), load_default=list)
    bridge = fields.Nested(BridgeRequestSchema, load_default=None, allow_none=True)

    def __init__(self, *args, base_dir=".", **kwargs):
        self.base_dir = base_dir
        super().__init__(*args, **kwargs)

    @validates_schema
    def validate_references(self, data, **kwargs):
        for name, spec in data.get("instances", {}).items():
            if spec.package not in data.get("packages", {}):
                raise ValidationError(f"Instance '{name}' uses unknown package '{spec.package}'.", "instances")

    @post_load
    def make_design(self, data, **kwargs):
        return SystemDesign(
            data["name"],
            data["packages"],
            data["instances"],
            data["connections"],
            data["exports"],
            data["clocks"],
            data["taps"],
            data["bridge"]["expose"] if data["bridge"] else [],
            self.base_dir,
        )


def design_from_json(document: dict, base_dir: str = ".") -> SystemDesign:
    """
    Raises:
        marshmallow.ValidationError: with path-addressed messages
    """
    return SystemDesignSchema(base_dir=base_dir).load(document)


def load_design(path: str) -> SystemDesign:
    document = load_document(path, "design")
    return design_from_json(document, os.path.dirname(os.path.abspath(path)))


def design_to_json(design: SystemDesign) -> dict:
    document = {
        "llpm_schema": DESIGN_SCHEMA_VERSION,
        "kind": "design",
        "name": design.name,
        "packages": dict(sorted(design.packages.items())),
        "instances": {},
        "connections": [],
    }
    for name, spec in sorted(design.instances.items()):
        entry = {"package": spec.package}
        if spec.clock_domain is not None:
            entry["clock_domain"] = spec.clock_domain
        document["instances"][name] = entry
    for conn in design.connections:
        entry = {"from": str(conn.source), "to": str(conn.sink), "fifo_depth": conn.fifo_depth}
        if conn.cdc_depth is not None:
            entry["cdc_depth"] = conn.cdc_depth
        document["connections"].append(entry)
    if design.exports is not None:
        document["exports"] = [str(e) for e in design.exports]
    if design.clocks:
        frequency = FrequencyField()
        document["clocks"] = {k: frequency._serialize(v, k, None) for k, v in sorted(design.clocks.items())}
    if design.taps:
        document["taps"] = list(design.taps)
    if design.expose:
        document["bridge"] = {"expose": list(design.expose)}
    return document


def instance_domain(design: SystemDesign, packages: Dict[str, Package], name: str) -> Tuple[str, bool]:
    """
    Clock domain of an instance and whether it was defaulted from neither
    the design nor the package.
    """
    spec = design.instances[name]
    if spec.clock_domain is not None:
        return spec.clock_domain, False
    package = packages[spec.package]
    return package.clock_domain, package.clock_domain == DEFAULT_CLOCK_DOMAIN
