"""
Package manifests: a module plus the metadata needed to compose it into
systems (version, clock domain, area estimate, extern RTL description).
"""

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from llpm.deserializer import checksum, load_document
from llpm.definitions.module import DataflowBody, ExternBody, Module, SignalNames
from llpm.definitions.schemas import GraphSchema, PortSchema, graph_to_json, identifier, port_to_json
from llpm.errors import PackageError
from llpm.validation import validate as validate_module

_logger = logging.getLogger("llpm")

PACKAGE_SCHEMA_VERSION = 1
DEFAULT_CLOCK_DOMAIN = "clk0"

SEMVER_PATTERN = re.compile(
    r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)"
    r"(?:-([0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?(?:\+([0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?$"
)


def parse_version(text: str) -> Tuple[int, int, int]:
    """
    Raises:
        ValueError: if the text is not a semantic version
    """
    match = SEMVER_PATTERN.match(text or "")
    if match is None:
        raise ValueError(f"'{text}' is not a semantic version (MAJOR.MINOR.PATCH)")
    return int(match.group(1)), int(match.group(2)), int(match.group(3))


@dataclass(frozen=True)
class Package:
    """
    A loaded package. `base_dir` resolves relative extern source paths.
    """

    module: Module
    version: str
    clock_domain: str = DEFAULT_CLOCK_DOMAIN
    area_estimate: float = 0.0
    base_dir: str = "."
    checksum: int = field(default=0, compare=False)

    @property
    def name(self) -> str:
        return self.module.name

    @property
    def registered(self) -> bool:
        return self.module.is_extern and self.module.body.registered

    @property
    def checksum_string(self) -> str:
        return f"0x{self.checksum:08x}"

    def source_paths(self):
        if not self.module.is_extern:
            return []
        return [os.path.normpath(os.path.join(self.base_dir, s)) for s in self.module.body.sources]


class SignalNamesSchema(Schema):
    data = fields.String(allow_none=True, load_default=None)
    valid = fields.String(required=True)
    ready = fields.String(required=True)

    @post_load
    def make_signals(self, data, **kwargs):
        return SignalNames(data["data"], data["valid"], data["ready"])


class ExternSchema(Schema):
    sources = fields.List(fields.String(), required=True, validate=validate.Length(min=1))
    top = fields.String(required=True, validate=identifier)
    signals = fields.Dict(keys=fields.String(), values=fields.Nested(SignalNamesSchema), load_default=dict)
    model = fields.Nested(GraphSchema, load_default=None, allow_none=True)
    registered = fields.Boolean(load_default=False)


class BodySchema(Schema):
    ir = fields.Nested(GraphSchema)
    extern = fields.Nested(ExternSchema)

    @validates_schema
    def validate_kind(self, data, **kwargs):
        if ("ir" in data) == ("extern" in data):
            raise ValidationError("Body must have exactly one of 'ir' or 'extern'.")


class PackageManifestSchema(Schema):
    llpm_schema = fields.Integer(required=True, validate=validate.Equal(PACKAGE_SCHEMA_VERSION))
    kind = fields.String(load_default="package", validate=validate.Equal("package"))
    name = fields.String(required=True, validate=identifier)
    version = fields.String(required=True)
    ports = fields.List(fields.Nested(PortSchema), required=True)
    clock_domain = fields.String(load_default=DEFAULT_CLOCK_DOMAIN, validate=identifier)
    area_estimate = fields.Float(load_default=0.0, validate=validate.Range(min=0.0))
    body = fields.Nested(BodySchema, required=True)

    def __init__(self, *args, base_dir=".", **kwargs):
        self.base_dir = base_dir
        super().__init__(*args, **kwargs)

    @validates_schema
    def validate_manifest(self, data, **kwargs):
        """
        Check the version text and that an extern signal mapping, when
        given, covers exactly the declared ports.
        """
        try:
            parse_version(data.get("version"))
        except ValueError as error:
            raise ValidationError(str(error), "version") from error
        extern = data.get("body", {}).get("extern")
        if extern and extern["signals"]:
            names = {p.name for p in data.get("ports", [])}
            missing = sorted(names - set(extern["signals"]))
            extra = sorted(set(extern["signals"]) - names)
            if missing or extra:
                raise ValidationError(
                    f"Extern signal mapping must cover every port (missing {missing}, unknown {extra}).", "body"
                )
            for port in data.get("ports", []):
                if port.width > 0 and extern["signals"][port.name].data is None:
                    raise ValidationError(f"Port '{port.name}' carries data but maps no data signal.", "body")

    @post_load
    def make_package(self, data, **kwargs):
        body = data["body"]
        if "ir" in body:
            module_body = DataflowBody(body["ir"])
        else:
            extern = body["extern"]
            module_body = ExternBody(
                tuple(extern["sources"]), extern["top"], extern["signals"], extern["model"], extern["registered"]
            )
        module = Module(data["name"], tuple(data["ports"]), module_body)
        return Package(module, data["version"], data["clock_domain"], data["area_estimate"], self.base_dir)


def default_signals(port_name: str, width: int) -> SignalNames:
    return SignalNames(f"{port_name}_data" if width > 0 else None, f"{port_name}_valid", f"{port_name}_ready")


def signal_names(module: Module, port_name: str) -> SignalNames:
    """RTL signals of a port: the extern mapping, or the standard naming contract."""
    if module.is_extern and port_name in module.body.signals:
        return module.body.signals[port_name]
    return default_signals(port_name, module.port(port_name).width)


def package_from_json(document: dict, base_dir: str = ".", check: bool = True) -> Package:
    """
    Build a package from a manifest document. The checksum is taken over
    the canonical form, so it survives a dump and reload.

    Raises:
        marshmallow.ValidationError: schema violations, path-addressed
        PackageError: the module does not validate (when check is set)
    """
    package = PackageManifestSchema(base_dir=base_dir).load(document)
    package = Package(
        package.module,
        package.version,
        package.clock_domain,
        package.area_estimate,
        package.base_dir,
        checksum(package_to_json(package)),
    )
    if check:
        diagnostics = validate_module(package.module)
        if diagnostics:
            raise PackageError(f"package '{package.name}' does not validate", diagnostics)
    return package


def load_package(path: str, check: bool = True) -> Package:
    """
    Load a package manifest file. The module is available as `.module`.

    Raises:
        OSError: the file cannot be read
        marshmallow.ValidationError: schema violations, path-addressed
        PackageError: IR validation diagnostics
    """
    document = load_document(path, "package")
    package = package_from_json(document, os.path.dirname(os.path.abspath(path)), check)
    _logger.debug("loaded package %s %s (%s)", package.name, package.version, package.checksum_string)
    return package


def package_to_json(package: Package) -> dict:
    """Manifest document of a package; load(dump(p)) reproduces p."""
    module = package.module
    if module.is_extern:
        extern = module.body
        body = {
            "extern": {
                "sources": list(extern.sources),
                "top": extern.top,
                "signals": {
                    name: {"data": s.data, "valid": s.valid, "ready": s.ready} for name, s in extern.signals.items()
                },
                "registered": extern.registered,
            }
        }
        if extern.model is not None:
            body["extern"]["model"] = graph_to_json(extern.model)
    else:
        body = {"ir": graph_to_json(module.body.graph)}
    return {
        "llpm_schema": PACKAGE_SCHEMA_VERSION,
        "kind": "package",
        "name": module.name,
        "version": package.version,
        "ports": [port_to_json(p) for p in module.ports],
        "clock_domain": package.clock_domain,
        "area_estimate": package.area_estimate,
        "body": body,
    }


def module_package(module: Module, version: str = "0.1.0", clock_domain: Optional[str] = None) -> Package:
    """Wrap a module built in Python as a package."""
    package = Package(module, version, clock_domain or DEFAULT_CLOCK_DOMAIN)
    return Package(module, version, package.clock_domain, 0.0, ".", checksum(package_to_json(package)))
