"""
Marshmallow schemas for the serialized form of dataflow graphs and ports.
"""

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from llpm.datatypes import IDENTIFIER_PATTERN
from llpm.definitions.graph import DataflowGraph, Node
from llpm.definitions.module import Direction, Port
from llpm.definitions.ops import REQUIRED_ATTRIBUTES, OpKind
from llpm.errors import ValueTypeError
from llpm.type_field import HWTypeField
from llpm.values import value_from_json, value_to_json

identifier = validate.Regexp(IDENTIFIER_PATTERN, error="Invalid identifier '{input}'.")


class OpKindField(fields.Field):
    """
    Marshmallow Field that serializes to the snake_case op name and
    deserializes to a member of the OpKind enum.
    """

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else value.nickname

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return OpKind(value)
        except ValueError as error:
            raise ValidationError(f"Unknown op '{value}'.") from error


class DirectionField(fields.Field):
    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else value.nickname

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return Direction(value)
        except ValueError as error:
            raise ValidationError("Direction must be 'in' or 'out'.") from error


class NodeSchema(Schema):
    id = fields.Integer(required=True, strict=True, validate=validate.Range(min=0))
    op = OpKindField(required=True)
    inputs = fields.List(fields.Integer(strict=True), load_default=list)
    name = fields.String(validate=identifier)
    type = HWTypeField()
    value = fields.Raw(allow_none=True)
    init = fields.Raw(allow_none=True)
    field = fields.String(validate=identifier)
    variant = fields.String(validate=identifier)

    @validates_schema
    def validate_attributes(self, data, **kwargs):
        """
        Check that the attributes the op kind needs are present and that
        constant and initial values are well-typed.
        """
        kind = data.get("op")
        if kind is None:
            return
        for attribute in REQUIRED_ATTRIBUTES.get(kind, ()):
            key = "init" if kind == OpKind.DELAY and attribute == "value" else attribute
            if key not in data:
                raise ValidationError(f"'{kind.nickname}' node requires '{key}'.", key)
        key = "init" if kind == OpKind.DELAY else "value"
        if kind in (OpKind.CONST, OpKind.DELAY) and "type" in data:
            try:
                value_from_json(data[key], data["type"])
            except ValueTypeError as error:
                raise ValidationError(str(error), key) from error

    @post_load
    def make_node(self, data, **kwargs):
        kind = data["op"]
        value = data.get("init") if kind == OpKind.DELAY else data.get("value")
        if kind in (OpKind.CONST, OpKind.DELAY):
            value = value_from_json(value, data["type"])
        return Node(
            data["id"],
            kind,
            tuple(data["inputs"]),
            name=data.get("name"),
            type=data.get("type"),
            value=value,
            field=data.get("field"),
            variant=data.get("variant"),
        )


class GraphSchema(Schema):
    nodes = fields.List(fields.Nested(NodeSchema), required=True)

    @post_load
    def make_graph(self, data, **kwargs):
        ids = [n.id for n in data["nodes"]]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValidationError(f"Duplicate node ids {duplicates}.", "nodes")
        return DataflowGraph(tuple(data["nodes"]))


class PortSchema(Schema):
    name = fields.String(required=True, validate=identifier)
    direction = DirectionField(required=True)
    type = HWTypeField(required=True)

    @post_load
    def make_port(self, data, **kwargs):
        return Port(data["name"], data["direction"], data["type"])


def node_to_json(node: Node) -> dict:
    out = {"id": node.id, "op": node.kind.nickname}
    if node.inputs:
        out["inputs"] = list(node.inputs)
    for attribute in ("name", "field", "variant"):
        if getattr(node, attribute) is not None:
            out[attribute] = getattr(node, attribute)
    if node.type is not None:
        out["type"] = str(node.type)
    if node.kind == OpKind.CONST:
        out["value"] = value_to_json(node.value, node.type)
    elif node.kind == OpKind.DELAY:
        out["init"] = value_to_json(node.value, node.type)
    return out


def graph_to_json(graph: DataflowGraph) -> dict:
    return {"nodes": [node_to_json(n) for n in graph.nodes]}


def graph_from_json(data: dict) -> DataflowGraph:
    """
    Raises:
        marshmallow.ValidationError: with path-addressed messages
    """
    return GraphSchema().load(data)


def port_to_json(port: Port) -> dict:
    return {"name": port.name, "direction": port.direction.nickname, "type": str(port.type)}
