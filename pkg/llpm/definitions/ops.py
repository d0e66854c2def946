"""
Operation kinds of the dataflow IR, with their typing and value semantics.

Arithmetic and bitwise operations wrap modulo 2^w (two's complement for
sint); there are no traps.
"""

from enum import Enum

from llpm.codec import decode_int, encode_int
from llpm.datatypes import Array, HWType, SInt, Struct, UInt, Union
from llpm.errors import TypeCheckError
from llpm.values import UnionValue


class OpKind(Enum):
    INPUT = "input"
    OUTPUT = "output"
    CONST = "const"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    EQ = "eq"
    LT = "lt"
    AND = "and"
    OR = "or"
    XOR = "xor"
    NOT = "not"
    MUX = "mux"
    STRUCT_PACK = "struct_pack"
    FIELD_EXTRACT = "field_extract"
    ARRAY_PACK = "array_pack"
    ARRAY_INDEX = "array_index"
    UNION_PACK = "union_pack"
    TAG_OF = "tag_of"
    UNWRAP_VARIANT = "unwrap_variant"
    DELAY = "delay"

    @property
    def nickname(self):
        return self.value

    @property
    def is_boundary(self):
        return self in (OpKind.INPUT, OpKind.OUTPUT)


ARITHMETIC_OPS = {OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.AND, OpKind.OR, OpKind.XOR}

_FIXED_ARITY = {
    OpKind.INPUT: 0,
    OpKind.OUTPUT: 1,
    OpKind.CONST: 0,
    OpKind.ADD: 2,
    OpKind.SUB: 2,
    OpKind.MUL: 2,
    OpKind.EQ: 2,
    OpKind.LT: 2,
    OpKind.AND: 2,
    OpKind.OR: 2,
    OpKind.XOR: 2,
    OpKind.NOT: 1,
    OpKind.MUX: 3,
    OpKind.FIELD_EXTRACT: 1,
    OpKind.ARRAY_INDEX: 2,
    OpKind.UNION_PACK: 1,
    OpKind.TAG_OF: 1,
    OpKind.UNWRAP_VARIANT: 1,
    OpKind.DELAY: 1,
}

# Attributes each op kind requires on its node
REQUIRED_ATTRIBUTES = {
    OpKind.INPUT: ("name", "type"),
    OpKind.OUTPUT: ("name",),
    OpKind.CONST: ("type", "value"),
    OpKind.STRUCT_PACK: ("type",),
    OpKind.FIELD_EXTRACT: ("field",),
    OpKind.ARRAY_PACK: ("type",),
    OpKind.UNION_PACK: ("type", "variant"),
    OpKind.UNWRAP_VARIANT: ("variant",),
    OpKind.DELAY: ("type", "value"),
}


def arity(kind: OpKind, type: HWType = None) -> int:
    """
    Number of inputs an op kind consumes. Pack ops take their arity from the
    packed type.
    """
    if kind == OpKind.STRUCT_PACK:
        return len(type.fields) if isinstance(type, Struct) else -1
    if kind == OpKind.ARRAY_PACK:
        return type.count if isinstance(type, Array) else -1
    return _FIXED_ARITY[kind]


def _same_scalar(kind, input_types):
    a, b = input_types
    if not a.is_scalar:
        raise TypeCheckError(f"{kind.nickname} needs scalar operands, got {a}")
    if a != b:
        raise TypeCheckError(f"{kind.nickname} operand mismatch: {a} vs {b}")
    return a


def infer_type(kind: OpKind, input_types, type=None, field=None, variant=None) -> HWType:
    """
    Output type of an operation.

    Args:
        kind: the op kind
        input_types: types of the operands, in input order
        type, field, variant: node attributes, where the kind uses them

    Raises:
        TypeCheckError: on arity, width or type mismatches and unknown names
    """
    input_types = list(input_types)
    expected = arity(kind, type)
    if expected < 0:
        raise TypeCheckError(f"{kind.nickname} needs a {'struct' if kind == OpKind.STRUCT_PACK else 'array'} type")
    if len(input_types) != expected:
        raise TypeCheckError(f"{kind.nickname} expects {expected} inputs, got {len(input_types)}")

    if kind in (OpKind.INPUT, OpKind.CONST):
        if type is None:
            raise TypeCheckError(f"{kind.nickname} needs a type attribute")
        return type
    if kind == OpKind.OUTPUT:
        return input_types[0]
    if kind in ARITHMETIC_OPS:
        return _same_scalar(kind, input_types)
    if kind == OpKind.EQ:
        if input_types[0] != input_types[1]:
            raise TypeCheckError(f"eq operand mismatch: {input_types[0]} vs {input_types[1]}")
        return UInt(1)
    if kind == OpKind.LT:
        _same_scalar(kind, input_types)
        return UInt(1)
    if kind == OpKind.NOT:
        if not input_types[0].is_scalar:
            raise TypeCheckError(f"not needs a scalar operand, got {input_types[0]}")
        return input_types[0]
    if kind == OpKind.MUX:
        sel, a, b = input_types
        if sel != UInt(1):
            raise TypeCheckError(f"mux select must be uint<1>, got {sel}")
        if a != b:
            raise TypeCheckError(f"mux arm mismatch: {a} vs {b}")
        return a
    if kind == OpKind.STRUCT_PACK:
        for (name, field_type), actual in zip(type.fields, input_types):
            if field_type != actual:
                raise TypeCheckError(f"struct_pack field '{name}' expects {field_type}, got {actual}")
        return type
    if kind == OpKind.FIELD_EXTRACT:
        (struct,) = input_types
        if not isinstance(struct, Struct):
            raise TypeCheckError(f"field_extract needs a struct operand, got {struct}")
        if field not in struct.field_names:
            raise TypeCheckError(f"unknown field '{field}' in {struct}")
        return struct.field_type(field)
    if kind == OpKind.ARRAY_PACK:
        for index, actual in enumerate(input_types):
            if actual != type.elem:
                raise TypeCheckError(f"array_pack element {index} expects {type.elem}, got {actual}")
        return type
    if kind == OpKind.ARRAY_INDEX:
        array, index = input_types
        if not isinstance(array, Array):
            raise TypeCheckError(f"array_index needs an array operand, got {array}")
        if index != UInt(array.index_width):
            raise TypeCheckError(f"array_index index must be uint<{array.index_width}>, got {index}")
        return array.elem
    if kind == OpKind.UNION_PACK:
        if not isinstance(type, Union):
            raise TypeCheckError(f"union_pack needs a union type, got {type}")
        if variant not in type.variant_names:
            raise TypeCheckError(f"unknown variant '{variant}' in {type}")
        if input_types[0] != type.variant_type(variant):
            raise TypeCheckError(
                f"union_pack variant '{variant}' expects {type.variant_type(variant)}, got {input_types[0]}"
            )
        return type
    if kind == OpKind.TAG_OF:
        (union,) = input_types
        if not isinstance(union, Union):
            raise TypeCheckError(f"tag_of needs a union operand, got {union}")
        return UInt(max(union.tag_width, 1))
    if kind == OpKind.UNWRAP_VARIANT:
        (union,) = input_types
        if not isinstance(union, Union):
            raise TypeCheckError(f"unwrap_variant needs a union operand, got {union}")
        if variant not in union.variant_names:
            raise TypeCheckError(f"unknown variant '{variant}' in {union}")
        return union.variant_type(variant)
    if kind == OpKind.DELAY:
        if type is None:
            raise TypeCheckError("delay needs a type attribute")
        if input_types[0] != type:
            raise TypeCheckError(f"delay of {type} driven by {input_types[0]}")
        return type
    raise TypeCheckError(f"unknown op kind {kind!r}")


def wrap(v: int, t: HWType) -> int:
    """Reduce an integer into the range of a scalar type."""
    masked = v & ((1 << t.width) - 1)
    if isinstance(t, SInt) and masked >> (t.width - 1):
        return masked - (1 << t.width)
    return masked


def _bitwise(op, a, b, t):
    if isinstance(t, SInt):
        return wrap(op(encode_int(a, t), encode_int(b, t)), t)
    return op(a, b)


def evaluate(kind: OpKind, args, out_type: HWType, input_types=(), field=None, variant=None, value=None):
    """
    Compute the output value of one firing of a combinational op.

    INPUT and DELAY are stateful boundary ops and are resolved by the
    executor; CONST returns its attribute value.
    """
    if kind == OpKind.CONST:
        return value
    if kind == OpKind.OUTPUT:
        return args[0]
    if kind == OpKind.ADD:
        return wrap(args[0] + args[1], out_type)
    if kind == OpKind.SUB:
        return wrap(args[0] - args[1], out_type)
    if kind == OpKind.MUL:
        return wrap(args[0] * args[1], out_type)
    if kind == OpKind.AND:
        return _bitwise(lambda x, y: x & y, args[0], args[1], out_type)
    if kind == OpKind.OR:
        return _bitwise(lambda x, y: x | y, args[0], args[1], out_type)
    if kind == OpKind.XOR:
        return _bitwise(lambda x, y: x ^ y, args[0], args[1], out_type)
    if kind == OpKind.NOT:
        return wrap(~args[0], out_type)
    if kind == OpKind.EQ:
        t = input_types[0]
        return int(encode_int(args[0], t) == encode_int(args[1], t))
    if kind == OpKind.LT:
        return int(args[0] < args[1])
    if kind == OpKind.MUX:
        return args[1] if args[0] == 1 else args[2]
    if kind == OpKind.STRUCT_PACK:
        return {name: arg for (name, _), arg in zip(out_type.fields, args)}
    if kind == OpKind.FIELD_EXTRACT:
        return args[0][field]
    if kind == OpKind.ARRAY_PACK:
        return list(args)
    if kind == OpKind.ARRAY_INDEX:
        array, index = args
        return array[index] if index < len(array) else array[0]
    if kind == OpKind.UNION_PACK:
        return UnionValue(variant, args[0])
    if kind == OpKind.TAG_OF:
        return input_types[0].variant_index(args[0][0])
    if kind == OpKind.UNWRAP_VARIANT:
        union = input_types[0]
        actual, payload = args[0]
        if actual == variant:
            return payload
        raw = encode_int(payload, union.variant_type(actual))
        return decode_int(raw, out_type, strict=False)
    raise ValueError(f"{kind.nickname} is not a combinational op")


