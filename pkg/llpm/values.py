"""
Typed values: the tokens that travel over channels.

A value mirrors its type tree: None for Void, int for scalars, list for
Array, dict (declared field order) for Struct and UnionValue for Union.
"""

from collections import namedtuple

from llpm.datatypes import Array, Bits, HWType, SInt, Struct, UInt, Union, Void
from llpm.errors import ValueTypeError

UnionValue = namedtuple("UnionValue", ["variant", "payload"])


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def scalar_range(t: HWType):
    """Inclusive-exclusive range of integers representable by a scalar type."""
    if isinstance(t, SInt):
        return -(1 << (t.width - 1)), 1 << (t.width - 1)
    return 0, 1 << t.width


def check_value(v, t: HWType, path: str = "") -> None:
    """
    Check that v is well-typed against t.

    Raises:
        ValueTypeError: naming the path into the value tree, e.g. "a[2].b"
    """
    if isinstance(t, Void):
        if v is not None:
            raise ValueTypeError(f"expected no value for void, got {v!r}", path)
    elif isinstance(t, (Bits, UInt, SInt)):
        if not _is_int(v):
            raise ValueTypeError(f"expected integer for {t}, got {v!r}", path)
        low, high = scalar_range(t)
        if not low <= v < high:
            raise ValueTypeError(f"{v} out of range for {t}", path)
    elif isinstance(t, Array):
        if not isinstance(v, (list, tuple)):
            raise ValueTypeError(f"expected list of {t.count} elements, got {v!r}", path)
        if len(v) != t.count:
            raise ValueTypeError(f"expected {t.count} elements, got {len(v)}", path)
        for index, elem in enumerate(v):
            check_value(elem, t.elem, f"{path}[{index}]")
    elif isinstance(t, Struct):
        if not isinstance(v, dict):
            raise ValueTypeError(f"expected struct fields {t.field_names}, got {v!r}", path)
        if set(v.keys()) != set(t.field_names):
            raise ValueTypeError(f"expected fields {t.field_names}, got {list(v.keys())}", path)
        for name, field_type in t.fields:
            check_value(v[name], field_type, f"{path}.{name}" if path else name)
    elif isinstance(t, Union):
        if not isinstance(v, tuple) or len(v) != 2:
            raise ValueTypeError(f"expected (variant, payload) pair, got {v!r}", path)
        variant, payload = v
        if variant not in t.variant_names:
            raise ValueTypeError(f"unknown variant {variant!r}", path)
        check_value(payload, t.variant_type(variant), f"{path}<{variant}>")
    else:
        raise ValueTypeError(f"not a hardware type: {t!r}", path)


def is_well_typed(v, t: HWType) -> bool:
    try:
        check_value(v, t)
    except ValueTypeError:
        return False
    return True


def zero_value(t: HWType):
    """The value whose encoding is all zeros."""
    if isinstance(t, Void):
        return None
    if isinstance(t, (Bits, UInt, SInt)):
        return 0
    if isinstance(t, Array):
        return [zero_value(t.elem) for _ in range(t.count)]
    if isinstance(t, Struct):
        return {name: zero_value(f) for name, f in t.fields}
    if isinstance(t, Union):
        name, variant_type = t.variants[0]
        return UnionValue(name, zero_value(variant_type))
    raise TypeError(f"not a hardware type: {t!r}")


def value_from_json(obj, t: HWType, path: str = ""):
    """
    Convert a JSON-shaped object into a canonical value and check it.

    Unions are written as single-key objects: {"variant": payload}.
    """
    if isinstance(t, Union):
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ValueTypeError(f"expected single-key object for {t}, got {obj!r}", path)
        ((variant, payload),) = obj.items()
        if variant not in t.variant_names:
            raise ValueTypeError(f"unknown variant {variant!r}", path)
        value = UnionValue(variant, value_from_json(payload, t.variant_type(variant), f"{path}<{variant}>"))
    elif isinstance(t, Array):
        if not isinstance(obj, list):
            raise ValueTypeError(f"expected list for {t}, got {obj!r}", path)
        value = [value_from_json(e, t.elem, f"{path}[{i}]") for i, e in enumerate(obj)]
    elif isinstance(t, Struct):
        if not isinstance(obj, dict):
            raise ValueTypeError(f"expected object for {t}, got {obj!r}", path)
        missing = [n for n in t.field_names if n not in obj]
        extra = [n for n in obj if n not in t.field_names]
        if missing or extra:
            raise ValueTypeError(f"field mismatch (missing {missing}, unexpected {extra})", path)
        value = {n: value_from_json(obj[n], f, f"{path}.{n}" if path else n) for n, f in t.fields}
    else:
        value = obj
    check_value(value, t, path)
    return value


def value_to_json(v, t: HWType):
    """Inverse of value_from_json."""
    if isinstance(t, Union):
        variant, payload = v
        return {variant: value_to_json(payload, t.variant_type(variant))}
    if isinstance(t, Array):
        return [value_to_json(e, t.elem) for e in v]
    if isinstance(t, Struct):
        return {n: value_to_json(v[n], f) for n, f in t.fields}
    return v


def format_value(v, t: HWType) -> str:
    """Compact human-readable rendering used by diagnostics and the trace viewer."""
    if isinstance(t, Void):
        return "()"
    if isinstance(t, Union):
        variant, payload = v
        return f"{variant}({format_value(payload, t.variant_type(variant))})"
    if isinstance(t, Array):
        return "[" + ", ".join(format_value(e, t.elem) for e in v) + "]"
    if isinstance(t, Struct):
        return "{" + ", ".join(f"{n}: {format_value(v[n], f)}" for n, f in t.fields) + "}"
    return str(v)


def random_value(t: HWType, rng):
    """A uniformly drawn well-typed value; rng is a random.Random."""
    if isinstance(t, Void):
        return None
    if isinstance(t, (Bits, UInt, SInt)):
        low, high = scalar_range(t)
        return rng.randrange(low, high)
    if isinstance(t, Array):
        return [random_value(t.elem, rng) for _ in range(t.count)]
    if isinstance(t, Struct):
        return {name: random_value(f, rng) for name, f in t.fields}
    if isinstance(t, Union):
        name, variant_type = t.variants[rng.randrange(len(t.variants))]
        return UnionValue(name, random_value(variant_type, rng))
    raise TypeError(f"not a hardware type: {t!r}")
