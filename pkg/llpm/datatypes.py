"""
Structural hardware types carried by every LLPM channel.

Types are immutable and compare structurally: two Struct types are equal
only when their field names, field order and field types all match.
"""

import re
from dataclasses import dataclass
from typing import Tuple

from llpm.errors import TypeDefinitionError

IDENTIFIER_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def clog2(n: int) -> int:
    """
    Number of bits needed to index n distinct items, with clog2(1) == 0.
    """
    return (n - 1).bit_length() if n > 1 else 0


class HWType:
    """
    Base class of all hardware types.
    """

    @property
    def bit_width(self) -> int:
        raise NotImplementedError

    @property
    def is_scalar(self) -> bool:
        return False

    def __str__(self):
        from llpm.type_syntax import print_type

        return print_type(self)


@dataclass(frozen=True, repr=False)
class Void(HWType):
    """Zero-width type, used for pure control token channels."""

    @property
    def bit_width(self) -> int:
        return 0

    def __repr__(self):
        return "Void()"


@dataclass(frozen=True, repr=False)
class _Scalar(HWType):
    width: int

    def __post_init__(self):
        if not isinstance(self.width, int) or isinstance(self.width, bool) or self.width < 1:
            raise TypeDefinitionError(f"{type(self).__name__} width must be a positive integer, got {self.width!r}")

    @property
    def bit_width(self) -> int:
        return self.width

    @property
    def is_scalar(self) -> bool:
        return True

    def __repr__(self):
        return f"{type(self).__name__}({self.width})"


@dataclass(frozen=True, repr=False)
class Bits(_Scalar):
    pass


@dataclass(frozen=True, repr=False)
class UInt(_Scalar):
    pass


@dataclass(frozen=True, repr=False)
class SInt(_Scalar):
    pass


@dataclass(frozen=True, repr=False)
class Array(HWType):
    elem: HWType
    count: int

    def __post_init__(self):
        if not isinstance(self.elem, HWType):
            raise TypeDefinitionError(f"Array element must be a hardware type, got {self.elem!r}")
        if not isinstance(self.count, int) or isinstance(self.count, bool) or self.count < 1:
            raise TypeDefinitionError(f"Array count must be a positive integer, got {self.count!r}")

    @property
    def bit_width(self) -> int:
        return self.count * self.elem.bit_width

    @property
    def index_width(self) -> int:
        """Width of the UInt index accepted by ArrayIndex."""
        return max(clog2(self.count), 1)

    def __repr__(self):
        return f"Array({self.elem!r}, {self.count})"


def _check_entries(kind, entries):
    entries = tuple((name, t) for name, t in entries)
    if not entries:
        raise TypeDefinitionError(f"{kind} must have at least one entry")
    seen = set()
    for name, t in entries:
        if not isinstance(name, str) or not IDENTIFIER_PATTERN.match(name):
            raise TypeDefinitionError(f"Invalid {kind} entry name {name!r}")
        if name in seen:
            raise TypeDefinitionError(f"Duplicate {kind} entry name '{name}'")
        if not isinstance(t, HWType):
            raise TypeDefinitionError(f"{kind} entry '{name}' must be a hardware type, got {t!r}")
        seen.add(name)
    return entries


@dataclass(frozen=True, repr=False)
class Struct(HWType):
    fields: Tuple[Tuple[str, HWType], ...]

    def __post_init__(self):
        entries = self.fields.items() if isinstance(self.fields, dict) else self.fields
        object.__setattr__(self, "fields", _check_entries("Struct", entries))

    @property
    def bit_width(self) -> int:
        return sum(t.bit_width for _, t in self.fields)

    @property
    def field_names(self):
        return [name for name, _ in self.fields]

    def field_type(self, name: str) -> HWType:
        for field_name, t in self.fields:
            if field_name == name:
                return t
        raise KeyError(name)

    def field_offset(self, name: str) -> int:
        """LSB position of a field; the first declared field sits at bit 0."""
        offset = 0
        for field_name, t in self.fields:
            if field_name == name:
                return offset
            offset += t.bit_width
        raise KeyError(name)

    def __repr__(self):
        return "Struct({" + ", ".join(f"{n!r}: {t!r}" for n, t in self.fields) + "})"


@dataclass(frozen=True, repr=False)
class Union(HWType):
    variants: Tuple[Tuple[str, HWType], ...]

    def __post_init__(self):
        entries = self.variants.items() if isinstance(self.variants, dict) else self.variants
        object.__setattr__(self, "variants", _check_entries("Union", entries))

    @property
    def tag_width(self) -> int:
        return clog2(len(self.variants))

    @property
    def payload_width(self) -> int:
        return max(t.bit_width for _, t in self.variants)

    @property
    def bit_width(self) -> int:
        return self.tag_width + self.payload_width

    @property
    def variant_names(self):
        return [name for name, _ in self.variants]

    def variant_index(self, name: str) -> int:
        return self.variant_names.index(name)

    def variant_type(self, name: str) -> HWType:
        for variant_name, t in self.variants:
            if variant_name == name:
                return t
        raise KeyError(name)

    def __repr__(self):
        return "Union({" + ", ".join(f"{n!r}: {t!r}" for n, t in self.variants) + "})"


def bit_width(t: HWType) -> int:
    """
    Number of bits occupied by a value of type t.

    Args:
        t: A hardware type

    Returns:
        Void is 0 bits wide; a Union adds ceil(log2(#variants)) tag bits to its
        widest payload.
    """
    return t.bit_width
