"""
Bit-level encoding of typed values.

Layout is LSB-first: Array element 0 and the first Struct field sit at
bit 0; a Union stores its tag (declaration index) at bit 0 and the payload
immediately above it, zero-padded to the widest variant.
"""

from dataclasses import dataclass

from llpm.datatypes import Array, Bits, HWType, SInt, Struct, UInt, Union, Void
from llpm.errors import DecodeError
from llpm.values import UnionValue, check_value


@dataclass(frozen=True)
class BitPattern:
    """A bit vector of fixed width; bit 0 is the LSB of value."""

    width: int
    value: int

    def __post_init__(self):
        if self.width < 0 or not 0 <= self.value < (1 << self.width):
            raise DecodeError(f"value {self.value} does not fit in {self.width} bits")

    def __str__(self):
        return format(self.value, f"0{self.width}b") if self.width else ""

    def __len__(self):
        return self.width

    @classmethod
    def from_string(cls, text: str) -> "BitPattern":
        """Parse an MSB-first string of 0/1 characters (underscores ignored)."""
        digits = text.replace("_", "")
        if any(c not in "01" for c in digits):
            raise DecodeError(f"invalid bit string {text!r}")
        return cls(len(digits), int(digits, 2) if digits else 0)


def encode_int(v, t: HWType) -> int:
    """Encode v as an integer holding bit_width(t) bits; v must be well-typed."""
    if isinstance(t, Void):
        return 0
    if isinstance(t, (Bits, UInt)):
        return v
    if isinstance(t, SInt):
        return v & ((1 << t.width) - 1)
    if isinstance(t, Array):
        word, offset, step = 0, 0, t.elem.bit_width
        for elem in v:
            word |= encode_int(elem, t.elem) << offset
            offset += step
        return word
    if isinstance(t, Struct):
        word, offset = 0, 0
        for name, field_type in t.fields:
            word |= encode_int(v[name], field_type) << offset
            offset += field_type.bit_width
        return word
    if isinstance(t, Union):
        variant, payload = v
        return t.variant_index(variant) | (encode_int(payload, t.variant_type(variant)) << t.tag_width)
    raise TypeError(f"not a hardware type: {t!r}")


def decode_int(word: int, t: HWType, strict: bool = True):
    """
    Decode the low bit_width(t) bits of word.

    With strict=False an out-of-range Union tag is reduced modulo the number
    of variants instead of raising; this mirrors reinterpreting raw bits.
    """
    word &= (1 << t.bit_width) - 1
    if isinstance(t, Void):
        return None
    if isinstance(t, (Bits, UInt)):
        return word
    if isinstance(t, SInt):
        return word - (1 << t.width) if word >> (t.width - 1) else word
    if isinstance(t, Array):
        step = t.elem.bit_width
        return [decode_int(word >> (i * step), t.elem, strict) for i in range(t.count)]
    if isinstance(t, Struct):
        value, offset = {}, 0
        for name, field_type in t.fields:
            value[name] = decode_int(word >> offset, field_type, strict)
            offset += field_type.bit_width
        return value
    if isinstance(t, Union):
        tag = word & ((1 << t.tag_width) - 1)
        if tag >= len(t.variants):
            if strict:
                raise DecodeError(f"union tag {tag} out of range for {len(t.variants)} variants")
            tag %= len(t.variants)
        name, variant_type = t.variants[tag]
        return UnionValue(name, decode_int(word >> t.tag_width, variant_type, strict))
    raise TypeError(f"not a hardware type: {t!r}")


def encode(v, t: HWType) -> BitPattern:
    """
    Encode a well-typed value into a bit pattern of length bit_width(t).

    Raises:
        ValueTypeError: naming the path of the first ill-typed sub-value
    """
    check_value(v, t)
    return BitPattern(t.bit_width, encode_int(v, t))


def decode(bits, t: HWType):
    """
    Exact inverse of encode.

    Args:
        bits: a BitPattern or an MSB-first string of 0/1 characters
        t: type to decode against

    Raises:
        DecodeError: on a length mismatch or an out-of-range Union tag
    """
    if isinstance(bits, str):
        bits = BitPattern.from_string(bits)
    if bits.width != t.bit_width:
        raise DecodeError(f"expected {t.bit_width} bits for {t}, got {bits.width}")
    return decode_int(bits.value, t, strict=True)
