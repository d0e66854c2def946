import os

from llpm.datatypes import HWType, SInt


def vrange(width: int) -> str:
    """
    Verilog vector range for a width, with a trailing space, or nothing for
    single-bit control signals.

    Args:
        width: number of bits (>= 1)

    Returns:
        String like "[7:0] "
    """
    return f"[{width - 1}:0] "


def literal(width: int, value: int) -> str:
    """
    Sized hexadecimal Verilog literal.

    Args:
        width: literal width in bits (>= 1)
        value: nonnegative integer below 2**width

    Returns:
        String like "8'h2a"
    """
    digits = max((width + 3) // 4, 1)
    return f"{width}'h{value:0{digits}x}"


def bit(value: bool) -> str:
    return "1'b1" if value else "1'b0"


def signed_operand(name: str, t: HWType) -> str:
    """Wrap an operand in $signed() where the comparison must be signed."""
    return f"$signed({name})" if isinstance(t, SInt) else name


def conjunction(terms, empty="1'b1") -> str:
    """AND of signal terms; the empty conjunction is true."""
    terms = list(terms)
    return " & ".join(terms) if terms else empty


def file_from_path(input: str) -> str:
    """
    Get the file string from a path string.

    Args:
        input: File path

    Returns:
        Base filename without directory path
    """
    return os.path.basename(input)


def c_identifier(input: str) -> str:
    """Upper-case macro form of a channel or system name."""
    return input.upper()


def hex_address(value: int) -> str:
    return f"0x{value:08X}"
