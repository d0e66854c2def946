"""
Canonical text syntax of hardware types.

Grammar (whitespace is insignificant outside identifiers and numbers):

    type   := "void" | "bits<" N ">" | "uint<" N ">" | "sint<" N ">"
            | "array<" type "," N ">"
            | "struct{" entry ("," entry)* "}" | "union{" entry ("," entry)* "}"
    entry  := identifier ":" type
"""

from llpm.datatypes import Array, Bits, HWType, SInt, Struct, UInt, Union, Void
from llpm.errors import TypeDefinitionError, TypeSyntaxError

_SCALARS = {"bits": Bits, "uint": UInt, "sint": SInt}


class _Parser:
    def __init__(self, text):
        if not isinstance(text, str):
            raise TypeSyntaxError("type text must be a string", 0)
        try:
            text.encode("ascii")
        except UnicodeEncodeError as error:
            raise TypeSyntaxError("non-ASCII character", error.start) from error
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = repr(self.text[self.pos]) if self.pos < len(self.text) else "end of input"
            raise TypeSyntaxError(f"expected '{ch}', found {found}", self.pos)
        self.pos += 1

    def identifier(self):
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "_"):
            self.pos += 1
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
        if start == self.pos:
            raise TypeSyntaxError("expected identifier", start)
        return self.text[start : self.pos], start

    def number(self):
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start : self.pos]
        if digits in ("", "-"):
            raise TypeSyntaxError("expected integer", start)
        value = int(digits)
        if value < 1:
            raise TypeSyntaxError(f"width or count must be positive, got {value}", start)
        return value

    def parse_type(self) -> HWType:
        keyword, start = self.identifier()
        if keyword == "void":
            return Void()
        if keyword in _SCALARS:
            self.expect("<")
            width = self.number()
            self.expect(">")
            return _SCALARS[keyword](width)
        if keyword == "array":
            self.expect("<")
            elem = self.parse_type()
            self.expect(",")
            count = self.number()
            self.expect(">")
            return Array(elem, count)
        if keyword in ("struct", "union"):
            self.expect("{")
            entries = [self.entry()]
            while self.peek() == ",":
                self.pos += 1
                entries.append(self.entry())
            self.expect("}")
            try:
                return Struct(entries) if keyword == "struct" else Union(entries)
            except TypeDefinitionError as error:
                raise TypeSyntaxError(str(error), start) from error
        raise TypeSyntaxError(f"unknown type keyword '{keyword}'", start)

    def entry(self):
        name, _ = self.identifier()
        self.expect(":")
        return name, self.parse_type()


def parse_type(text: str) -> HWType:
    """
    Parse the canonical (or any whitespace variant of the) type syntax.

    Raises:
        TypeSyntaxError: with the byte offset of the first problem
    """
    parser = _Parser(text)
    t = parser.parse_type()
    parser.skip_ws()
    if parser.pos != len(parser.text):
        raise TypeSyntaxError("trailing characters", parser.pos)
    return t


def print_type(t: HWType) -> str:
    """
    Canonical text of a type: one space after commas and colons, no other spaces.
    """
    if isinstance(t, Void):
        return "void"
    if isinstance(t, Bits):
        return f"bits<{t.width}>"
    if isinstance(t, UInt):
        return f"uint<{t.width}>"
    if isinstance(t, SInt):
        return f"sint<{t.width}>"
    if isinstance(t, Array):
        return f"array<{print_type(t.elem)}, {t.count}>"
    if isinstance(t, Struct):
        return "struct{" + ", ".join(f"{n}: {print_type(f)}" for n, f in t.fields) + "}"
    if isinstance(t, Union):
        return "union{" + ", ".join(f"{n}: {print_type(v)}" for n, v in t.variants) + "}"
    raise TypeError(f"not a hardware type: {t!r}")
