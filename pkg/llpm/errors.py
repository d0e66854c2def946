"""
Exception hierarchy shared by every LLPM pass.
"""


class LlpmError(Exception):
    """Base class of all LLPM errors."""

    pass


class TypeSyntaxError(LlpmError):
    """Raised by the type parser; carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class TypeDefinitionError(LlpmError):
    """Raised when a hardware type is constructed with invalid parameters."""

    pass


class ValueTypeError(LlpmError):
    """Raised when a value does not match the type it is used with."""

    def __init__(self, message, path=""):
        where = path if path else "<root>"
        super().__init__(f"{where}: {message}")
        self.path = path


class DecodeError(LlpmError):
    pass


class TypeCheckError(LlpmError):
    """Raised by infer_type on mismatched operand types."""

    pass


class CombinationalCycleError(LlpmError):
    def __init__(self, nodes):
        super().__init__("combinational cycle through nodes " + ", ".join(str(n) for n in nodes))
        self.nodes = list(nodes)


class NotInterpretableError(LlpmError):
    """Raised when a module has no dataflow body to execute."""

    pass


class InterpretError(LlpmError):
    pass


class SimulationError(LlpmError):
    pass


class HandshakeViolation(SimulationError):
    """A source dropped valid or changed data before its token was accepted."""

    pass


class EmitError(LlpmError):
    pass


class AssemblyError(LlpmError):
    pass


class BridgeError(LlpmError):
    pass


class PartitionError(LlpmError):
    pass


class ConfigError(LlpmError):
    pass


class PackageError(LlpmError):
    """A package manifest parsed but its module does not validate."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
