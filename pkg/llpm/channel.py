from functools import cached_property
from typing import Dict

from llpm.errors import BridgeError
from llpm.system.bridge import COUNTER_WORDS, WORD_BYTES, HostBridgeMap, counter_image


class BridgeChannel:
    """
    Base host access channel to be implemented by
    the client (a PCIe BAR, a UART debug link, a model).
    """

    def __init__(self, bridge: HostBridgeMap):
        self.bridge = bridge

    def read_word(self, address):
        """
        Read one 32-bit register.
        Arguments:
            address: byte address inside the bridge map
        Returns:
            The register value as an integer
        """
        raise NotImplementedError

    def write_word(self, address, value):
        """
        Write one 32-bit register.
        Arguments:
            address: byte address inside the bridge map
            value: integer below 2**32
        """
        raise NotImplementedError

    @cached_property
    def max_address(self):
        return self.bridge.size - WORD_BYTES

    def read_counters(self, channel: str) -> Dict[str, int]:
        """The three perf counters of a tapped channel, read as host software would."""
        entry = self.bridge.counter(channel)
        return {name: self.read_word(entry.address(name)) for name in COUNTER_WORDS}


class SnapshotChannel(BridgeChannel):
    """
    Read-only channel over a register image taken from a simulation trace.
    Unmapped or unsampled registers read as zero.
    """

    def __init__(self, bridge: HostBridgeMap, image: Dict[int, int]):
        super().__init__(bridge)
        self.image = dict(image)

    @classmethod
    def from_trace(cls, bridge: HostBridgeMap, trace) -> "SnapshotChannel":
        return cls(bridge, counter_image(bridge, trace.tap_counters()))

    def read_word(self, address):
        self.bridge.decode_address(address)
        return self.image.get(address, 0)

    def write_word(self, address, value):
        raise BridgeError(f"snapshot of {self.bridge.system} is read-only (write to 0x{address:x})")
