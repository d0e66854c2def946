"""
Host bridge synthesis: a memory-mapped register contract exposing
exported channels and perf-tap counters to host software.

Layout, 32-bit words, byte addresses:

- channels sorted by name from address 0, each region holding
  ceil(W/32) data words (LSB word first), one status word and one
  control word, rounded up to 16 bytes
- a read-only counter region after the channel regions, three words per
  tapped channel (transfers, stall cycles, idle cycles), tap channels
  sorted by name

Status bit 0 is set when a token is available to the host (host-read
channels), bit 1 when the channel has space (host-write channels).
Writing 1 to control bit 0 commits: it pops the token a host-read channel
shows, or pushes the data words of a host-write channel.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from llpm.datatypes import HWType
from llpm.errors import BridgeError

_logger = logging.getLogger("llpm")

WORD_BITS = 32
WORD_BYTES = WORD_BITS // 8
ALIGNMENT = 16
STATUS_AVAILABLE = 0x1
STATUS_SPACE = 0x2
CONTROL_COMMIT = 0x1
COUNTER_WORDS = ("transfers", "stall_cycles", "idle_cycles")
API_SCHEMA_VERSION = 1


def data_words(width: int) -> int:
    return -(-width // WORD_BITS)


def align(address: int) -> int:
    return -(-address // ALIGNMENT) * ALIGNMENT


class Direction:
    HOST_READ = "host_read"
    HOST_WRITE = "host_write"


@dataclass(frozen=True)
class ChannelRegion:
    channel: str
    type: HWType
    direction: str
    base: int

    @property
    def width(self) -> int:
        return self.type.bit_width

    @property
    def data_words(self) -> int:
        return data_words(self.width)

    @property
    def words(self) -> int:
        return self.data_words + 2

    @property
    def data_addresses(self) -> List[int]:
        return [self.base + WORD_BYTES * i for i in range(self.data_words)]

    @property
    def status(self) -> int:
        return self.base + WORD_BYTES * self.data_words

    @property
    def control(self) -> int:
        return self.status + WORD_BYTES

    @property
    def size(self) -> int:
        return align(WORD_BYTES * self.words)

    @property
    def end(self) -> int:
        return self.base + self.size


@dataclass(frozen=True)
class CounterEntry:
    channel: str
    base: int

    def address(self, counter: str) -> int:
        return self.base + WORD_BYTES * COUNTER_WORDS.index(counter)


@dataclass
class HostBridgeMap:
    system: str
    clock_domain: Optional[str]
    channels: List[ChannelRegion]
    counters: List[CounterEntry] = field(default_factory=list)
    counter_base: int = 0
    checksum: int = 0

    @property
    def counter_size(self) -> int:
        return align(WORD_BYTES * len(COUNTER_WORDS) * len(self.counters))

    @property
    def size(self) -> int:
        return self.counter_base + self.counter_size

    def region(self, channel: str) -> ChannelRegion:
        for region in self.channels:
            if region.channel == channel:
                return region
        raise KeyError(channel)

    def counter(self, channel: str) -> CounterEntry:
        for entry in self.counters:
            if entry.channel == channel:
                return entry
        raise KeyError(channel)

    def regions(self) -> List[Tuple[int, int, str]]:
        """(start, end, owner) of every region, end exclusive."""
        regions = [(r.base, r.end, r.channel) for r in self.channels]
        if self.counters:
            regions.append((self.counter_base, self.size, "counters"))
        return regions

    def decode_address(self, address: int) -> Tuple[str, str, int]:
        """
        Which register an address selects: (owner, register, index).

        Raises:
            BridgeError: unaligned or unmapped address
        """
        if address % WORD_BYTES:
            raise BridgeError(f"address 0x{address:x} is not word aligned")
        for region in self.channels:
            if region.base <= address < region.end:
                offset = (address - region.base) // WORD_BYTES
                if offset < region.data_words:
                    return region.channel, "data", offset
                if address == region.status:
                    return region.channel, "status", 0
                if address == region.control:
                    return region.channel, "control", 0
                return region.channel, "reserved", 0
        for entry in self.counters:
            offset = (address - entry.base) // WORD_BYTES
            if 0 <= offset < len(COUNTER_WORDS):
                return entry.channel, COUNTER_WORDS[offset], 0
        raise BridgeError(f"address 0x{address:x} is not mapped")

    def to_json(self) -> dict:
        """The host API description; embeds each channel's canonical type text."""
        return {
            "llpm_schema": API_SCHEMA_VERSION,
            "kind": "api_map",
            "system": self.system,
            "checksum": f"0x{self.checksum:08x}",
            "word_bits": WORD_BITS,
            "alignment": ALIGNMENT,
            "clock_domain": self.clock_domain,
            "status_bits": {"available": STATUS_AVAILABLE, "space": STATUS_SPACE},
            "control_bits": {"commit": CONTROL_COMMIT},
            "channels": [
                {
                    "name": r.channel,
                    "type": str(r.type),
                    "width": r.width,
                    "direction": r.direction,
                    "base": r.base,
                    "data": r.data_addresses,
                    "status": r.status,
                    "control": r.control,
                    "words": r.words,
                    "size": r.size,
                }
                for r in self.channels
            ],
            "counters": {
                "base": self.counter_base,
                "size": self.counter_size,
                "entries": [
                    {"channel": e.channel, **{name: e.address(name) for name in COUNTER_WORDS}} for e in self.counters
                ],
            },
            "size": self.size,
        }


def build_map(system_name: str, exposed, taps, checksum: int = 0) -> HostBridgeMap:
    """
    Lay out a bridge map.

    Args:
        exposed: (channel, type, direction, clock_domain) tuples
        taps: tapped channel names
    """
    domains = sorted({domain for _, _, _, domain in exposed})
    if len(domains) > 1:
        raise BridgeError(f"exposed channels span clock domains {domains}; the bridge needs one")
    regions, address = [], 0
    for channel, type, direction, _ in sorted(exposed, key=lambda e: e[0]):
        region = ChannelRegion(channel, type, direction, address)
        regions.append(region)
        address = region.end
    counter_base = address
    counters = [
        CounterEntry(channel, counter_base + i * WORD_BYTES * len(COUNTER_WORDS))
        for i, channel in enumerate(sorted(set(taps)))
    ]
    return HostBridgeMap(system_name, domains[0] if domains else None, regions, counters, counter_base, checksum)


def synth_host_bridge(system, expose) -> HostBridgeMap:
    """
    Expose exported channels of an assembled system to the host and attach
    the resulting map to the system (`system.bridge`).

    Raises:
        BridgeError: unknown, connected or duplicated channels, or channels
            from more than one clock domain
    """
    expose = list(expose)
    duplicates = sorted({c for c in expose if expose.count(c) > 1})
    if duplicates:
        raise BridgeError(f"channels exposed twice: {duplicates}")
    exports = {e.channel: e for e in system.exports}
    connected = system.connected_channels()
    exposed = []
    for channel in expose:
        if channel in connected:
            raise BridgeError(f"channel '{channel}' is connected inside the system and cannot be exposed")
        if channel not in exports:
            raise BridgeError(f"channel '{channel}' is not an exported channel")
        export = exports[channel]
        direction = Direction.HOST_WRITE if export.is_input else Direction.HOST_READ
        exposed.append((channel, export.type, direction, system.instances[export.instance].clock_domain))
    bridge = build_map(system.name, exposed, system.taps, system.checksum)
    system.bridge = bridge
    system.expose = sorted(expose)
    _logger.debug("bridge for %s: %d channels, %d counters", system.name, len(bridge.channels), len(bridge.counters))
    return bridge


def counter_image(bridge: HostBridgeMap, counters: Dict[str, Dict[str, int]]) -> Dict[int, int]:
    """Register image of the counter region for per-channel counter values."""
    image = {}
    for entry in bridge.counters:
        values = counters.get(entry.channel, {})
        for name in COUNTER_WORDS:
            image[entry.address(name)] = values.get(name, 0) & 0xFFFFFFFF
    return image
