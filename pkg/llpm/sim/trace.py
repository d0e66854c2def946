"""
Simulation results: per-channel tokens, accept cycles and counters, and
the typed debugger view of them.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from marshmallow import Schema, fields, post_load, validate

from llpm.datatypes import HWType
from llpm.type_field import HWTypeField
from llpm.values import format_value, value_from_json, value_to_json

TRACE_SCHEMA_VERSION = 1
COUNTER_MASK = 0xFFFFFFFF
COUNTER_NAMES = ("transfers", "stall_cycles", "idle_cycles")


@dataclass(frozen=True)
class ChannelTrace:
    name: str
    type: HWType
    tokens: tuple
    cycles: tuple
    transfers: int
    stall_cycles: int
    idle_cycles: int

    @classmethod
    def of(cls, channel) -> "ChannelTrace":
        return cls(
            channel.name,
            channel.type,
            tuple(channel.tokens),
            tuple(channel.cycles),
            channel.transfers,
            channel.stall_cycles,
            channel.idle_cycles,
        )

    def counters(self, wrap: bool = False) -> Dict[str, int]:
        """Counter values; wrap=True gives the 32-bit hardware view."""
        values = {"transfers": self.transfers, "stall_cycles": self.stall_cycles, "idle_cycles": self.idle_cycles}
        if wrap:
            return {k: v & COUNTER_MASK for k, v in values.items()}
        return values


@dataclass(frozen=True)
class Trace:
    cycles: int
    seed: int
    channels: Dict[str, ChannelTrace]
    taps: List[str] = field(default_factory=list)
    frequencies: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> ChannelTrace:
        return self.channels[name]

    def tokens(self, name: str) -> list:
        return list(self.channels[name].tokens)

    def tap_counters(self) -> Dict[str, Dict[str, int]]:
        return {name: self.channels[name].counters(wrap=True) for name in self.taps}

    def to_json(self) -> dict:
        return {
            "llpm_schema": TRACE_SCHEMA_VERSION,
            "kind": "trace",
            "cycles": self.cycles,
            "seed": self.seed,
            "channels": {
                name: {
                    "type": str(ch.type),
                    "tokens": [value_to_json(v, ch.type) for v in ch.tokens],
                    "cycles": list(ch.cycles),
                    "counters": ch.counters(),
                }
                for name, ch in sorted(self.channels.items())
            },
            "taps": {name: counters for name, counters in self.tap_counters().items()},
            "frequencies": dict(sorted(self.frequencies.items())),
        }

    def bandwidth(self, name: str) -> Optional[float]:
        """Achieved bits per second on a channel, if its clock frequency is known."""
        if name not in self.frequencies or self.cycles == 0:
            return None
        ch = self.channels[name]
        return ch.transfers / self.cycles * self.frequencies[name] * ch.type.bit_width


class CountersSchema(Schema):
    transfers = fields.Integer(required=True, validate=validate.Range(min=0))
    stall_cycles = fields.Integer(required=True, validate=validate.Range(min=0))
    idle_cycles = fields.Integer(required=True, validate=validate.Range(min=0))


class ChannelTraceSchema(Schema):
    type = HWTypeField(required=True)
    tokens = fields.List(fields.Raw(allow_none=True), required=True)
    cycles = fields.List(fields.Integer(), required=True)
    counters = fields.Nested(CountersSchema, required=True)


class TraceSchema(Schema):
    llpm_schema = fields.Integer(required=True, validate=validate.Equal(TRACE_SCHEMA_VERSION))
    kind = fields.String(required=True, validate=validate.Equal("trace"))
    cycles = fields.Integer(required=True, validate=validate.Range(min=0))
    seed = fields.Integer(load_default=0)
    channels = fields.Dict(keys=fields.String(), values=fields.Nested(ChannelTraceSchema), required=True)
    taps = fields.Dict(keys=fields.String(), values=fields.Nested(CountersSchema), load_default=dict)
    frequencies = fields.Dict(keys=fields.String(), values=fields.Float(), load_default=dict)

    @post_load
    def make_trace(self, data, **kwargs):
        channels = {}
        for name, ch in data["channels"].items():
            t = ch["type"]
            channels[name] = ChannelTrace(
                name,
                t,
                tuple(value_from_json(v, t, f"{name}[{i}]") for i, v in enumerate(ch["tokens"])),
                tuple(ch["cycles"]),
                **ch["counters"],
            )
        return Trace(data["cycles"], data["seed"], channels, sorted(data["taps"]), data["frequencies"])


def trace_from_json(data: dict) -> Trace:
    return TraceSchema().load(data)


def format_trace(trace: Trace, channel: Optional[str] = None) -> str:
    """
    Render channels as typed token listings, one token per line, e.g.

        add8_y : uint<8>  transfers=3 stall=0 idle=7
          @1  3
    """
    names = [channel] if channel is not None else sorted(trace.channels)
    lines = [f"{trace.cycles} cycles, seed {trace.seed}"]
    for name in names:
        ch = trace.channels[name]
        tap = "  [tap]" if name in trace.taps else ""
        bandwidth = trace.bandwidth(name)
        rate = f"  {bandwidth / 1e6:.3f} Mbit/s" if bandwidth is not None else ""
        lines.append(
            f"{name} : {ch.type}  transfers={ch.transfers} stall={ch.stall_cycles} idle={ch.idle_cycles}{rate}{tap}"
        )
        for cycle, token in zip(ch.cycles, ch.tokens):
            lines.append(f"  @{cycle}  {format_value(token, ch.type)}")
    return "\n".join(lines) + "\n"
