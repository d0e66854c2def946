from dataclasses import dataclass, field
from typing import Dict, List, Optional

from marshmallow import Schema, fields, post_load, validate

STIMULUS_SCHEMA_VERSION = 1

probability = validate.Range(min=0.0, max=1.0, error="Probability must be within [0, 1].")


@dataclass
class Stimulus:
    """
    Token streams for input channels and Bernoulli policies for both ends.
    Token values stay in JSON form until they are checked against the
    channel types of a target.
    """

    inputs: Dict[str, List[object]] = field(default_factory=dict)
    sources: Dict[str, float] = field(default_factory=dict)
    sinks: Dict[str, float] = field(default_factory=dict)
    seed: int = 0
    cycles: Optional[int] = None

    def source_probability(self, channel: str) -> float:
        return self.sources.get(channel, 1.0)

    def sink_probability(self, channel: str) -> float:
        return self.sinks.get(channel, 1.0)

    def to_json(self) -> dict:
        out = {
            "llpm_schema": STIMULUS_SCHEMA_VERSION,
            "kind": "stimulus",
            "inputs": self.inputs,
            "sources": self.sources,
            "sinks": self.sinks,
            "seed": self.seed,
        }
        if self.cycles is not None:
            out["cycles"] = self.cycles
        return out


class StimulusSchema(Schema):
    llpm_schema = fields.Integer(validate=validate.Equal(STIMULUS_SCHEMA_VERSION))
    kind = fields.String(validate=validate.Equal("stimulus"))
    inputs = fields.Dict(keys=fields.String(), values=fields.List(fields.Raw(allow_none=True)), load_default=dict)
    sources = fields.Dict(keys=fields.String(), values=fields.Float(validate=probability), load_default=dict)
    sinks = fields.Dict(keys=fields.String(), values=fields.Float(validate=probability), load_default=dict)
    seed = fields.Integer(load_default=0, validate=validate.Range(min=0, max=(1 << 64) - 1))
    cycles = fields.Integer(validate=validate.Range(min=0))

    @post_load
    def make_stimulus(self, data, **kwargs):
        return Stimulus(data["inputs"], data["sources"], data["sinks"], data["seed"], data.get("cycles"))


def load_stimulus(data: dict) -> Stimulus:
    """
    Raises:
        marshmallow.ValidationError: schema violations
    """
    return StimulusSchema().load(data)
