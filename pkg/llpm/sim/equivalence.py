"""
Latency-insensitive equivalence harness: random token streams under
random Bernoulli backpressure, compared against the interpreter.
"""

import logging
import random
from dataclasses import dataclass
from typing import Optional

from llpm.definitions.module import Module
from llpm.interp import run
from llpm.pipeline import PipelinedNetlist
from llpm.sim.simulator import netlist_bench
from llpm.sim.stimulus import Stimulus
from llpm.values import format_value, random_value, value_to_json

_logger = logging.getLogger("llpm")

SOURCE_PROBABILITIES = (0.3, 0.7, 1.0)
SINK_PROBABILITIES = (0.0, 0.3, 0.7, 1.0)


@dataclass(frozen=True)
class Counterexample:
    trial: int
    seed: int
    channel: str
    index: int
    expected: object
    actual: object
    type: object = None
    missing: bool = False

    def __str__(self):
        def show(v):
            return format_value(v, self.type) if self.type is not None else repr(v)

        actual = "<missing>" if self.missing else show(self.actual)
        return (
            f"trial {self.trial} (seed {self.seed}): channel '{self.channel}' token {self.index}: "
            f"expected {show(self.expected)}, got {actual}"
        )


@dataclass(frozen=True)
class EquivalenceResult:
    trials: int
    counterexample: Optional[Counterexample] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def __bool__(self):
        return self.passed


def cycle_budget(tokens: int, latency: int, sinks) -> int:
    """Cycles simulated per trial; blocked sinks get a short window."""
    if any(p == 0.0 for p in sinks.values()):
        return 4 * (tokens + latency) + 20
    return 20 * (tokens + latency + 2) + 50


def run_trial(module: Module, netlist: PipelinedNetlist, trial: int, trial_seed: int, max_stream: int):
    rng = random.Random(trial_seed)
    count = rng.randint(0, max_stream)
    streams = {p.name: [random_value(p.type, rng) for _ in range(count)] for p in module.inputs}
    sources = {p.name: rng.choice(SOURCE_PROBABILITIES) for p in module.inputs}
    sinks = {p.name: rng.choice(SINK_PROBABILITIES) for p in module.outputs}
    expected = run(module, streams, count)

    stimulus = Stimulus(
        {name: [value_to_json(v, module.port(name).type) for v in tokens] for name, tokens in streams.items()},
        sources,
        sinks,
        seed=trial_seed,
    )
    bench = netlist_bench(netlist, stimulus)
    complete = all(p > 0.0 for p in sinks.values())

    def finished():
        return all(len(bench.received(name)) >= count for name in expected)

    bench.kernel.run(cycle_budget(count, netlist.latency, sinks), until=finished)

    for port in module.outputs:
        want = expected[port.name]
        got = bench.received(port.name)
        for index, token in enumerate(got[:count]):
            if token != want[index]:
                return Counterexample(trial, trial_seed, port.name, index, want[index], token, port.type)
        if complete and len(got) < count:
            return Counterexample(trial, trial_seed, port.name, len(got), want[len(got)], None, port.type, missing=True)
    return None


def equivalence_check(
    module: Module, netlist: PipelinedNetlist, trials: int, seed: int = 0, max_stream: int = 24
) -> EquivalenceResult:
    """
    Run `trials` random (stream, backpressure) trials and compare every
    output channel's token sequence with the interpreter.

    Accepted tokens must match the interpreter's prefix; when no sink is
    blocked outright, every expected token must also arrive. Returns the
    first counterexample found, if any.
    """
    rng = random.Random(seed)
    for trial in range(trials):
        trial_seed = rng.getrandbits(63)
        found = run_trial(module, netlist, trial, trial_seed, max_stream)
        if found is not None:
            _logger.info("equivalence check failed: %s", found)
            return EquivalenceResult(trial + 1, found)
    return EquivalenceResult(trials)
