"""
Stimulus endpoints: token sources and sinks with Bernoulli backpressure.
"""

from collections import deque

from llpm.sim.kernel import Channel, Component


class Source(Component):
    """
    Offers a token list on a channel. Once valid, the token is held until
    accepted; otherwise a new token is offered with probability p.
    """

    def __init__(self, channel: Channel, tokens, probability: float = 1.0):
        self.name = f"source:{channel.name}"
        self.channel = channel
        self.tokens = list(tokens)
        self.probability = probability
        self.index = 0
        self.offering = False

    def channels(self):
        return [self.channel]

    @property
    def exhausted(self) -> bool:
        return self.index >= len(self.tokens)

    def draw(self, rng):
        roll = rng.random()
        if not self.offering and not self.exhausted and roll < self.probability:
            self.offering = True

    def forward(self):
        if self.offering:
            self.channel.drive(True, self.tokens[self.index])

    def commit(self):
        if self.channel.fire:
            self.index += 1
            self.offering = False


class Sink(Component):
    """Ready with probability p each cycle."""

    def __init__(self, channel: Channel, probability: float = 1.0):
        self.name = f"sink:{channel.name}"
        self.channel = channel
        self.probability = probability
        self.ready = True

    def channels(self):
        return [self.channel]

    def draw(self, rng):
        self.ready = rng.random() < self.probability

    def backward(self):
        self.channel.ready = self.ready


class Drain(Component):
    """Always-ready consumer of a channel nobody observes."""

    def __init__(self, channel: Channel):
        self.name = f"drain:{channel.name}"
        self.drained = channel

    def backward(self):
        self.drained.ready = True


class Fifo(Component):
    """
    Synchronous FIFO with registered occupancy: ready iff count < depth,
    valid iff count > 0. The head entry becomes visible `latency` cycles
    after it was written.
    """

    latency = 1

    def __init__(self, name: str, inlet: Channel, outlet: Channel, depth: int):
        self.name = name
        self.inlet = inlet
        self.outlet = outlet
        self.depth = depth
        self.entries = deque()
        self.now = 0

    def channels(self):
        return [self.inlet, self.outlet]

    @property
    def count(self) -> int:
        return len(self.entries)

    def forward(self):
        if self.entries and self.entries[0][1] <= self.now:
            self.outlet.drive(True, self.entries[0][0])

    def backward(self):
        self.inlet.ready = self.count < self.depth

    def commit(self):
        if self.outlet.fire:
            self.entries.popleft()
        if self.inlet.fire:
            self.entries.append((self.inlet.data, self.now + self.latency))
        self.now += 1


class CdcFifo(Fifo):
    """
    Dual-clock FIFO on the common tick: a written entry reaches the reader
    after the pointer register and the two-flop synchronizer, and freed
    space reaches the writer after the same delay.
    """

    latency = 3

    def __init__(self, name: str, inlet: Channel, outlet: Channel, depth: int):
        super().__init__(name, inlet, outlet, depth)
        self.freed = deque()

    def backward(self):
        pending = sum(1 for cycle in self.freed if cycle > self.now)
        self.inlet.ready = self.count + pending < self.depth

    def commit(self):
        if self.outlet.fire:
            self.freed.append(self.now + self.latency)
        while self.freed and self.freed[0] <= self.now:
            self.freed.popleft()
        super().commit()
