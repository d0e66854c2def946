"""
Two-phase cycle kernel for ready/valid channels.

Every cycle the kernel settles valid/data forward from the registered state
of each component, then settles ready backward starting from ready=1 (the
greatest fixpoint), checks the handshake discipline, records the channel
counters and finally lets every component commit its registers.
"""

import logging
import random
from typing import Dict, List, Optional

from llpm.datatypes import HWType
from llpm.errors import HandshakeViolation, SimulationError

_logger = logging.getLogger("llpm")

_UNSET = object()


class Channel:
    """
    One ready/valid channel with its counters and accepted tokens.
    """

    def __init__(self, name: str, type: HWType, clock_domain: Optional[str] = None):
        self.name = name
        self.type = type
        self.clock_domain = clock_domain
        self.valid = False
        self.data = None
        self.ready = True
        self.transfers = 0
        self.stall_cycles = 0
        self.idle_cycles = 0
        self.tokens: List[object] = []
        self.cycles: List[int] = []
        self._held = _UNSET

    def __repr__(self):
        return f"Channel({self.name!r}, {self.type})"

    @property
    def width(self) -> int:
        return self.type.bit_width

    @property
    def fire(self) -> bool:
        return self.valid and self.ready

    def drive(self, valid: bool, data=None) -> None:
        self.valid = bool(valid)
        self.data = data if valid else None

    def check_hold(self, cycle: int) -> None:
        """
        Raises:
            HandshakeViolation: a token offered but not accepted last cycle
                was withdrawn or changed
        """
        if self._held is _UNSET:
            return
        if not self.valid:
            raise HandshakeViolation(f"cycle {cycle}: '{self.name}' dropped valid before its token was accepted")
        if self.data != self._held:
            raise HandshakeViolation(f"cycle {cycle}: '{self.name}' changed data before its token was accepted")

    def record(self, cycle: int) -> None:
        if self.valid and self.ready:
            self.transfers += 1
            self.tokens.append(self.data)
            self.cycles.append(cycle)
            self._held = _UNSET
        elif self.valid:
            self.stall_cycles += 1
            self._held = self.data
        else:
            self.idle_cycles += 1
            self._held = _UNSET


class Component:
    """
    Base class of everything the kernel clocks. forward() drives the valid
    and data of the channels the component produces, backward() drives the
    ready of the channels it consumes and commit() updates registers after
    the transfers of the cycle are known.
    """

    name = "component"

    def channels(self) -> List[Channel]:
        return []

    def draw(self, rng: random.Random) -> None:
        pass

    def forward(self) -> None:
        pass

    def backward(self) -> None:
        pass

    def commit(self) -> None:
        pass


class Kernel:
    """
    Clocks a set of components on one common tick.

    Args:
        components: producers, consumers and everything in between
        channels: every channel of the design
        seed: seeds the only random generator of the run
        max_settle: iterations allowed for each settle phase
    """

    def __init__(self, components: List[Component], channels: List[Channel], seed: int = 0, max_settle: int = 64):
        self.components = list(components)
        self.channels: Dict[str, Channel] = {}
        for channel in channels:
            if channel.name in self.channels:
                raise SimulationError(f"duplicate channel '{channel.name}'")
            self.channels[channel.name] = channel
        self.seed = seed
        self.rng = random.Random(seed)
        self.max_settle = max_settle
        self.cycle = 0
        self.drawing = sorted(
            (c for c in self.components if getattr(c, "channel", None) is not None), key=lambda c: c.channel.name
        )

    def _settle(self, phase: str, method: str, state) -> None:
        for _ in range(self.max_settle):
            before = state()
            for component in self.components:
                getattr(component, method)()
            if state() == before:
                return
        raise SimulationError(f"cycle {self.cycle}: {phase} settle did not converge in {self.max_settle} iterations")

    def step(self) -> None:
        """Simulate one cycle."""
        for component in self.drawing:
            component.draw(self.rng)
        for channel in self.channels.values():
            channel.drive(False)
            channel.ready = True
        channels = list(self.channels.values())
        self._settle("valid", "forward", lambda: [(c.valid, c.data) for c in channels])
        self._settle("ready", "backward", lambda: [c.ready for c in channels])
        for channel in channels:
            channel.check_hold(self.cycle)
            channel.record(self.cycle)
        for component in self.components:
            component.commit()
        self.cycle += 1

    def run(self, cycles: int, until=None) -> int:
        """
        Simulate up to `cycles` cycles; stop early once until() is true.
        Returns the number of cycles simulated.
        """
        start = self.cycle
        while self.cycle - start < cycles:
            if until is not None and until():
                break
            self.step()
        _logger.debug("simulated %d cycles", self.cycle - start)
        return self.cycle - start
