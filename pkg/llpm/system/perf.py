"""
Performance taps: per-channel transfer, stall and idle counters.
"""

import logging

from llpm.errors import AssemblyError
from llpm.system.bridge import synth_host_bridge

_logger = logging.getLogger("llpm")

COUNTER_BITS = 32


def insert_perf_taps(system, channels):
    """
    Attach 32-bit wrapping counters to channels of an assembled system.
    Taps accumulate; a bridge already attached is re-laid out so its
    counter region covers every tap.

    Raises:
        AssemblyError: unknown channel
    """
    known = system.channel_names()
    unknown = sorted(set(channels) - known)
    if unknown:
        raise AssemblyError(f"cannot tap unknown channels {unknown}")
    system.taps = sorted(set(system.taps) | set(channels))
    if system.bridge is not None:
        synth_host_bridge(system, system.expose)
    _logger.debug("taps on %s: %s", system.name, ", ".join(system.taps) or "none")
    return system
