"""
Seeded generators of hardware types for property tests.
"""

from llpm.datatypes import Array, Bits, SInt, Struct, UInt, Union, Void

SCALARS = (Bits, UInt, SInt)


def random_type(rng, depth=4, max_width=64, allow_void=True):
    """A random type with nesting depth at most `depth` and scalar widths at most `max_width`."""
    roll = rng.random()
    if depth <= 1 or roll < 0.4:
        if allow_void and roll < 0.03:
            return Void()
        return rng.choice(SCALARS)(rng.randint(1, max_width))
    if roll < 0.6:
        return Array(random_type(rng, depth - 1, max_width), rng.randint(1, 4))
    entries = [(f"f{i}", random_type(rng, depth - 1, max_width)) for i in range(rng.randint(1, 4))]
    return Struct(entries) if roll < 0.8 else Union(entries)
