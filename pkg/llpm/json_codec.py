import json

import pint

from llpm.codec import BitPattern
from llpm.datatypes import HWType


class LlpmEncoder(json.JSONEncoder):
    """
    JSON Encoder for LLPM documents: hardware types serialize to their
    canonical text, bit patterns to binary strings and pint Quantities
    to strings.
    """

    def default(self, o):
        if isinstance(o, HWType):
            return str(o)
        if isinstance(o, BitPattern):
            return str(o)
        if isinstance(o, pint.Quantity):
            return str(o)
        return super().default(o)


def dumps(document):
    """Byte-stable text: two-space indent, trailing newline."""
    return json.dumps(document, indent=2, cls=LlpmEncoder) + "\n"


def write_document(path, document):
    with open(path, "w", newline="\n") as stream:
        stream.write(dumps(document))
