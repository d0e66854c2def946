import importlib.resources

from llpm.datatypes import UInt
from llpm.definitions.graph import GraphBuilder
from llpm.definitions.module import DataflowBody, Direction, Module, Port
from llpm.system.manifest import load_package

IR_FIXTURES = ("add8", "accum", "fir3", "mux_select", "union_dispatch", "struct_swap")


def definition_path(name):
    return str(importlib.resources.files("tests").joinpath(f"definition/{name}"))


def load_module(name):
    return load_package(definition_path(f"{name}.json")).module


def lagged_sum():
    """
    y[k] = x[k] + y[k-1] + y[k-2]. Both Delays are numbered before the adds
    that read them, and the first one is fed by the last add.
    """
    b = GraphBuilder()
    x = b.input("x", UInt(8))
    first = b.delay(UInt(8), 0)
    second = b.delay(UInt(8), 0, src=first)
    total = b.add_op(x, b.add_op(first, second))
    b.connect(first, total)
    b.output("y", total)
    ports = (Port("x", Direction.IN, UInt(8)), Port("y", Direction.OUT, UInt(8)))
    return Module("lagged_sum", ports, DataflowBody(b.build()))
