from llpm.sim.equivalence import Counterexample, EquivalenceResult, equivalence_check
from llpm.sim.kernel import Channel, Component, Kernel
from llpm.sim.simulator import netlist_bench, simulate, system_bench
from llpm.sim.stimulus import Stimulus, load_stimulus
from llpm.sim.trace import Trace, format_trace, trace_from_json
