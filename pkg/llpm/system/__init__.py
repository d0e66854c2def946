from llpm.system.assembly import AssembledSystem, Connection, Export, Instance, assemble, load_assembled
from llpm.system.bridge import HostBridgeMap, synth_host_bridge
from llpm.system.deadlock import check_deadlock
from llpm.system.design import Endpoint, SystemDesign, load_design
from llpm.system.manifest import Package, load_package, package_to_json
from llpm.system.partition import PartitionResult, PartitionSpec, partition
from llpm.system.perf import insert_perf_taps
