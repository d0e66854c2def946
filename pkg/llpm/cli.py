"""LLPM CLI

Usage:
    llpm check <package> [options]
    llpm interp <package> --stimulus=<file> --steps=<n> [options]
    llpm pipeline <package> [options]
    llpm verify <package> [--trials=<n>] [options]
    llpm emit <input> [--check] [options]
    llpm assemble <design> [options]
    llpm sim <target> --stimulus=<file> [--cycles=<n>] [options]
    llpm bridge <assembled> --expose=<channels> [--header=<file>] [--docs=<file>] [options]
    llpm partition <design> -k <k> --capacity=<caps> [options]
    llpm trace <trace> [--channel=<name>] [options]
    llpm -h | --help
    llpm --version

Arguments:
    <package>     Package manifest JSON
    <input>       Netlist, package, design or assembled system JSON
    <design>      System design JSON (an assembled system is accepted too)
    <target>      Assembled system, design or package JSON
    <assembled>   Assembled system JSON
    <trace>       Trace JSON written by `llpm sim`

Options:
    -o <file>, --output=<file>  Output file; standard output when omitted
    --config=<file>             LLPM config file; llpm_config.yaml is looked up from the working directory upwards when omitted
    --latency=<file>            Latency table, YAML or JSON; overrides the config's latency section
    --stimulus=<file>           Stimulus JSON (inputs, sources, sinks, seed)
    --steps=<n>                 Interpreter firings
    --trials=<n>                Random equivalence trials [default: 100]
    --seed=<s>                  Random seed; overrides the stimulus or config seed
    --cycles=<n>                Simulated cycles; the stimulus' cycles when omitted
    --expose=<channels>         Comma-separated exported channels
    --header=<file>             Also write a C header of the register map
    --docs=<file>               Also write an RST page of the register map
    -k <k>                      Number of partitions
    --capacity=<caps>           Comma-separated area capacities; a single value applies to every partition
    --channel=<name>            Show one channel only
    --check                     Run iverilog on the emitted Verilog when it is installed
    -v, --verbose               Print debug messages
"""

import json
import logging
import os
import sys
import tempfile
from importlib.metadata import PackageNotFoundError, version as package_version
from typing import Dict, List, Optional

from docopt import DocoptExit, docopt
from marshmallow import ValidationError

from llpm.config import LlpmConfig, load_config, load_latency_table
from llpm.deserializer import check_header, load_document
from llpm.errors import ConfigError, LlpmError, PackageError
from llpm.formatting import check_verilog_syntax, is_iverilog_available
from llpm.generators import generator_c, generator_rst
from llpm.generators.generator_system import emit_system
from llpm.generators.generator_verilog import emit_module, write_verilog
from llpm.interp import run
from llpm.json_codec import dumps
from llpm.pipeline import PipelinedNetlist, netlist_from_json, netlist_to_json, pipeline
from llpm.sim import equivalence_check, format_trace, load_stimulus, simulate, trace_from_json
from llpm.system import PartitionSpec, assemble, partition, synth_host_bridge
from llpm.system.assembly import assembled_from_json
from llpm.system.design import design_from_json
from llpm.system.manifest import load_package, package_from_json
from llpm.validation import validate
from llpm.values import value_from_json, value_to_json

shell_name = "LLPM"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ERROR = 2

STREAMS_SCHEMA_VERSION = 1

_logger = logging.getLogger("llpm")


class DiagnosticFormatter(logging.Formatter):
    """One diagnostic per line, prefixed by the lower-case level name."""

    def format(self, record):
        return f"{record.levelname.lower()}: {record.getMessage()}"


def configure_logging(verbose: bool = False) -> logging.Logger:
    """
    Configures logging options and
    generates a default logger instance.
    """
    logger = logging.getLogger("llpm")
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    for handler in list(logger.handlers):
        if isinstance(handler.formatter, DiagnosticFormatter):
            logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(DiagnosticFormatter())
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def schema_messages(messages, path: str = "") -> List[str]:
    """Flatten marshmallow's nested message dict into 'path: message' lines."""
    if isinstance(messages, dict):
        lines = []
        for key, value in messages.items():
            lines += schema_messages(value, f"{path}.{key}" if path else str(key))
        return lines
    if isinstance(messages, list):
        lines = []
        for message in messages:
            lines += schema_messages(message, path)
        return lines
    return [f"{path}: {messages}" if path else str(messages)]


def _read_json(path: str):
    with open(path) as stream:
        try:
            return json.load(stream)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({e})") from e


def _base_dir(path: str) -> str:
    return os.path.dirname(os.path.abspath(path))


def _output(arguments, text: str) -> None:
    path = arguments["--output"]
    if path:
        write_verilog(text, path)
    else:
        sys.stdout.write(text)


def _output_dir(arguments) -> str:
    path = arguments["--output"]
    return _base_dir(path) if path else os.getcwd()


def _seed(arguments, default: int) -> int:
    return int(arguments["--seed"]) if arguments["--seed"] is not None else default


def _load_system(path: str, config: LlpmConfig):
    """Assemble a design document, or re-assemble an assembled one."""
    document = load_document(path)
    if document.get("kind") == "assembled":
        return assembled_from_json(document, _base_dir(path))
    check_header(document, "design")
    design = design_from_json(document, _base_dir(path))
    return assemble(design, table=config.latency, cdc_depth=config.cdc_depth)


def _load_target(path: str, config: LlpmConfig):
    """A netlist, a module or a system, by document kind."""
    document = load_document(path)
    kind = document.get("kind")
    if kind == "netlist":
        return netlist_from_json(document)
    if kind == "package":
        return package_from_json(document, _base_dir(path)).module
    if kind in ("design", "assembled"):
        return _load_system(path, config)
    raise ValidationError(f"{path}: cannot use a '{kind}' document here.", "kind")


def check(arguments, config: LlpmConfig) -> int:
    package = load_package(arguments["<package>"], check=False)
    diagnostics = validate(package.module)
    for diagnostic in diagnostics:
        _logger.error("%s: %s", package.name, diagnostic)
    if diagnostics:
        return EXIT_FAILURE
    print(f"{package.name} {package.version}: ok ({package.checksum_string})")
    return EXIT_OK


def interp(arguments, config: LlpmConfig) -> int:
    module = load_package(arguments["<package>"]).module
    stimulus = load_stimulus(_read_json(arguments["--stimulus"]))
    steps = int(arguments["--steps"])
    inputs = {}
    for port in module.inputs:
        tokens = stimulus.inputs.get(port.name, [])
        inputs[port.name] = [value_from_json(v, port.type, f"{port.name}[{i}]") for i, v in enumerate(tokens)]
    outputs = run(module, inputs, steps)
    document = {
        "llpm_schema": STREAMS_SCHEMA_VERSION,
        "kind": "streams",
        "module": module.name,
        "steps": steps,
        "outputs": {
            port.name: [value_to_json(v, port.type) for v in outputs[port.name]] for port in module.outputs
        },
    }
    _output(arguments, dumps(document))
    return EXIT_OK


def pipeline_command(arguments, config: LlpmConfig) -> int:
    module = load_package(arguments["<package>"]).module
    if module.behavior is None:
        raise LlpmError(f"module '{module.name}' is extern RTL without a behavioral model")
    netlist = pipeline(module, table=config.latency)
    _logger.debug("%s: latency %d, %d registers", module.name, netlist.latency, netlist.register_count)
    _output(arguments, dumps(netlist_to_json(netlist)))
    return EXIT_OK


def verify(arguments, config: LlpmConfig) -> int:
    module = load_package(arguments["<package>"]).module
    if module.behavior is None:
        raise LlpmError(f"module '{module.name}' is extern RTL without a behavioral model")
    netlist = pipeline(module, table=config.latency)
    trials = int(arguments["--trials"])
    result = equivalence_check(module, netlist, trials, _seed(arguments, 0), config.max_stream)
    if not result:
        _logger.error("%s: %s", module.name, result.counterexample)
        return EXIT_FAILURE
    print(f"{module.name}: {result.trials} trials passed (latency {netlist.latency})")
    return EXIT_OK


def emit(arguments, config: LlpmConfig) -> int:
    target = _load_target(arguments["<input>"], config)
    if isinstance(target, PipelinedNetlist):
        text, sources = emit_module(target), []
    elif hasattr(target, "instances"):
        text = emit_system(target)
        sources = sorted({p for i in target.instances.values() for p in i.package.source_paths()})
    else:
        text, sources = emit_module(pipeline(target, table=config.latency)), []
    _output(arguments, text)
    if arguments["--check"]:
        if not is_iverilog_available():
            _logger.warning("iverilog is not installed; syntax check skipped")
            return EXIT_OK
        with tempfile.TemporaryDirectory() as scratch:
            path = arguments["--output"] or os.path.join(scratch, "emitted.v")
            if not arguments["--output"]:
                write_verilog(text, path)
            passed, messages = check_verilog_syntax([path] + sources)
        for line in messages.splitlines():
            (_logger.warning if passed else _logger.error)("iverilog: %s", line)
        if not passed:
            return EXIT_FAILURE
    return EXIT_OK


def assemble_command(arguments, config: LlpmConfig) -> int:
    system = _load_system(arguments["<design>"], config)
    _output(arguments, dumps(system.to_json(_output_dir(arguments))))
    for cycle in system.report.deadlocks:
        _logger.error("deadlock: zero-storage cycle %s", " -> ".join(cycle + cycle[:1]))
    return EXIT_OK if system.report.ok else EXIT_FAILURE


def sim(arguments, config: LlpmConfig) -> int:
    target = _load_target(arguments["<target>"], config)
    stimulus = load_stimulus(_read_json(arguments["--stimulus"]))
    stimulus.seed = _seed(arguments, stimulus.seed)
    cycles = int(arguments["--cycles"]) if arguments["--cycles"] is not None else None
    trace = simulate(target, stimulus, cycles, table=config.latency, max_settle=config.max_settle)
    _output(arguments, dumps(trace.to_json()))
    return EXIT_OK


def bridge(arguments, config: LlpmConfig) -> int:
    system = _load_system(arguments["<assembled>"], config)
    expose = [c.strip() for c in arguments["--expose"].split(",") if c.strip()]
    bridge_map = synth_host_bridge(system, expose)
    _output(arguments, dumps(bridge_map.to_json()))
    if arguments["--header"]:
        generator_c.process(bridge_map, {"paths": {"output_header": arguments["--header"]}})
    if arguments["--docs"]:
        generator_rst.process(bridge_map, {"paths": {"output_file": arguments["--docs"]}})
    return EXIT_OK


def partition_command(arguments, config: LlpmConfig) -> int:
    system = _load_system(arguments["<design>"], config)
    try:
        capacities = [float(c) for c in arguments["--capacity"].split(",")]
        k = int(arguments["-k"])
    except ValueError as error:
        raise ConfigError(f"bad partition arguments: {error}") from error
    spec = PartitionSpec(k, tuple(capacities), config.exact_limit, config.restarts, _seed(arguments, config.seed))
    result = partition(system, spec)
    _output(arguments, dumps(result.to_json()))
    return EXIT_OK


def trace(arguments, config: LlpmConfig) -> int:
    recorded = trace_from_json(load_document(arguments["<trace>"], "trace"))
    channel = arguments["--channel"]
    if channel is not None and channel not in recorded.channels:
        _logger.error("trace has no channel '%s'", channel)
        return EXIT_FAILURE
    _output(arguments, format_trace(recorded, channel) + "\n")
    return EXIT_OK


COMMANDS = {
    "check": check,
    "interp": interp,
    "pipeline": pipeline_command,
    "verify": verify,
    "emit": emit,
    "assemble": assemble_command,
    "sim": sim,
    "bridge": bridge,
    "partition": partition_command,
    "trace": trace,
}


def _version() -> str:
    try:
        return package_version("llpm")
    except PackageNotFoundError:
        return "unknown"


def execute(arguments: Dict[str, object]) -> int:
    """Run the selected subcommand and map failures to exit codes."""
    try:
        config = load_config(arguments["--config"], traverse_path=True)
        if arguments["--latency"]:
            config.latency = load_latency_table(arguments["--latency"])
        command = next(name for name in COMMANDS if arguments[name])
        return COMMANDS[command](arguments, config)
    except ValidationError as error:
        for line in schema_messages(error.messages):
            _logger.error(line)
        return EXIT_ERROR
    except (OSError, ConfigError) as error:
        _logger.error(str(error))
        return EXIT_ERROR
    except PackageError as error:
        _logger.error(str(error))
        for diagnostic in error.diagnostics:
            _logger.error(str(diagnostic))
        return EXIT_FAILURE
    except LlpmError as error:
        _logger.error(str(error))
        return EXIT_FAILURE


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Runs the LLPM CLI
    """
    try:
        arguments = docopt(__doc__, argv=argv, version=shell_name + " " + _version())
    except DocoptExit as usage:
        print(str(usage), file=sys.stderr)
        return EXIT_ERROR
    configure_logging(bool(arguments["--verbose"]))
    return execute(arguments)


if __name__ == "__main__":
    sys.exit(run_cli())
