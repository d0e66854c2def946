"""
Structural lint over emitted Verilog text: module/endmodule pairing,
single-driver wires and the channel port-naming contract.
"""

import re
from collections import defaultdict
from typing import Dict, List, Optional

_COMMENT = re.compile(r"//[^\n]*")
_PORT = re.compile(r"^\s*(input|output)\s+wire\s+(?:\[[^\]]+\]\s*)?(\w+)\s*,?\s*$", re.MULTILINE)
_WIRE = re.compile(r"^\s*wire\s+(?:\[[^\]]+\]\s*)?(\w+)\s*;", re.MULTILINE)
_ASSIGN = re.compile(r"^\s*assign\s+(\w+)\s*=", re.MULTILINE)
_INSTANCE = re.compile(
    r"^\s*(\w+)\s*(?:#\s*\((?:[^()]|\([^()]*\))*\)\s*)?(\w+)\s*\(((?:\s*\.\w+\s*\([^()]*\)\s*,?)+)\s*\);",
    re.MULTILINE,
)
_CONNECTION = re.compile(r"\.(\w+)\s*\(\s*([^()]*?)\s*\)")
_KEYWORDS = {"module", "if", "else", "begin", "end", "always", "assign", "case", "wire", "reg", "input", "output"}


def split_modules(text: str):
    """
    Yield (name, body) for every module, and the pairing errors found.
    """
    text = _COMMENT.sub("", text)
    modules, errors = [], []
    tokens = re.finditer(r"^\s*(module\s+(\w+)|endmodule)\b", text, re.MULTILINE)
    current, start = None, 0
    for match in tokens:
        if match.group(2):
            if current is not None:
                errors.append(f"module '{match.group(2)}' starts inside module '{current}'")
            current, start = match.group(2), match.end()
        else:
            if current is None:
                errors.append("endmodule without module")
                continue
            modules.append((current, text[start : match.start()]))
            current = None
    if current is not None:
        errors.append(f"module '{current}' has no endmodule")
    return modules, errors


def module_ports(body: str) -> Dict[str, str]:
    header = body.split(");", 1)[0]
    return {name: direction for direction, name in _PORT.findall(header)}


def lint(text: str, externs: Optional[Dict[str, Dict[str, str]]] = None) -> List[str]:
    """
    Check emitted Verilog.

    Args:
        text: Verilog source
        externs: port directions ("input"/"output") of modules instantiated
            but not defined in the text

    Returns:
        List of problems (empty if the text is clean)
    """
    externs = externs or {}
    modules, errors = split_modules(text)
    names = [name for name, _ in modules]
    for name in sorted({n for n in names if names.count(n) > 1}):
        errors.append(f"module '{name}' is defined more than once")
    directions = {name: module_ports(body) for name, body in modules}
    directions.update({k: v for k, v in externs.items() if k not in directions})

    for name, body in modules:
        ports = directions[name]
        declared = set(_WIRE.findall(body)) | {p for p, d in ports.items() if d == "output"}
        drivers = defaultdict(int)
        exempt = set()
        for target in _ASSIGN.findall(body):
            drivers[target] += 1
        for module, instance, connections in _INSTANCE.findall(body):
            if module in _KEYWORDS:
                continue
            known = directions.get(module)
            for port, signal in _CONNECTION.findall(connections):
                if not re.fullmatch(r"\w+", signal or ""):
                    continue
                if known is None:
                    exempt.add(signal)
                elif known.get(port) == "output":
                    drivers[signal] += 1
        for wire in sorted(declared):
            if drivers[wire] > 1:
                errors.append(f"{name}: wire '{wire}' has {drivers[wire]} drivers")
            elif drivers[wire] == 0 and wire not in exempt:
                errors.append(f"{name}: wire '{wire}' is never driven")
    return errors


def check_port_contract(text: str, module: str, channels) -> List[str]:
    """
    Check that every (name, width) channel appears in the port list of a
    module as `name_data` (only when width > 0), `name_valid` and `name_ready`.
    """
    modules, errors = split_modules(text)
    bodies = dict(modules)
    if module not in bodies:
        return errors + [f"module '{module}' not found"]
    ports = module_ports(bodies[module])
    for name, width in channels:
        expected = ([f"{name}_data"] if width > 0 else []) + [f"{name}_valid", f"{name}_ready"]
        for signal in expected:
            if signal not in ports:
                errors.append(f"{module}: port '{signal}' missing")
        if width == 0 and f"{name}_data" in ports:
            errors.append(f"{module}: zero-width channel '{name}' has a data port")
    return errors
