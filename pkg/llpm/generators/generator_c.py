import logging
import os

from jinja2 import Environment, PackageLoader, select_autoescape

from llpm.datatypes import Array, Struct, Union
from llpm.errors import ConfigError
from llpm.formatting import format_c_code, is_clang_format_available
from llpm.generators.filters import c_identifier, file_from_path, hex_address
from llpm.system.bridge import COUNTER_WORDS, CONTROL_COMMIT, STATUS_AVAILABLE, STATUS_SPACE, WORD_BITS

_logger = logging.getLogger("llpm")

env = Environment(loader=PackageLoader("llpm"), autoescape=select_autoescape(), trim_blocks=True, lstrip_blocks=True)


def payload_layout(t):
    """
    Top-level bit layout of a channel payload: (name, offset, width) for
    struct fields, array elements, or a union's tag and payload.
    """
    if isinstance(t, Struct):
        return [(name, t.field_offset(name), ft.bit_width) for name, ft in t.fields]
    if isinstance(t, Array):
        w = t.elem.bit_width
        return [(f"elem{i}", i * w, w) for i in range(t.count)]
    if isinstance(t, Union):
        layout = [("tag", 0, t.tag_width)] if t.tag_width else []
        return layout + [("payload", t.tag_width, t.payload_width)]
    return []


def process(instance, config):
    """
    Write the C header of a host bridge map to config["paths"]["output_header"].

    Raises:
        ConfigError: the output path is missing from the config
    """
    try:
        path = config["paths"]["output_header"]
    except KeyError as error:
        raise ConfigError("C header generation needs paths.output_header") from error

    env.filters["c_identifier"] = c_identifier
    env.filters["hex_address"] = hex_address
    env.filters["payload_layout"] = payload_layout
    env.filters["file_from_path"] = file_from_path

    template = env.get_template("bridge.h.jinja")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="\n") as output_file:
        print(
            template.render(
                bridge=instance,
                prefix=c_identifier(instance.system),
                guard=c_identifier(file_from_path(path)).replace(".", "_"),
                counter_words=COUNTER_WORDS,
                word_bits=WORD_BITS,
                status_available=STATUS_AVAILABLE,
                status_space=STATUS_SPACE,
                control_commit=CONTROL_COMMIT,
            ),
            file=output_file,
        )

    format_style = config.get("format_style")
    if format_style:
        if not format_c_code(path, format_style) and is_clang_format_available():
            _logger.warning("clang-format failed for %s", path)
    return path
